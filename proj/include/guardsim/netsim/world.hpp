/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>

#include "guardsim/coap/message.hpp"
#include "guardsim/core/address.hpp"
#include "guardsim/core/rng.hpp"
#include "guardsim/netsim/energy.hpp"
#include "guardsim/netsim/event_queue.hpp"
#include "guardsim/netsim/link.hpp"
#include "guardsim/netsim/trace.hpp"

namespace guardsim::netsim {

/// A message in flight. `attack` marks frames sent by an attacker or caused
/// by attacker traffic; it is simulation metadata, invisible to nodes' logic.
struct Frame {
    coap::SimMessage msg;
    bool attack = false;
    std::uint64_t id = 0;
    Address last_hop{};  ///< set on delivery: the node that put it on the link
};

class World;

class Node {
public:
    Node(Address address, std::string name) : address_(address), name_(std::move(name)) {}
    virtual ~Node() = default;

    Node(const Node&) = delete;
    Node& operator=(const Node&) = delete;

    Address address() const { return address_; }
    const std::string& name() const { return name_; }

    /// Called for every frame arriving at this node, whether addressed to it
    /// or routed through it.
    virtual void on_frame(World& world, Frame frame) = 0;

    /// Called once when the run starts.
    virtual void start(World&) {}

private:
    Address address_;
    std::string name_;
};

struct WorldOptions {
    std::uint64_t seed = 42;
    LinkParams internet{10'000'000.0, SimTime::from_ms(50), 64};
    bool verbose_trace = false;
};

/// Deterministic single-threaded simulation: nodes, links, clock, energy and
/// trace. Routing: a direct link wins; LAN devices send everything to their
/// gateway; Internet-attached nodes reach LAN devices through the device's
/// gateway and each other over lazily created Internet links.
class World {
public:
    explicit World(WorldOptions opts = {});
    ~World();

    World(const World&) = delete;
    World& operator=(const World&) = delete;

    template <class T, class... Args>
    T& add_node(Args&&... args)
    {
        auto p = std::make_unique<T>(std::forward<Args>(args)...);
        T& ref = *p;
        insert(std::move(p));
        return ref;
    }

    void attach_internet(Address a) { internet_.insert(a); }
    void attach_lan(Address device, Address gateway, LinkParams up, LinkParams down);
    void add_link(Address from, Address to, LinkParams p);

    Node* node(Address a);
    std::optional<Address> gateway_of(Address device) const;
    bool on_internet(Address a) const { return internet_.count(a) > 0; }
    const std::string& name_of(Address a) const;

    /// Routes a frame from `from` towards frame.msg.dst.
    void send(Address from, Frame frame);
    /// Sends on the specific link from -> next_hop.
    void send_via(Address from, Address next_hop, Frame frame);

    Link* link(Address from, Address to);
    SimTime link_idle_at(Address from, Address to);

    /// Hook invoked when a frame is accepted onto link from -> to. It may alter
    /// the frame (used by on-path attackers).
    using LinkTap = std::function<void(World&, Frame&)>;
    void set_link_tap(Address from, Address to, LinkTap tap);

    void schedule(SimTime at, std::function<void()> fn);
    void schedule_in(SimTime delay, std::function<void()> fn) { schedule(now() + delay, std::move(fn)); }

    SimTime now() const { return queue_.now(); }
    Rng& rng() { return rng_; }
    Trace& trace() { return trace_; }
    const Trace& trace() const { return trace_; }

    void attach_energy(Address a, const EnergyCosts& costs);
    EnergyBudget* energy(Address a);
    /// Charges a node's budget and records an "energy" trace event. Returns
    /// false if the node has no budget or is exhausted.
    bool drain(Address a, const EnergyEvent& e, bool attack);

    std::uint64_t next_frame_id() { return ++frame_ids_; }

    /// Starts nodes (once) and processes every event with timestamp <= t_end.
    void run_until(SimTime t_end);

    std::size_t events_processed() const { return processed_; }
    const std::map<std::pair<Address, Address>, Link>& links() const { return links_; }

    /// Convenience for trace details of a message.
    static JsonFields describe(const coap::SimMessage& m);

    /// Records a trace event when the trace is verbose.
    void note(std::string kind, Address node, const JsonFields& detail);

private:
    void insert(std::unique_ptr<Node> n);
    Link& ensure_internet_link(Address from, Address to);
    void deliver(Address to, Frame frame);

    WorldOptions opts_;
    EventQueue<std::function<void()>> queue_;
    Rng rng_;
    Trace trace_;
    std::map<Address, std::unique_ptr<Node>> nodes_;
    std::map<Address, Address> gateways_;
    std::set<Address> internet_;
    std::map<std::pair<Address, Address>, Link> links_;
    std::map<std::pair<Address, Address>, LinkTap> taps_;
    std::map<Address, EnergyBudget> energy_;
    std::uint64_t frame_ids_ = 0;
    std::size_t processed_ = 0;
    bool started_ = false;
};

} // namespace guardsim::netsim
