/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "guardsim/actors/metrics.hpp"
#include "guardsim/guard/setup.hpp"
#include "guardsim/netsim/requester.hpp"
#include "guardsim/sec/edhoc.hpp"

namespace guardsim::actors {

/// How a client addresses the server after bootstrap.
struct SessionPlan {
    Address dst;
    std::optional<std::string> uri_host;    ///< reverse proxy: name of the origin
    std::optional<std::string> proxy_host;  ///< forward proxy: Proxy-Uri host
    std::string server_name;

    bool via_client_guard() const { return proxy_host.has_value(); }
    /// Sets destination and addressing options for a request to `path`.
    void apply(coap::SimMessage& m, const std::string& path) const;
};

/// Requests go through the client's own guard when it has one, else to the
/// published proxy address, else straight to the server.
SessionPlan plan_for(const guard::RendezvousEntry& entry, std::optional<Address> client_guard);

struct ClientOptions {
    std::string server_name = "S";
    std::string key_id = "client";
    Address rd;
    Address as;
    /// Gateway guard of the client network, if any.
    std::optional<Address> client_guard;
    SimTime start_at;
    std::uint32_t requests = 12;
    /// Pause between an answer (or give-up) and the next request.
    SimTime request_interval = SimTime::from_seconds(10);
    bool poisson = false;
    SimTime retry = SimTime::from_seconds(10);
    std::uint32_t rekey_after_failures = 3;
    std::uint32_t max_echo_rounds = 3;
    coap::BackoffParams backoff;
    sec::EdhocSizes edhoc_sizes;
    std::size_t request_payload = 12;
};

/// What an attacker who once held the client's role could know about it.
struct VictimView {
    Address address;
    Bytes kid;
    std::vector<std::uint32_t> completed_pivs;
};

/// Legitimate client session: bootstrap, EDHOC setup, then a fixed number of
/// OSCORE requests. Rekeys after consecutive authentication failures.
class ClientNode : public netsim::Node {
public:
    ClientNode(Address a, std::string name, ClientOptions opts, Metrics& metrics, std::uint64_t seed);

    void start(netsim::World& w) override;
    void on_frame(netsim::World& w, netsim::Frame f) override;

    const std::optional<SessionPlan>& plan() const { return plan_; }
    std::optional<VictimView> victim() const;
    bool finished() const { return finished_; }
    bool active() const { return ctx_.has_value() && !finished_; }

private:
    struct Attempt {
        Phase phase;
        SimTime started;
        bool attack = false;
        std::uint32_t retransmissions = 0;
        std::uint32_t echo_rounds = 0;
        Bytes token{};
    };
    using Done = std::function<void(netsim::World&, const std::optional<coap::SimMessage>&, bool,
                                    const Attempt&)>;

    void exchange(netsim::World& w, coap::SimMessage msg, std::shared_ptr<Attempt> a, Done done);
    void record(netsim::World& w, const Attempt& a, InteractionResult r);

    void bootstrap(netsim::World& w);
    void ask_guard(netsim::World& w, guard::RendezvousEntry entry);
    void request_token(netsim::World& w, guard::RendezvousEntry entry, guard::GuardAnnouncement g);
    void share_metadata(netsim::World& w, guard::RendezvousEntry entry);
    void run_setup(netsim::World& w);
    void setup_failed(netsim::World& w, const Attempt& a, InteractionResult r);
    void send_request(netsim::World& w);
    void schedule_next(netsim::World& w);
    void rekey(netsim::World& w);

    ClientOptions opts_;
    Metrics& metrics_;
    Rng rng_;
    netsim::Requester requester_;
    std::optional<SessionPlan> plan_;
    std::optional<sec::EdhocSession> edhoc_;
    std::optional<sec::SecurityContext> ctx_;
    std::uint32_t sent_ = 0;
    std::uint32_t failures_ = 0;
    bool failure_attack_ = false;
    bool setup_attack_ = false;
    bool finished_ = false;
    std::vector<std::uint32_t> completed_pivs_;
};

} // namespace guardsim::actors
