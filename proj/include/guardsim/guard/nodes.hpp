/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <set>

#include "guardsim/guard/dispatch.hpp"
#include "guardsim/guard/setup.hpp"
#include "guardsim/netsim/requester.hpp"

namespace guardsim::guard {

/// Guard proxy at the entry of the server's network. It is also the
/// network's only gateway, so everything from outside passes guard_dispatch.
/// Frames for the constrained link wait in a strict-priority queue and are
/// released one at a time when the link is idle.
class ServerGuardNode : public netsim::Node {
public:
    ServerGuardNode(Address a, GuardPolicy policy, std::uint64_t seed, std::string key_id = "sgp",
                    coap::BackoffParams backoff = {});

    void start(netsim::World& w) override;
    void on_frame(netsim::World& w, netsim::Frame f) override;

    GuardState& state() { return g_; }
    const GuardState& state() const { return g_; }
    std::size_t queued() const;
    std::uint64_t queue_drops() const { return queue_drops_; }

private:
    void from_lan(netsim::World& w, netsim::Frame f);
    void from_outside(netsim::World& w, netsim::Frame f);
    void act(netsim::World& w, const netsim::Frame& in, GuardAction& a);
    void enqueue(netsim::World& w, PriorityClass cls, netsim::Frame f);
    void pump(netsim::World& w);
    void housekeeping(netsim::World& w);

    GuardState g_;
    netsim::Requester requester_;
    std::map<int, std::deque<netsim::Frame>, std::greater<int>> downlink_;
    bool pump_armed_ = false;
    std::uint64_t queue_drops_ = 0;
};

struct ClientGuardOptions {
    std::string key_id = "cgp";
    coap::BackoffParams backoff;
    /// Consecutive tunnel authentication failures before a new tunnel.
    std::uint32_t renegotiate_after = 3;
    SimTime retry = SimTime::from_seconds(10);
    SimTime cache_lifetime = SimTime::from_seconds(120);
};

/// Guard at the client network's gateway. Forward proxy for its clients;
/// carries their requests to the server-side guard through an ACE-keyed
/// OSCORE tunnel and admits nothing unsolicited from outside.
class ClientGuardNode : public netsim::Node {
public:
    ClientGuardNode(Address a, ClientGuardOptions opts, std::uint64_t seed);

    void start(netsim::World& w) override;
    void on_frame(netsim::World& w, netsim::Frame f) override;

    bool tunnel_up() const { return tunnel_ != nullptr; }
    std::uint64_t renegotiations() const { return renegotiations_; }
    std::uint64_t blocked() const { return blocked_; }

private:
    void from_lan(netsim::World& w, netsim::Frame f);
    void from_outside(netsim::World& w, netsim::Frame f);
    void forward_request(netsim::World& w, const netsim::Frame& f);
    void establish(netsim::World& w);
    void tunnel_failed(netsim::World& w, const std::string& why);
    void send_inner(netsim::World& w, const Bytes& token, bool attack);
    void tunnel_auth_failure(netsim::World& w, const Bytes& token, bool attack);
    void reply_local(netsim::World& w, const coap::SimMessage& req, coap::Code code, Bytes body = {});

    ClientGuardOptions opts_;
    Rng rng_;
    netsim::Requester requester_;
    std::optional<ClientMetadata> metadata_;
    coap::ProxyExchangeTable proxy_;

    struct Recent {
        SimTime at;
        std::optional<coap::SimMessage> reply;
    };
    std::map<std::pair<Address, std::uint16_t>, Recent> recent_;

    struct Inner {
        coap::SimMessage msg;
        Address client;
        std::uint16_t client_mid = 0;
        SimTime at;
    };
    std::map<Bytes, Inner> inner_;  ///< by proxy token

    std::shared_ptr<sec::SecurityContext> tunnel_;
    bool establishing_ = false;
    bool seen_request_ = false;
    std::uint32_t failures_ = 0;
    std::uint64_t renegotiations_ = 0;
    std::uint64_t blocked_ = 0;
    std::uint8_t next_client_id_ = 1;
    std::set<std::pair<Address, Bytes>> outbound_;
};

} // namespace guardsim::guard
