/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <map>
#include <optional>
#include <string>

#include "guardsim/guard/setup.hpp"
#include "guardsim/netsim/requester.hpp"
#include "guardsim/sec/edhoc.hpp"

namespace guardsim::actors {

struct ServerOptions {
    std::string name = "S";
    Address rd;
    /// Guard on the server's network to onboard with; none registers the
    /// bare address.
    std::optional<Address> guard;
    /// AS whose tokens the guard should accept on the server's behalf.
    std::optional<guard::AcceptedAs> accept;
    std::size_t max_half_open = 32;
    /// Contexts kept; recipient ids are handed out round-robin.
    std::size_t max_contexts = 64;
    SimTime dedup_lifetime = SimTime::from_seconds(247);
    sec::EdhocSizes edhoc_sizes;
    std::size_t completion_size = 24;
    std::size_t response_size = 16;  ///< payload of a data response
    coap::BackoffParams backoff;
    SimTime retry = SimTime::from_seconds(5);
};

/// Constrained CoAP server: EDHOC responder and OSCORE endpoint. Every
/// received frame costs energy, tagged with whether an attacker caused it.
class ServerNode : public netsim::Node {
public:
    ServerNode(Address a, ServerOptions opts, std::uint64_t seed);

    void start(netsim::World& w) override;
    void on_frame(netsim::World& w, netsim::Frame f) override;

    std::uint64_t handshakes() const { return handshakes_; }
    std::size_t half_open() const { return half_open_.size(); }
    bool registered() const { return registered_; }
    const std::optional<guard::GuardAnnouncement>& guard_info() const { return announcement_; }

private:
    void onboard(netsim::World& w);
    void register_at_rd(netsim::World& w);
    void handle_request(netsim::World& w, const netsim::Frame& f);
    coap::SimMessage edhoc(netsim::World& w, const netsim::Frame& f);
    coap::SimMessage oscore(netsim::World& w, const netsim::Frame& f);
    bool charge(netsim::World& w, const netsim::EnergyEvent& e, bool attack);

    ServerOptions opts_;
    Rng rng_;
    netsim::Requester requester_;
    std::optional<guard::GuardAnnouncement> announcement_;
    bool registered_ = false;

    std::map<std::uint32_t, sec::EdhocSession> half_open_;  ///< by handle, oldest first
    std::uint32_t next_handle_ = 1;
    std::map<Bytes, sec::SecurityContext> contexts_;
    std::uint8_t next_kid_ = 0;

    struct Cached {
        SimTime at;
        coap::SimMessage response;
    };
    std::map<std::pair<Address, std::uint16_t>, Cached> recent_;
    SimTime last_prune_;
    std::uint64_t handshakes_ = 0;
};

} // namespace guardsim::actors
