/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "guardsim/ace/token.hpp"
#include "guardsim/coap/proxy.hpp"
#include "guardsim/guard/flows.hpp"
#include "guardsim/guard/policy.hpp"
#include "guardsim/guard/seq_tracker.hpp"
#include "guardsim/guard/throttle.hpp"
#include "guardsim/sec/oscore.hpp"

namespace guardsim::guard {

/// Where the server's answer to a tunnelled request has to go.
struct TunnelReturn {
    Bytes session;  ///< tunnel kid at this guard
    sec::RequestBinding binding;
    Address peer;
    Bytes outer_token;
    std::uint16_t outer_mid = 0;
    coap::MessageType outer_type = coap::MessageType::Con;
};

/// Request for the constrained network. `meta` is set for proxied exchanges,
/// whose response comes back to the guard; NonProxy traffic passes as is.
struct ForwardToServer {
    coap::SimMessage msg;
    PriorityClass cls = PriorityClass::NonProxy;
    /// Proxied exchange: the guard relays the response itself.
    bool proxied = false;
    std::optional<RequestMeta> meta;
    Address client;
    std::uint16_t client_mid = 0;
    bool tunnelled = false;
    Bytes inner_token;  ///< tunnel exchanges: the client guard's token
};
struct ForwardToClient {
    coap::SimMessage msg;
};
struct SendChallenge {
    coap::SimMessage msg;
};
struct Drop {
    std::string reason;
};
struct Block {};
struct TunnelHandshake {
    coap::SimMessage reply;
    bool accepted = false;
    std::string detail;  ///< rejection reason or peer key id
};

using GuardAction = std::variant<ForwardToServer, ForwardToClient, SendChallenge, Drop, Block, TunnelHandshake>;

struct TunnelSession {
    sec::SecurityContext context;
    std::set<std::string> audiences;
    std::string peer_key_id;
    Address peer;
};

/// A server registered behind the guard.
struct Origin {
    Address address;
    std::optional<std::string> audience;
};

/// Everything the server-side guard decides with.
struct GuardState {
    GuardState(Address self, GuardPolicy policy, std::uint64_t seed, std::string key_id = "sgp");

    Address self;
    GuardPolicy policy;
    std::string key_id;
    Rng rng;

    FlowTable flows;
    SeqTracker tracker;
    ThrottlePolicy throttle;
    coap::ProxyExchangeTable proxy;
    std::map<std::string, Origin> origins;

    /// Echo challenges for implausible sequence jumps, kept apart from the
    /// flow they claim to belong to.
    std::map<FlowKey, EchoChallenge> jump_challenges;

    /// Duplicate detection on (source, mid): empty reply while pending.
    struct Recent {
        SimTime at;
        std::optional<coap::SimMessage> reply;
    };
    std::map<std::pair<Address, std::uint16_t>, Recent> recent;

    /// Requests the constrained network sent out; their responses may enter.
    std::set<std::pair<Address, Bytes>> outbound;

    std::vector<ace::Verifier> accepted_as;
    std::map<Bytes, TunnelSession> tunnels;
    std::uint8_t next_tunnel_id = 1;

    /// Tunnel requests by the client guard's inner token.
    struct InnerExchange {
        std::optional<coap::SimMessage> response;  ///< restored inner response
        TunnelReturn ret;
        SimTime at;
    };
    std::map<Bytes, InnerExchange> inner;

    std::map<std::string, std::uint64_t> counters;
    void count(const std::string& what) { ++counters[what]; }

    /// Routes for reverse-proxy rewriting.
    coap::ProxyExchangeTable::Routes routes() const;
};

/// Decides what happens to a frame arriving from outside the constrained
/// network: classify, check sequence plausibility, throttle, challenge or
/// forward. In full-guard mode only authenticated tunnel traffic passes.
std::vector<GuardAction> guard_dispatch(GuardState& g, const coap::SimMessage& msg, SimTime now);

/// Wraps a restored inner response for the tunnel peer; nullopt when the
/// tunnel session is gone.
std::optional<coap::SimMessage> wrap_tunnel_response(const GuardState& g, const TunnelReturn& ret,
                                                     const coap::SimMessage& inner_response);

struct RelayResult {
    std::optional<coap::SimMessage> reply;  ///< what goes back out
    std::optional<FlowKey> promoted;        ///< flow that joined the allow-list
};

/// The server answered a proxied exchange: update flow state, restore the
/// client's token and cache the reply for duplicates.
RelayResult guard_relay_response(GuardState& g, const ForwardToServer& fwd, const coap::SimMessage& response,
                                 SimTime now);

/// The server never answered a proxied exchange.
void guard_relay_timeout(GuardState& g, const ForwardToServer& fwd);

/// Periodic expiry of idle flows, stale challenges and cached replies.
/// Returns allow-listed flows that were dropped.
std::vector<FlowKey> guard_housekeeping(GuardState& g, SimTime now);

/// Wraps a request into a tunnel request: the whole inner message travels
/// sealed as the body of a POST to the tunnel resource.
Expected<coap::SimMessage, sec::OscoreError> wrap_tunnel_request(sec::SecurityContext& ctx,
                                                                 const coap::SimMessage& inner, Address self,
                                                                 Address peer);

/// Counterpart on the client guard: opens a tunnel response.
Expected<coap::SimMessage, sec::OscoreError> unwrap_tunnel_response(const sec::SecurityContext& ctx,
                                                                    const coap::SimMessage& outer,
                                                                    const sec::RequestBinding& binding);

} // namespace guardsim::guard
