/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <compare>
#include <map>
#include <optional>
#include <vector>

#include "guardsim/coap/message.hpp"
#include "guardsim/core/rng.hpp"
#include "guardsim/guard/policy.hpp"

namespace guardsim::guard {

class SeqTracker;

struct FlowKey {
    Address source;
    std::optional<Bytes> kid;

    auto operator<=>(const FlowKey&) const = default;
};

FlowKey flow_key_of(const coap::SimMessage& msg);

struct EchoChallenge {
    Bytes nonce;
    SimTime issued;
};

struct FlowRecord {
    Address source;
    std::optional<Bytes> kid;
    PriorityClass cls = PriorityClass::UnknownViaProxy;
    std::optional<EchoChallenge> echo;
    std::optional<SimTime> reachable_since;
    bool tentative = false;
    SimTime last_update;
};

/// Guard state per (source, kid). Reachability is also remembered per source
/// address, so a verified client opening a new security context starts out
/// verified.
class FlowTable {
public:
    FlowRecord* find(const FlowKey& key);
    const FlowRecord* find(const FlowKey& key) const;
    FlowRecord& get_or_create(const FlowKey& key, SimTime now);

    void mark_reachable(Address source, SimTime since, SimTime now);
    std::optional<SimTime> reachable_since(Address source) const;

    /// Forgets allow-list entries and reachability idle for longer than
    /// `idle`. Returns the keys of allow-listed flows that were dropped.
    std::vector<FlowKey> expire_idle(SimTime now, SimTime idle);

    std::size_t size() const { return flows_.size(); }
    const std::map<FlowKey, FlowRecord>& flows() const { return flows_; }

private:
    struct Reachability {
        SimTime since;
        SimTime last_seen;
    };
    std::map<FlowKey, FlowRecord> flows_;
    std::map<Address, Reachability> reachable_;
};

/// Priority class of a message arriving from outside the constrained network.
PriorityClass classify(const FlowTable& flows, const coap::SimMessage& msg, GuardMode mode, Address proxy,
                       bool tunnel_authenticated = false);

/// 4.01 response carrying a fresh 8-byte Echo value; records the nonce.
coap::SimMessage issue_echo_challenge(FlowRecord& flow, const coap::SimMessage& msg, SimTime now, Rng& rng);

enum class EchoResult { Verified, Stale, Mismatch };
const char* to_string(EchoResult r);

/// Checks a request's Echo option against the flow's outstanding challenge.
EchoResult verify_echo(FlowRecord& flow, const coap::SimMessage& msg, SimTime now, SimTime max_age);

struct RequestMeta {
    Address source;
    std::optional<Bytes> kid;
    std::uint32_t piv = 0;
    Bytes coap_token;
    /// ACE token upload: success shows nothing about the sender.
    bool token_post = false;
};

/// Updates guard state from a response returned through the guard. Only an
/// OSCORE-protected response proves the request was authentic; it puts the
/// flow on the tentative allow-list and records (piv, token) in the tracker.
/// Returns true when the flow was promoted.
bool observe_exchange(FlowTable& flows, SeqTracker& tracker, const RequestMeta& request,
                      const coap::SimMessage& response, SimTime now);

} // namespace guardsim::guard
