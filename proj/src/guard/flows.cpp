/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "guardsim/guard/flows.hpp"

#include "guardsim/guard/seq_tracker.hpp"

namespace guardsim::guard {

FlowKey flow_key_of(const coap::SimMessage& msg)
{
    FlowKey k{msg.src, std::nullopt};
    if (msg.oscore)
        k.kid = msg.oscore->kid;
    return k;
}

FlowRecord* FlowTable::find(const FlowKey& key)
{
    auto it = flows_.find(key);
    return it == flows_.end() ? nullptr : &it->second;
}

const FlowRecord* FlowTable::find(const FlowKey& key) const
{
    auto it = flows_.find(key);
    return it == flows_.end() ? nullptr : &it->second;
}

FlowRecord& FlowTable::get_or_create(const FlowKey& key, SimTime now)
{
    auto [it, fresh] = flows_.try_emplace(key);
    FlowRecord& f = it->second;
    if (fresh) {
        f.source = key.source;
        f.kid = key.kid;
        f.last_update = now;
        if (auto since = reachable_since(key.source)) {
            f.cls = PriorityClass::ReachabilityVerified;
            f.reachable_since = since;
        }
    }
    return f;
}

void FlowTable::mark_reachable(Address source, SimTime since, SimTime now)
{
    auto [it, fresh] = reachable_.try_emplace(source, Reachability{since, now});
    if (!fresh)
        it->second.last_seen = std::max(it->second.last_seen, now);
}

std::optional<SimTime> FlowTable::reachable_since(Address source) const
{
    auto it = reachable_.find(source);
    if (it == reachable_.end())
        return std::nullopt;
    return it->second.since;
}

std::vector<FlowKey> FlowTable::expire_idle(SimTime now, SimTime idle)
{
    std::vector<FlowKey> dropped;
    for (auto it = flows_.begin(); it != flows_.end();) {
        if (now - it->second.last_update > idle) {
            if (it->second.cls == PriorityClass::AllowListed)
                dropped.push_back(it->first);
            it = flows_.erase(it);
        } else {
            ++it;
        }
    }
    for (auto it = reachable_.begin(); it != reachable_.end();) {
        if (now - it->second.last_seen > idle)
            it = reachable_.erase(it);
        else
            ++it;
    }
    return dropped;
}

PriorityClass classify(const FlowTable& flows, const coap::SimMessage& msg, GuardMode mode, Address proxy,
                       bool tunnel_authenticated)
{
    if (mode == GuardMode::FullGuard)
        return tunnel_authenticated ? PriorityClass::Tunnel : PriorityClass::Blocked;
    if (msg.dst != proxy)
        return PriorityClass::NonProxy;
    if (const FlowRecord* f = flows.find(flow_key_of(msg)))
        return f->cls;
    return flows.reachable_since(msg.src) ? PriorityClass::ReachabilityVerified : PriorityClass::UnknownViaProxy;
}

coap::SimMessage issue_echo_challenge(FlowRecord& flow, const coap::SimMessage& msg, SimTime now, Rng& rng)
{
    auto r = coap::make_response(msg, coap::codes::Unauthorized);
    r.echo = rng.bytes(8);
    r.set_body(to_bytes("echo"));
    flow.echo = EchoChallenge{*r.echo, now};
    flow.last_update = now;
    return r;
}

const char* to_string(EchoResult r)
{
    switch (r) {
    case EchoResult::Verified: return "Verified";
    case EchoResult::Stale: return "Stale";
    case EchoResult::Mismatch: return "Mismatch";
    }
    return "?";
}

EchoResult verify_echo(FlowRecord& flow, const coap::SimMessage& msg, SimTime now, SimTime max_age)
{
    if (!flow.echo || !msg.echo || *msg.echo != flow.echo->nonce)
        return EchoResult::Mismatch;
    SimTime issued = flow.echo->issued;
    if (now - issued > max_age) {
        flow.echo.reset();
        return EchoResult::Stale;
    }
    flow.echo.reset();
    if (rank(flow.cls) < rank(PriorityClass::ReachabilityVerified))
        flow.cls = PriorityClass::ReachabilityVerified;
    if (!flow.reachable_since)
        flow.reachable_since = issued;
    flow.last_update = now;
    return EchoResult::Verified;
}

bool observe_exchange(FlowTable& flows, SeqTracker& tracker, const RequestMeta& request,
                      const coap::SimMessage& response, SimTime now)
{
    if (request.token_post || !response.oscore || !request.kid)
        return false;
    FlowRecord& f = flows.get_or_create({request.source, request.kid}, now);
    bool promoted = f.cls != PriorityClass::AllowListed;
    f.cls = PriorityClass::AllowListed;
    f.tentative = true;
    f.last_update = now;
    tracker.record(*request.kid, request.piv, request.coap_token, request.source);
    return promoted;
}

} // namespace guardsim::guard
