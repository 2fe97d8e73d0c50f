/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "guardsim/guard/dispatch.hpp"

#include "guardsim/ace/ace_oscore.hpp"
#include "guardsim/coap/codec.hpp"
#include "guardsim/guard/setup.hpp"

namespace guardsim::guard {

using coap::SimMessage;

GuardState::GuardState(Address self_, GuardPolicy policy_, std::uint64_t seed, std::string key_id_)
    : self(self_),
      policy(policy_),
      key_id(std::move(key_id_)),
      rng(seed),
      tracker(policy_.jump_threshold, policy_.seq_window),
      throttle(policy_)
{
}

coap::ProxyExchangeTable::Routes GuardState::routes() const
{
    coap::ProxyExchangeTable::Routes r;
    for (const auto& [name, o] : origins)
        r[name] = o.address;
    return r;
}

namespace {

bool is_fresh(const std::optional<EchoChallenge>& c, SimTime now, SimTime max_age)
{
    return c && now - c->issued <= max_age;
}

std::vector<GuardAction> one(GuardAction a)
{
    std::vector<GuardAction> out;
    out.push_back(std::move(a));
    return out;
}

std::vector<GuardAction> drop(GuardState& g, const std::string& reason)
{
    g.count("drop_" + reason);
    return one(Drop{reason});
}

bool is_path(const SimMessage& m, const char* path) { return m.uri_path && *m.uri_path == path; }

/// A request from outside that did not survive the throttle, or got a
/// challenge: remember what we answered so duplicates get the same reply.
std::vector<GuardAction> challenge(GuardState& g, FlowRecord& flow, const SimMessage& msg, SimTime now)
{
    auto reply = issue_echo_challenge(flow, msg, now, g.rng);
    reply.src = g.self;
    g.recent[{msg.src, msg.mid}] = {now, reply};
    g.count("challenge");
    return one(SendChallenge{reply});
}

std::vector<GuardAction> forward_proxied(GuardState& g, const SimMessage& msg, PriorityClass cls, SimTime now)
{
    auto rewritten = g.proxy.rewrite(msg, coap::ProxyMode::Reverse, g.self, g.routes(), now);
    if (!rewritten) {
        auto r = coap::make_response(msg, coap::codes::NotFound);
        return one(ForwardToClient{r});
    }
    ForwardToServer f;
    f.msg = *rewritten;
    f.cls = cls;
    f.proxied = true;
    RequestMeta meta;
    meta.source = msg.src;
    meta.coap_token = msg.token;
    meta.token_post = is_path(msg, paths::authz_info);
    if (msg.oscore) {
        meta.kid = msg.oscore->kid;
        meta.piv = msg.oscore->piv.value_or(0);
    }
    f.meta = meta;
    f.client = msg.src;
    f.client_mid = msg.mid;
    g.recent[{msg.src, msg.mid}] = {now, std::nullopt};
    g.count("forward_" + std::string(to_string(cls)));
    return one(std::move(f));
}

std::vector<GuardAction> admit_or_drop(GuardState& g, PriorityClass buckets, const SimMessage& msg, SimTime now)
{
    if (g.throttle.admit(buckets, msg.src, now) == Admission::Drop)
        return drop(g, "throttled");
    return {};
}

std::vector<GuardAction> dispatch_exemptions(GuardState& g, const SimMessage& msg, SimTime now)
{
    if (msg.dst != g.self) {
        if (auto d = admit_or_drop(g, PriorityClass::NonProxy, msg, now); !d.empty())
            return d;
        ForwardToServer f;
        f.msg = msg;
        f.cls = PriorityClass::NonProxy;
        g.count("forward_NonProxy");
        return one(std::move(f));
    }

    if (auto it = g.recent.find({msg.src, msg.mid}); it != g.recent.end()) {
        if (it->second.reply)
            return one(ForwardToClient{*it->second.reply});
        return drop(g, "duplicate");
    }

    const FlowKey key = flow_key_of(msg);
    FlowRecord* flow = g.flows.find(key);
    bool jump_verified = false;

    if (msg.echo) {
        if (flow && flow->echo) {
            auto r = verify_echo(*flow, msg, now, g.policy.echo_max_age);
            g.count(std::string("echo_") + to_string(r));
            if (r == EchoResult::Verified)
                g.flows.mark_reachable(msg.src, *flow->reachable_since, now);
        }
        auto side = g.jump_challenges.find(key);
        if (side != g.jump_challenges.end() && side->second.nonce == *msg.echo) {
            if (now - side->second.issued <= g.policy.echo_max_age) {
                jump_verified = true;
                g.flows.mark_reachable(msg.src, side->second.issued, now);
                g.count("echo_jump_verified");
            }
            g.jump_challenges.erase(side);
        }
    }

    PriorityClass cls = classify(g.flows, msg, g.policy.mode, g.self);

    if (msg.oscore && msg.oscore->piv) {
        auto verdict = g.tracker.check(msg.oscore->kid, *msg.oscore->piv, msg.token, msg.src);
        if (verdict == SeqVerdict::Conflict)
            return drop(g, "seq_conflict");
        if (verdict == SeqVerdict::ImplausibleJump && !jump_verified) {
            // Handled like an unknown flow, without touching the flow the
            // message claims to belong to.
            if (auto d = admit_or_drop(g, PriorityClass::UnknownViaProxy, msg, now); !d.empty())
                return d;
            auto side = g.jump_challenges.find(key);
            if (side != g.jump_challenges.end() && now - side->second.issued <= g.policy.echo_max_age)
                return drop(g, "challenge_pending");
            FlowRecord scratch;
            auto reply = issue_echo_challenge(scratch, msg, now, g.rng);
            reply.src = g.self;
            g.jump_challenges[key] = *scratch.echo;
            g.recent[{msg.src, msg.mid}] = {now, reply};
            g.count("challenge_jump");
            return one(SendChallenge{reply});
        }
        if (verdict == SeqVerdict::KnownMobile && rank(cls) < rank(PriorityClass::ReachabilityVerified)) {
            if (auto d = admit_or_drop(g, PriorityClass::ReachabilityVerified, msg, now); !d.empty())
                return d;
            FlowRecord& f = g.flows.get_or_create(key, now);
            if (is_fresh(f.echo, now, g.policy.echo_max_age))
                return drop(g, "challenge_pending");
            g.count("known_mobile");
            return challenge(g, f, msg, now);
        }
    }

    switch (cls) {
    case PriorityClass::AllowListed:
    case PriorityClass::Tunnel:
        flow->last_update = now;
        return forward_proxied(g, msg, cls, now);
    case PriorityClass::ReachabilityVerified: {
        if (auto d = admit_or_drop(g, cls, msg, now); !d.empty())
            return d;
        g.flows.get_or_create(key, now).last_update = now;
        g.flows.mark_reachable(msg.src, g.flows.reachable_since(msg.src).value_or(now), now);
        return forward_proxied(g, msg, cls, now);
    }
    case PriorityClass::UnknownViaProxy: {
        if (auto d = admit_or_drop(g, cls, msg, now); !d.empty())
            return d;
        FlowRecord& f = g.flows.get_or_create(key, now);
        if (is_fresh(f.echo, now, g.policy.echo_max_age))
            return drop(g, "challenge_pending");
        return challenge(g, f, msg, now);
    }
    default: return drop(g, "unclassified");
    }
}

std::vector<GuardAction> handshake(GuardState& g, const SimMessage& msg, SimTime now)
{
    auto reply = coap::make_response(msg, coap::codes::Unauthorized);
    reply.src = g.self;
    if (g.tunnels.size() >= 250) {
        g.count("tunnel_table_full");
        return one(TunnelHandshake{reply, false, "table full"});
    }
    Bytes server_id{g.next_tunnel_id};
    std::optional<ace::Rejected> first_error;
    for (const auto& verifier : g.accepted_as) {
        auto r = ace::ace_server_accept(msg.body, verifier, server_id, now, g.rng);
        if (!r) {
            // Report the failure of a verifier for the right audience over a
            // plain audience mismatch.
            if (!first_error || *first_error == ace::Rejected::WrongAudience)
                first_error = r.error();
            continue;
        }
        ++g.next_tunnel_id;
        if (g.next_tunnel_id == 0)
            g.next_tunnel_id = 1;
        TunnelSession s{std::move(r->context), {r->claims.audience}, r->claims.subject_key_id, msg.src};
        g.tunnels.insert_or_assign(server_id, std::move(s));
        reply.code = coap::codes::Created;
        reply.set_body(r->response_body);
        g.count("tunnel_accepted");
        return one(TunnelHandshake{reply, true, r->claims.subject_key_id});
    }
    std::string why = first_error ? ace::to_string(*first_error) : "no accepted AS";
    g.count("tunnel_rejected");
    return one(TunnelHandshake{reply, false, why});
}

std::vector<GuardAction> dispatch_tunnel(GuardState& g, const SimMessage& msg, SimTime now)
{
    if (auto it = g.recent.find({msg.src, msg.mid}); it != g.recent.end()) {
        if (it->second.reply)
            return one(ForwardToClient{*it->second.reply});
        return drop(g, "duplicate");
    }
    auto sit = g.tunnels.find(msg.oscore->kid);
    if (sit == g.tunnels.end()) {
        g.count("block");
        return one(Block{});
    }
    TunnelSession& session = sit->second;
    auto opened = sec::oscore_unprotect(session.context, msg);
    if (!opened) {
        g.count(std::string("tunnel_") + sec::to_string(opened.error()));
        if (opened.error() == sec::OscoreError::ReplayError)
            return one(Drop{"replay"});
        auto r = coap::make_response(msg, coap::codes::Unauthorized);
        r.src = g.self;
        return one(ForwardToClient{r});
    }
    auto decoded = coap::decode(opened->inner.body);
    if (!decoded) {
        g.count("tunnel_malformed");
        return one(Drop{"malformed"});
    }
    SimMessage inner = std::move(*decoded);

    TunnelReturn ret{msg.oscore->kid, opened->binding, msg.src, msg.token, msg.mid, msg.type};
    if (auto it = g.inner.find(inner.token); it != g.inner.end()) {
        it->second.ret = ret;
        if (it->second.response) {
            auto wrapped = wrap_tunnel_response(g, ret, *it->second.response);
            if (!wrapped)
                return one(Drop{"no session"});
            g.recent[{msg.src, msg.mid}] = {now, *wrapped};
            g.count("tunnel_resent");
            return one(ForwardToClient{*wrapped});
        }
        g.recent[{msg.src, msg.mid}] = {now, std::nullopt};
        return one(Drop{"awaiting response"});
    }

    auto origin = inner.uri_host ? g.origins.find(*inner.uri_host) : g.origins.end();
    if (origin == g.origins.end() || !origin->second.audience ||
        session.audiences.count(*origin->second.audience) == 0) {
        g.count("tunnel_wrong_audience");
        return one(Block{});
    }

    const Bytes inner_token = inner.token;
    inner.src = msg.src;
    inner.dst = g.self;
    auto rewritten = g.proxy.rewrite(inner, coap::ProxyMode::Reverse, g.self, g.routes(), now);
    if (!rewritten)
        return one(Block{});
    g.inner[inner_token] = {std::nullopt, ret, now};
    g.recent[{msg.src, msg.mid}] = {now, std::nullopt};

    ForwardToServer f;
    f.msg = *rewritten;
    f.cls = PriorityClass::Tunnel;
    f.proxied = true;
    f.client = msg.src;
    f.client_mid = msg.mid;
    f.tunnelled = true;
    f.inner_token = inner_token;
    g.count("forward_Tunnel");
    return one(std::move(f));
}

std::vector<GuardAction> dispatch_full(GuardState& g, const SimMessage& msg, SimTime now)
{
    if (msg.dst == g.self && msg.code == coap::codes::Post && !msg.oscore && is_path(msg, paths::authz_info))
        return handshake(g, msg, now);
    if (msg.dst == g.self && msg.oscore && msg.code.is_request())
        return dispatch_tunnel(g, msg, now);
    g.count("block");
    return one(Block{});
}

} // namespace

std::vector<GuardAction> guard_dispatch(GuardState& g, const SimMessage& msg, SimTime now)
{
    if (!msg.code.is_request()) {
        auto it = g.outbound.find({msg.dst, msg.token});
        if (it != g.outbound.end()) {
            g.outbound.erase(it);
            ForwardToServer f;
            f.msg = msg;
            f.cls = PriorityClass::AllowListed;
            return one(std::move(f));
        }
        if (g.policy.mode == GuardMode::FullGuard) {
            g.count("block");
            return one(Block{});
        }
        return drop(g, "unsolicited");
    }
    if (g.policy.mode == GuardMode::FullGuard)
        return dispatch_full(g, msg, now);
    return dispatch_exemptions(g, msg, now);
}

std::optional<SimMessage> wrap_tunnel_response(const GuardState& g, const TunnelReturn& ret,
                                               const SimMessage& inner_response)
{
    auto sit = g.tunnels.find(ret.session);
    if (sit == g.tunnels.end())
        return std::nullopt;
    SimMessage plain;
    plain.src = g.self;
    plain.dst = ret.peer;
    plain.token = ret.outer_token;
    if (ret.outer_type == coap::MessageType::Con) {
        plain.type = coap::MessageType::Ack;
        plain.mid = ret.outer_mid;
    } else {
        plain.type = coap::MessageType::Non;
    }
    plain.code = coap::codes::Changed;
    plain.set_body(coap::encode(inner_response));
    return sec::oscore_protect_response(sit->second.context, plain, ret.binding);
}

RelayResult guard_relay_response(GuardState& g, const ForwardToServer& fwd, const SimMessage& response, SimTime now)
{
    RelayResult out;
    auto restored = g.proxy.restore(response);
    if (!restored)
        return out;
    restored->src = g.self;
    if (fwd.tunnelled) {
        auto it = g.inner.find(fwd.inner_token);
        if (it == g.inner.end())
            return out;
        it->second.response = *restored;
        const TunnelReturn& ret = it->second.ret;
        out.reply = wrap_tunnel_response(g, ret, *restored);
        if (out.reply)
            g.recent[{ret.peer, ret.outer_mid}] = {now, *out.reply};
        return out;
    }
    if (fwd.meta && observe_exchange(g.flows, g.tracker, *fwd.meta, response, now))
        out.promoted = FlowKey{fwd.meta->source, fwd.meta->kid};
    g.recent[{fwd.client, fwd.client_mid}] = {now, *restored};
    out.reply = std::move(restored);
    return out;
}

void guard_relay_timeout(GuardState& g, const ForwardToServer& fwd)
{
    g.proxy.release(fwd.msg.token);
    if (fwd.tunnelled) {
        if (auto it = g.inner.find(fwd.inner_token); it != g.inner.end()) {
            g.recent.erase({it->second.ret.peer, it->second.ret.outer_mid});
            g.inner.erase(it);
        }
    } else {
        g.recent.erase({fwd.client, fwd.client_mid});
    }
    g.count("server_timeout");
}

std::vector<FlowKey> guard_housekeeping(GuardState& g, SimTime now)
{
    const SimTime keep = g.policy.response_cache_lifetime;
    std::erase_if(g.recent, [&](const auto& e) { return now - e.second.at > keep; });
    std::erase_if(g.inner, [&](const auto& e) { return now - e.second.at > keep; });
    std::erase_if(g.jump_challenges, [&](const auto& e) { return now - e.second.issued > g.policy.echo_max_age; });
    g.proxy.expire(now, keep);
    return g.flows.expire_idle(now, g.policy.allowlist_idle_expiry);
}

Expected<SimMessage, sec::OscoreError> wrap_tunnel_request(sec::SecurityContext& ctx, const SimMessage& inner,
                                                           Address self, Address peer)
{
    SimMessage plain;
    plain.src = self;
    plain.dst = peer;
    plain.type = coap::MessageType::Con;
    plain.code = coap::codes::Post;
    plain.uri_path = paths::tunnel;
    plain.set_body(coap::encode(inner));
    return sec::oscore_protect(ctx, plain);
}

Expected<SimMessage, sec::OscoreError> unwrap_tunnel_response(const sec::SecurityContext& ctx,
                                                              const SimMessage& outer,
                                                              const sec::RequestBinding& binding)
{
    auto opened = sec::oscore_unprotect_response(ctx, outer, binding);
    if (!opened)
        return unexpected(opened.error());
    auto decoded = coap::decode(opened->body);
    if (!decoded)
        return unexpected(sec::OscoreError::Malformed);
    return std::move(*decoded);
}

} // namespace guardsim::guard
