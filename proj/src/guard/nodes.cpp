/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "guardsim/guard/nodes.hpp"

#include "guardsim/ace/ace_oscore.hpp"
#include "guardsim/ace/as_protocol.hpp"

namespace guardsim::guard {

using coap::SimMessage;
using netsim::Frame;
using netsim::JsonFields;
using netsim::World;

namespace {

const SimTime housekeeping_period = SimTime::from_seconds(10);

bool is_path(const SimMessage& m, const char* path) { return m.uri_path && *m.uri_path == path; }

JsonFields describe_drop(const SimMessage& m, const std::string& reason, bool attack)
{
    JsonFields d;
    d.add_raw("msg", World::describe(m).str());
    d.add("reason", reason);
    d.add("attack", attack);
    return d;
}

} // namespace

// ---------------------------------------------------------------------------
// Server-side guard

ServerGuardNode::ServerGuardNode(Address a, GuardPolicy policy, std::uint64_t seed, std::string key_id,
                                 coap::BackoffParams backoff)
    : Node(a, "SGP"), g_(a, policy, seed, std::move(key_id)), requester_(a, backoff, seed ^ 0x96a2, 4)
{
}

void ServerGuardNode::start(World& w)
{
    w.schedule_in(housekeeping_period, [this, &w] { housekeeping(w); });
}

std::size_t ServerGuardNode::queued() const
{
    std::size_t n = 0;
    for (const auto& [r, q] : downlink_)
        n += q.size();
    return n;
}

void ServerGuardNode::on_frame(World& w, Frame f)
{
    if (w.gateway_of(f.last_hop) == address())
        from_lan(w, std::move(f));
    else
        from_outside(w, std::move(f));
}

void ServerGuardNode::from_lan(World& w, Frame f)
{
    SimMessage& m = f.msg;
    if (m.dst != address()) {
        if (m.code.is_request())
            g_.outbound.insert({m.src, m.token});
        w.send(address(), std::move(f));
        return;
    }
    if (m.code.is_response()) {
        requester_.on_response(w, f);
        return;
    }
    if (!m.code.is_request())
        return;

    SimMessage reply = coap::make_response(m, coap::codes::NotFound);
    reply.src = address();
    if (m.code == coap::codes::Post && is_path(m, paths::onboard)) {
        if (auto req = decode_onboard_request(m.body)) {
            Origin o{req->server, std::nullopt};
            if (req->accept) {
                o.audience = req->accept->audience;
                ace::Verifier v{req->accept->audience, req->accept->as_key, g_.key_id};
                bool known = false;
                for (const auto& existing : g_.accepted_as)
                    known = known || (existing.audience == v.audience && existing.audience_key == v.audience_key);
                if (!known)
                    g_.accepted_as.push_back(v);
            }
            g_.origins[req->server_name] = o;
            JsonFields d;
            d.add("server", req->server_name);
            d.add("accept", req->accept.has_value());
            record_setup_step(w, 1, address(), d);
            reply.code = coap::codes::Changed;
            reply.set_body(encode(GuardAnnouncement{g_.key_id, address()}));
        } else {
            reply.code = coap::codes::BadRequest;
        }
    }
    w.send(address(), {reply, f.attack});
}

void ServerGuardNode::from_outside(World& w, Frame f)
{
    if (f.msg.dst != address() && w.gateway_of(f.msg.dst) != address())
        return;
    auto actions = guard_dispatch(g_, f.msg, w.now());
    for (auto& a : actions)
        act(w, f, a);
}

void ServerGuardNode::act(World& w, const Frame& in, GuardAction& action)
{
    if (auto* fwd = std::get_if<ForwardToServer>(&action)) {
        if (!fwd->proxied) {
            enqueue(w, fwd->cls, Frame{fwd->msg, in.attack});
            return;
        }
        const PriorityClass cls = fwd->cls;
        requester_.request(
            w, fwd->msg, in.attack,
            [this, fwd = *fwd](World& w, const netsim::ExchangeOutcome& out) {
                if (!out.response) {
                    guard_relay_timeout(g_, fwd);
                    return;
                }
                auto relay = guard_relay_response(g_, fwd, *out.response, w.now());
                if (relay.promoted) {
                    JsonFields d;
                    d.add("source", relay.promoted->source.value);
                    d.add("kid", to_hex(relay.promoted->kid.value_or(Bytes{})));
                    d.add("class", to_string(PriorityClass::AllowListed));
                    w.trace().record(w.now(), "flow_class", name(), d);
                }
                if (relay.reply)
                    w.send(address(), {*relay.reply, out.response_attack});
            },
            [this, cls](World& w, Frame f) { enqueue(w, cls, std::move(f)); });
        return;
    }
    if (auto* c = std::get_if<ForwardToClient>(&action)) {
        w.send(address(), {c->msg, in.attack});
        return;
    }
    if (auto* c = std::get_if<SendChallenge>(&action)) {
        w.note("challenge", address(), World::describe(c->msg));
        w.send(address(), {c->msg, in.attack});
        return;
    }
    if (auto* h = std::get_if<TunnelHandshake>(&action)) {
        JsonFields d;
        d.add("peer", in.msg.src.value);
        d.add(h->accepted ? "peer_key_id" : "reason", h->detail);
        d.add("attack", in.attack);
        w.trace().record(w.now(), h->accepted ? "tunnel_accept" : "tunnel_reject", name(), d);
        w.send(address(), {h->reply, in.attack});
        return;
    }
    if (auto* d = std::get_if<Drop>(&action)) {
        w.note("guard_drop", address(), describe_drop(in.msg, d->reason, in.attack));
        return;
    }
    w.note("guard_block", address(), describe_drop(in.msg, "blocked", in.attack));
}

void ServerGuardNode::enqueue(World& w, PriorityClass cls, Frame f)
{
    auto& q = downlink_[rank(cls)];
    if (q.size() >= g_.policy.downlink_queue_limit) {
        ++queue_drops_;
        w.note("guard_drop", address(), describe_drop(f.msg, "queue full", f.attack));
        return;
    }
    q.push_back(std::move(f));
    pump(w);
}

void ServerGuardNode::pump(World& w)
{
    while (true) {
        auto it = std::find_if(downlink_.begin(), downlink_.end(), [](const auto& e) { return !e.second.empty(); });
        if (it == downlink_.end())
            return;
        const Address next = it->second.front().msg.dst;
        const SimTime idle = w.link_idle_at(address(), next);
        if (idle > w.now()) {
            if (!pump_armed_) {
                pump_armed_ = true;
                w.schedule(idle, [this, &w] {
                    pump_armed_ = false;
                    pump(w);
                });
            }
            return;
        }
        Frame f = std::move(it->second.front());
        it->second.pop_front();
        w.send_via(address(), next, std::move(f));
    }
}

void ServerGuardNode::housekeeping(World& w)
{
    for (const auto& key : guard_housekeeping(g_, w.now())) {
        JsonFields d;
        d.add("source", key.source.value);
        d.add("kid", to_hex(key.kid.value_or(Bytes{})));
        w.trace().record(w.now(), "flow_expired", name(), d);
    }
    w.schedule_in(housekeeping_period, [this, &w] { housekeeping(w); });
}

// ---------------------------------------------------------------------------
// Client-side guard

ClientGuardNode::ClientGuardNode(Address a, ClientGuardOptions opts, std::uint64_t seed)
    : Node(a, "CGP"), opts_(std::move(opts)), rng_(seed), requester_(a, opts_.backoff, seed ^ 0xc6a2, 4)
{
}

void ClientGuardNode::start(World& w)
{
    w.schedule_in(housekeeping_period, [this, &w] {
        const SimTime now = w.now();
        std::erase_if(recent_, [&](const auto& e) { return now - e.second.at > opts_.cache_lifetime; });
        proxy_.expire(now, opts_.cache_lifetime);
        std::erase_if(inner_, [&](const auto& e) { return now - e.second.at > opts_.cache_lifetime; });
        start(w);
    });
}

void ClientGuardNode::on_frame(World& w, Frame f)
{
    if (w.gateway_of(f.last_hop) == address())
        from_lan(w, std::move(f));
    else
        from_outside(w, std::move(f));
}

void ClientGuardNode::reply_local(World& w, const SimMessage& req, coap::Code code, Bytes body)
{
    auto r = coap::make_response(req, code);
    r.src = address();
    if (!body.empty())
        r.set_body(std::move(body));
    w.send(address(), {r, false});
}

void ClientGuardNode::from_lan(World& w, Frame f)
{
    const SimMessage& m = f.msg;
    if (m.dst != address()) {
        if (m.code.is_request())
            outbound_.insert({m.dst, m.token});
        w.send(address(), std::move(f));
        return;
    }
    if (m.code.is_response()) {
        requester_.on_response(w, f);
        return;
    }
    if (!m.code.is_request())
        return;
    if (m.proxy_uri) {
        forward_request(w, f);
        return;
    }
    if (m.code == coap::codes::Get && is_path(m, paths::guard_info)) {
        reply_local(w, m, coap::codes::Content, encode(GuardAnnouncement{opts_.key_id, address()}));
        return;
    }
    if (m.code == coap::codes::Post && is_path(m, paths::metadata)) {
        auto md = decode_client_metadata(m.body);
        if (!md) {
            reply_local(w, m, coap::codes::BadRequest);
            return;
        }
        metadata_ = *md;
        reply_local(w, m, coap::codes::Changed);
        return;
    }
    reply_local(w, m, coap::codes::NotFound);
}

void ClientGuardNode::from_outside(World& w, Frame f)
{
    const SimMessage& m = f.msg;
    if (m.dst == address()) {
        if (m.code.is_response() && requester_.on_response(w, f))
            return;
        ++blocked_;
        w.note("guard_block", address(), describe_drop(m, "unsolicited", f.attack));
        return;
    }
    if (w.gateway_of(m.dst) != address())
        return;
    if (m.code.is_response()) {
        if (auto it = outbound_.find({m.src, m.token}); it != outbound_.end()) {
            outbound_.erase(it);
            w.send_via(address(), m.dst, std::move(f));
            return;
        }
    }
    ++blocked_;
    w.note("guard_block", address(), describe_drop(m, "unsolicited", f.attack));
}

void ClientGuardNode::forward_request(World& w, const Frame& f)
{
    const SimMessage& m = f.msg;
    if (auto it = recent_.find({m.src, m.mid}); it != recent_.end()) {
        if (it->second.reply)
            w.send(address(), {*it->second.reply, false});
        return;
    }
    if (!metadata_) {
        reply_local(w, m, coap::codes::BadGateway);
        return;
    }
    const auto& entry = metadata_->entry;
    coap::ProxyExchangeTable::Routes routes{{entry.name, entry.proxy_address.value_or(entry.address)}};
    auto rewritten = proxy_.rewrite(m, coap::ProxyMode::Forward, address(), routes, w.now());
    if (!rewritten) {
        reply_local(w, m, coap::codes::NotFound);
        return;
    }
    rewritten->uri_host = entry.name;
    if (!seen_request_) {
        seen_request_ = true;
        JsonFields d;
        d.add("client", static_cast<std::uint64_t>(m.src.value));
        record_setup_step(w, 6, address(), d);
    }
    const Bytes token = rewritten->token;
    inner_[token] = Inner{*rewritten, m.src, m.mid, w.now()};
    recent_[{m.src, m.mid}] = {w.now(), std::nullopt};
    if (tunnel_)
        send_inner(w, token, f.attack);
    else if (!establishing_)
        establish(w);
}

void ClientGuardNode::establish(World& w)
{
    if (!metadata_ || establishing_)
        return;
    establishing_ = true;
    const auto entry = metadata_->entry;
    const std::string audience = entry.audience.value_or(entry.name);

    ace::TokenRequest tr;
    tr.subject_key_id = opts_.key_id;
    tr.audience = audience;
    tr.guard_bindings = ace::GuardBindings{opts_.key_id, entry.server_guard_key_id.value_or("")};
    SimMessage m;
    m.dst = metadata_->as_address;
    m.code = coap::codes::Post;
    m.uri_path = paths::token;
    m.set_body(ace::encode_token_request(tr));
    requester_.request(w, m, false, [this, entry, audience](World& w, const netsim::ExchangeOutcome& out) {
        std::optional<ace::IssuedToken> issued;
        if (out.response && out.response->code == coap::codes::Created)
            issued = ace::decode_issued_token(out.response->body);
        if (!issued)
            return tunnel_failed(w, out.response ? "token denied" : "token timeout");
        JsonFields d7;
        d7.add("audience", audience);
        record_setup_step(w, 7, address(), d7);

        auto ex = std::make_shared<ace::AceClientExchange>(issued->token, issued->pop_key, Bytes{next_client_id_++},
                                                           rng_);
        if (next_client_id_ == 0)
            next_client_id_ = 1;
        SimMessage up;
        up.dst = entry.proxy_address.value_or(entry.address);
        up.code = coap::codes::Post;
        up.uri_path = paths::authz_info;
        up.set_body(ex->request_body());
        requester_.request(w, up, false, [this, ex](World& w, const netsim::ExchangeOutcome& out) {
            std::optional<sec::SecurityContext> ctx;
            if (out.response && out.response->code == coap::codes::Created)
                ctx = ex->finish(out.response->body);
            if (!ctx)
                return tunnel_failed(w, out.response ? "token rejected" : "upload timeout");
            record_setup_step(w, 8, address());
            tunnel_ = std::make_shared<sec::SecurityContext>(std::move(*ctx));
            establishing_ = false;
            failures_ = 0;
            JsonFields d;
            d.add("kid", to_hex(tunnel_->sender_id));
            w.trace().record(w.now(), "tunnel_established", name(), d);
            std::vector<Bytes> waiting;
            for (const auto& [token, in] : inner_)
                waiting.push_back(token);
            for (const auto& token : waiting)
                send_inner(w, token, false);
        });
    });
}

void ClientGuardNode::tunnel_failed(World& w, const std::string& why)
{
    establishing_ = false;
    JsonFields d;
    d.add("reason", why);
    w.trace().record(w.now(), "tunnel_failed", name(), d);
    w.schedule_in(opts_.retry, [this, &w] {
        if (!tunnel_ && !inner_.empty())
            establish(w);
    });
}

void ClientGuardNode::send_inner(World& w, const Bytes& token, bool attack)
{
    auto it = inner_.find(token);
    if (it == inner_.end() || !tunnel_)
        return;
    const Address peer = metadata_->entry.proxy_address.value_or(metadata_->entry.address);
    auto outer = wrap_tunnel_request(*tunnel_, it->second.msg, address(), peer);
    if (!outer) {
        tunnel_auth_failure(w, token, attack);
        return;
    }
    const auto binding = sec::binding_of(*outer);
    auto ctx = tunnel_;
    requester_.request(w, *outer, attack,
                       [this, token, binding, ctx](World& w, const netsim::ExchangeOutcome& out) {
                           auto it = inner_.find(token);
                           if (it == inner_.end())
                               return;
                           if (!out.response) {
                               // The client has given up by now as well.
                               proxy_.release(token);
                               recent_.erase({it->second.client, it->second.client_mid});
                               inner_.erase(it);
                               return;
                           }
                           std::optional<SimMessage> opened;
                           if (out.response->oscore) {
                               if (auto r = unwrap_tunnel_response(*ctx, *out.response, binding))
                                   opened = *r;
                           }
                           if (!opened) {
                               if (ctx == tunnel_)
                                   tunnel_auth_failure(w, token, out.response_attack);
                               return;
                           }
                           if (ctx == tunnel_)
                               failures_ = 0;
                           auto restored = proxy_.restore(*opened);
                           if (!restored)
                               return;
                           restored->src = address();
                           recent_[{it->second.client, it->second.client_mid}] = {w.now(), *restored};
                           inner_.erase(it);
                           w.send(address(), {*restored, out.response_attack});
                       });
}

void ClientGuardNode::tunnel_auth_failure(World& w, const Bytes& token, bool attack)
{
    ++failures_;
    JsonFields d;
    d.add("failures", static_cast<unsigned>(failures_));
    d.add("attack", attack);
    w.note("tunnel_auth_failure", address(), d);
    if (failures_ < opts_.renegotiate_after) {
        // The server guard answers a repeated inner request from its cache.
        send_inner(w, token, attack);
        return;
    }
    ++renegotiations_;
    JsonFields r;
    r.add("failures", static_cast<unsigned>(failures_));
    r.add("attack", attack);
    w.trace().record(w.now(), "tunnel_renegotiate", name(), r);
    failures_ = 0;
    tunnel_.reset();
    establish(w);
}

} // namespace guardsim::guard
