/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "guardsim/actors/server.hpp"

namespace guardsim::actors {

using coap::SimMessage;
using netsim::EnergyEvent;

ServerNode::ServerNode(Address a, ServerOptions opts, std::uint64_t seed)
    : Node(a, opts.name), opts_(std::move(opts)), rng_(seed), requester_(a, opts_.backoff, seed ^ 0x5e5e)
{
}

void ServerNode::start(netsim::World& w)
{
    if (opts_.guard)
        onboard(w);
    else
        register_at_rd(w);
}

void ServerNode::onboard(netsim::World& w)
{
    SimMessage m;
    m.dst = *opts_.guard;
    m.code = coap::codes::Post;
    m.uri_path = guard::paths::onboard;
    m.set_body(guard::encode(guard::OnboardRequest{opts_.name, address(), opts_.accept}));
    requester_.request(w, m, false, [this](netsim::World& w, const netsim::ExchangeOutcome& out) {
        std::optional<guard::GuardAnnouncement> a;
        if (out.response && out.response->code.is_success())
            a = guard::decode_guard_announcement(out.response->body);
        if (!a) {
            w.schedule_in(opts_.retry, [this, &w] { onboard(w); });
            return;
        }
        announcement_ = a;
        netsim::JsonFields d;
        d.add("guard", a->guard_key_id);
        guard::record_setup_step(w, 2, address(), d);
        register_at_rd(w);
    });
}

void ServerNode::register_at_rd(netsim::World& w)
{
    guard::RendezvousEntry e;
    e.name = opts_.name;
    e.address = address();
    if (announcement_) {
        e.proxy_address = announcement_->proxy_address;
        if (opts_.accept) {
            e.server_guard_key_id = announcement_->guard_key_id;
            e.as_hint = opts_.accept->as_address;
            e.audience = opts_.accept->audience;
        }
    }
    SimMessage m;
    m.dst = opts_.rd;
    m.code = coap::codes::Post;
    m.uri_path = guard::paths::rd;
    m.set_body(guard::encode(e));
    requester_.request(w, m, false, [this](netsim::World& w, const netsim::ExchangeOutcome& out) {
        if (!out.response || !out.response->code.is_success()) {
            w.schedule_in(opts_.retry, [this, &w] { register_at_rd(w); });
            return;
        }
        registered_ = true;
        if (announcement_)
            guard::record_setup_step(w, 3, address());
    });
}

bool ServerNode::charge(netsim::World& w, const EnergyEvent& e, bool attack)
{
    if (!w.energy(address()))
        return true;
    return w.drain(address(), e, attack);
}

void ServerNode::on_frame(netsim::World& w, netsim::Frame f)
{
    if (f.msg.dst != address())
        return;
    if (!charge(w, EnergyEvent::rx_bytes(coap::message_size(f.msg)), f.attack))
        return;
    charge(w, EnergyEvent::msg(), f.attack);

    if (f.msg.code.is_response()) {
        requester_.on_response(w, f);
        return;
    }
    if (f.msg.code.is_request())
        handle_request(w, f);
}

void ServerNode::handle_request(netsim::World& w, const netsim::Frame& f)
{
    const SimMessage& m = f.msg;
    if (w.now() - last_prune_ > SimTime::from_seconds(30)) {
        last_prune_ = w.now();
        std::erase_if(recent_, [&](const auto& e) { return w.now() - e.second.at > opts_.dedup_lifetime; });
    }
    if (auto it = recent_.find({m.src, m.mid}); it != recent_.end()) {
        w.send(address(), {it->second.response, f.attack});
        return;
    }

    SimMessage r;
    if (m.oscore)
        r = oscore(w, f);
    else if (m.uri_path && *m.uri_path == guard::paths::edhoc && m.code == coap::codes::Post)
        r = edhoc(w, f);
    else
        r = coap::make_response(m, coap::codes::NotFound);
    if (m.type == coap::MessageType::Con)
        recent_[{m.src, m.mid}] = {w.now(), r};
    w.send(address(), {r, f.attack});
}

SimMessage ServerNode::edhoc(netsim::World& w, const netsim::Frame& f)
{
    const SimMessage& m = f.msg;
    const auto& costs = w.energy(address()) ? w.energy(address())->costs() : netsim::EnergyCosts{};
    auto r = coap::make_response(m, coap::codes::Changed);

    if (m.body.size() == 9) {
        charge(w, EnergyEvent::edhoc(costs.edhoc_abort_fraction), f.attack);
        auto s = sec::EdhocSession::responder(rng_);
        std::uint32_t handle = next_handle_++;
        auto m2 = s.handle_message1(m.body, handle);
        if (!m2)
            return coap::make_response(m, coap::codes::BadRequest);
        if (half_open_.size() >= opts_.max_half_open)
            half_open_.erase(half_open_.begin());
        half_open_.emplace(handle, std::move(s));
        r.set_body(*m2);
        r.payload_len = std::max(r.body.size(), coap::payload_for_size(r, opts_.edhoc_sizes.message2));
        return r;
    }

    if (m.body.size() == 12) {
        auto it = half_open_.find(sec::EdhocSession::handle_of_message3(m.body));
        if (it == half_open_.end())
            return coap::make_response(m, coap::codes::BadRequest);
        charge(w, EnergyEvent::edhoc(1.0 - costs.edhoc_abort_fraction), f.attack);
        Bytes kid{next_kid_};
        next_kid_ = static_cast<std::uint8_t>((next_kid_ + 1) % std::max<std::size_t>(1, opts_.max_contexts));
        auto done = it->second.handle_message3(m.body, kid);
        if (!done) {
            half_open_.erase(it);
            return coap::make_response(m, coap::codes::BadRequest);
        }
        contexts_.insert_or_assign(kid, *it->second.derived_context());
        half_open_.erase(it);
        ++handshakes_;
        netsim::JsonFields d;
        d.add("kid", to_hex(kid));
        d.add("peer", m.src.str());
        d.add("attack", f.attack);
        w.trace().record(w.now(), "handshake", name(), d);
        r.set_body(*done);
        r.payload_len = std::max(r.body.size(), coap::payload_for_size(r, opts_.completion_size));
        return r;
    }
    return coap::make_response(m, coap::codes::BadRequest);
}

SimMessage ServerNode::oscore(netsim::World& w, const netsim::Frame& f)
{
    const SimMessage& m = f.msg;
    charge(w, EnergyEvent::oscore_verify(), f.attack);
    auto it = contexts_.find(m.oscore->kid);
    if (it == contexts_.end())
        return coap::make_response(m, coap::codes::Unauthorized);
    auto opened = sec::oscore_unprotect(it->second, m);
    if (!opened)
        return coap::make_response(m, coap::codes::Unauthorized);
    auto inner = coap::make_response(m, coap::codes::Content);
    inner.set_body(to_bytes("21.5C"), opts_.response_size);
    return sec::oscore_protect_response(it->second, inner, opened->binding);
}

} // namespace guardsim::actors
