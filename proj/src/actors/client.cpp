/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "guardsim/actors/client.hpp"

#include "guardsim/ace/as_protocol.hpp"

namespace guardsim::actors {

using coap::SimMessage;
using netsim::World;

void SessionPlan::apply(SimMessage& m, const std::string& path) const
{
    m.dst = dst;
    if (proxy_host) {
        m.proxy_uri = "coap://" + *proxy_host + path;
        return;
    }
    if (uri_host)
        m.uri_host = uri_host;
    m.uri_path = path;
}

SessionPlan plan_for(const guard::RendezvousEntry& entry, std::optional<Address> client_guard)
{
    SessionPlan p;
    p.server_name = entry.name;
    if (client_guard) {
        p.dst = *client_guard;
        p.proxy_host = entry.name;
    } else if (entry.proxy_address) {
        p.dst = *entry.proxy_address;
        p.uri_host = entry.name;
    } else {
        p.dst = entry.address;
    }
    return p;
}

ClientNode::ClientNode(Address a, std::string name, ClientOptions opts, Metrics& metrics, std::uint64_t seed)
    : Node(a, std::move(name)),
      opts_(std::move(opts)),
      metrics_(metrics),
      rng_(seed),
      requester_(a, opts_.backoff, seed ^ 0xc11e)
{
}

void ClientNode::start(World& w)
{
    w.schedule(std::max(opts_.start_at, w.now()), [this, &w] { bootstrap(w); });
}

void ClientNode::on_frame(World& w, netsim::Frame f)
{
    if (f.msg.dst == address())
        requester_.on_response(w, f);
}

std::optional<VictimView> ClientNode::victim() const
{
    if (!ctx_)
        return std::nullopt;
    return VictimView{address(), ctx_->sender_id, completed_pivs_};
}

void ClientNode::exchange(World& w, SimMessage msg, std::shared_ptr<Attempt> a, Done done)
{
    msg.token = a->token;
    a->token = requester_.request(w, msg, a->attack, [this, msg, a, done](World& w, const netsim::ExchangeOutcome& out) {
        a->retransmissions += out.retransmissions;
        const auto& r = out.response;
        if (r && r->code == coap::codes::Unauthorized && r->echo && a->echo_rounds < opts_.max_echo_rounds) {
            // Reachability challenge: repeat the request with the echo value.
            ++a->echo_rounds;
            ++a->retransmissions;
            auto again = msg;
            again.echo = r->echo;
            exchange(w, again, a, done);
            return;
        }
        done(w, r, out.response_attack, *a);
    });
}

void ClientNode::record(World& w, const Attempt& a, InteractionResult r)
{
    Interaction i;
    i.phase = a.phase;
    i.client = address();
    i.started = a.started;
    i.finished = w.now();
    i.result = r;
    i.retransmissions = a.retransmissions;
    metrics_.record(i);
}

void ClientNode::bootstrap(World& w)
{
    SimMessage m;
    m.dst = opts_.rd;
    m.code = coap::codes::Get;
    m.uri_path = guard::paths::rd;
    m.set_body(to_bytes(opts_.server_name));
    requester_.request(w, m, false, [this](World& w, const netsim::ExchangeOutcome& out) {
        std::optional<guard::RendezvousEntry> entry;
        if (out.response && out.response->code == coap::codes::Content)
            entry = guard::decode_rendezvous_entry(out.response->body);
        if (!entry) {
            w.schedule_in(opts_.retry, [this, &w] { bootstrap(w); });
            return;
        }
        if (opts_.client_guard) {
            ask_guard(w, *entry);
            return;
        }
        plan_ = plan_for(*entry, std::nullopt);
        run_setup(w);
    });
}

void ClientNode::ask_guard(World& w, guard::RendezvousEntry entry)
{
    SimMessage m;
    m.dst = *opts_.client_guard;
    m.code = coap::codes::Get;
    m.uri_path = guard::paths::guard_info;
    requester_.request(w, m, false, [this, entry](World& w, const netsim::ExchangeOutcome& out) {
        std::optional<guard::GuardAnnouncement> a;
        if (out.response && out.response->code.is_success())
            a = guard::decode_guard_announcement(out.response->body);
        if (!a) {
            w.schedule_in(opts_.retry, [this, &w, entry] { ask_guard(w, entry); });
            return;
        }
        netsim::JsonFields d;
        d.add("guard", a->guard_key_id);
        guard::record_setup_step(w, 2, address(), d);
        request_token(w, entry, *a);
    });
}

void ClientNode::request_token(World& w, guard::RendezvousEntry entry, guard::GuardAnnouncement g)
{
    ace::TokenRequest tr;
    tr.subject_key_id = opts_.key_id;
    tr.audience = entry.audience.value_or(entry.name);
    tr.guard_bindings = ace::GuardBindings{g.guard_key_id, entry.server_guard_key_id.value_or("")};
    SimMessage m;
    m.dst = entry.as_hint.value_or(opts_.as);
    m.code = coap::codes::Post;
    m.uri_path = guard::paths::token;
    m.set_body(ace::encode_token_request(tr));
    requester_.request(w, m, false, [this, entry, g](World& w, const netsim::ExchangeOutcome& out) {
        if (!out.response || out.response->code != coap::codes::Created) {
            w.schedule_in(opts_.retry, [this, &w, entry, g] { request_token(w, entry, g); });
            return;
        }
        netsim::JsonFields d;
        d.add("audience", entry.audience.value_or(entry.name));
        guard::record_setup_step(w, 4, address(), d);
        share_metadata(w, entry);
    });
}

void ClientNode::share_metadata(World& w, guard::RendezvousEntry entry)
{
    SimMessage m;
    m.dst = *opts_.client_guard;
    m.code = coap::codes::Post;
    m.uri_path = guard::paths::metadata;
    m.set_body(guard::encode(guard::ClientMetadata{entry, entry.as_hint.value_or(opts_.as)}));
    requester_.request(w, m, false, [this, entry](World& w, const netsim::ExchangeOutcome& out) {
        if (!out.response || !out.response->code.is_success()) {
            w.schedule_in(opts_.retry, [this, &w, entry] { share_metadata(w, entry); });
            return;
        }
        guard::record_setup_step(w, 5, address());
        plan_ = plan_for(entry, opts_.client_guard);
        run_setup(w);
    });
}

void ClientNode::run_setup(World& w)
{
    edhoc_ = sec::EdhocSession::initiator(rng_);
    auto m1 = edhoc_->message1();
    SimMessage m;
    m.code = coap::codes::Post;
    plan_->apply(m, guard::paths::edhoc);
    m.set_body(*m1);
    m.payload_len = std::max(m.body.size(), coap::payload_for_size(m, opts_.edhoc_sizes.message1));

    auto a = std::make_shared<Attempt>(Attempt{Phase::Setup, w.now(), setup_attack_});
    exchange(w, m, a, [this](World& w, const std::optional<SimMessage>& r, bool, const Attempt& a) {
        if (!r || r->code != coap::codes::Changed)
            return setup_failed(w, a, r ? InteractionResult::Failed : InteractionResult::TimedOut);
        auto m3 = edhoc_->handle_message2(r->body);
        if (!m3)
            return setup_failed(w, a, InteractionResult::Failed);
        record(w, a, InteractionResult::Completed);

        SimMessage m;
        m.code = coap::codes::Post;
        plan_->apply(m, guard::paths::edhoc);
        m.set_body(*m3);
        m.payload_len = std::max(m.body.size(), coap::payload_for_size(m, opts_.edhoc_sizes.message3));
        auto b = std::make_shared<Attempt>(Attempt{Phase::Setup, w.now(), setup_attack_});
        exchange(w, m, b, [this](World& w, const std::optional<SimMessage>& r, bool, const Attempt& b) {
            if (!r || r->code != coap::codes::Changed)
                return setup_failed(w, b, r ? InteractionResult::Failed : InteractionResult::TimedOut);
            if (!edhoc_->handle_completion(r->body))
                return setup_failed(w, b, InteractionResult::Failed);
            record(w, b, InteractionResult::Completed);
            ctx_ = *edhoc_->derived_context();
            edhoc_.reset();
            failures_ = 0;
            setup_attack_ = false;
            netsim::JsonFields d;
            d.add("kid", to_hex(ctx_->sender_id));
            w.trace().record(w.now(), "context", name(), d);
            send_request(w);
        });
    });
}

void ClientNode::setup_failed(World& w, const Attempt& a, InteractionResult r)
{
    record(w, a, r);
    edhoc_.reset();
    w.schedule_in(opts_.retry, [this, &w] { run_setup(w); });
}

void ClientNode::send_request(World& w)
{
    if (sent_ >= opts_.requests) {
        finished_ = true;
        return;
    }
    ++sent_;
    SimMessage inner;
    inner.code = coap::codes::Post;
    plan_->apply(inner, guard::paths::sensor);
    inner.set_body(rng_.bytes(4), opts_.request_payload);
    auto prot = sec::oscore_protect(*ctx_, inner);
    if (!prot) {
        rekey(w);
        return;
    }
    auto binding = sec::binding_of(*prot);
    auto a = std::make_shared<Attempt>(Attempt{Phase::Steady, w.now(), false});
    exchange(w, *prot, a, [this, binding](World& w, const std::optional<SimMessage>& r, bool attack, const Attempt& a) {
        InteractionResult res = InteractionResult::Failed;
        if (!r) {
            res = InteractionResult::TimedOut;
        } else if (r->oscore) {
            auto opened = sec::oscore_unprotect_response(*ctx_, *r, binding);
            if (opened && opened->code.is_success())
                res = InteractionResult::Completed;
        }
        record(w, a, res);
        if (res == InteractionResult::Completed) {
            failures_ = 0;
            failure_attack_ = false;
            completed_pivs_.push_back(binding.piv);
        } else if (res == InteractionResult::Failed) {
            ++failures_;
            failure_attack_ = failure_attack_ || attack;
        }
        if (failures_ >= opts_.rekey_after_failures) {
            rekey(w);
            return;
        }
        schedule_next(w);
    });
}

void ClientNode::schedule_next(World& w)
{
    SimTime gap = opts_.request_interval;
    if (opts_.poisson)
        gap = SimTime::from_seconds(rng_.exponential(1.0 / opts_.request_interval.seconds()));
    w.schedule_in(gap, [this, &w] { send_request(w); });
}

void ClientNode::rekey(World& w)
{
    ++metrics_.rekeys;
    netsim::JsonFields d;
    d.add("failures", static_cast<unsigned>(failures_));
    d.add("attack", failure_attack_);
    w.trace().record(w.now(), "rekey", name(), d);
    setup_attack_ = failure_attack_;
    failure_attack_ = false;
    failures_ = 0;
    ctx_.reset();
    run_setup(w);
}

} // namespace guardsim::actors
