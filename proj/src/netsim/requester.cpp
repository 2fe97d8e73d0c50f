/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "guardsim/netsim/requester.hpp"

namespace guardsim::netsim {

Requester::Requester(Address self, coap::BackoffParams backoff, std::uint64_t seed, std::size_t token_len)
    : self_(self), backoff_(backoff), token_len_(token_len)
{
    Rng rng(seed);
    mid_ = static_cast<std::uint16_t>(rng.next_u64());
    token_counter_ = rng.next_u64();
}

Bytes Requester::next_token()
{
    Bytes t;
    append_be(t, token_counter_++, static_cast<int>(token_len_));
    return t;
}

const coap::SimMessage* Requester::message(const Bytes& token) const
{
    auto it = pending_.find(token);
    return it == pending_.end() ? nullptr : &it->second.msg;
}

void Requester::transmit(World& w, Exchange& ex)
{
    Frame f{ex.msg, ex.attack, 0};
    if (ex.send)
        ex.send(w, std::move(f));
    else
        w.send(self_, std::move(f));
}

void Requester::arm(World& w, const Bytes& token, Exchange& ex)
{
    ex.generation = ++generation_;
    w.schedule(ex.tx.next_timeout, [this, &w, token, gen = ex.generation] { on_timer(w, token, gen); });
}

Bytes Requester::request(World& w, coap::SimMessage msg, bool attack, Callback done, Sender send)
{
    msg.src = self_;
    msg.type = coap::MessageType::Con;
    msg.mid = next_mid();
    if (msg.token.empty())
        msg.token = next_token();
    Bytes token = msg.token;

    Exchange ex;
    ex.msg = std::move(msg);
    ex.attack = attack;
    ex.done = std::move(done);
    ex.send = std::move(send);
    ex.started = w.now();
    ex.tx = coap::tx_step(coap::TxState::with(backoff_), w.now(), coap::TxEvent::Sent, &w.rng(),
                          backoff_.random_factor)
                .first;
    auto& slot = pending_[token] = std::move(ex);
    transmit(w, slot);
    arm(w, token, slot);
    return token;
}

bool Requester::resend(World& w, const Bytes& token, coap::SimMessage replacement)
{
    auto it = pending_.find(token);
    if (it == pending_.end())
        return false;
    Exchange& ex = it->second;
    replacement.src = self_;
    replacement.type = coap::MessageType::Con;
    replacement.mid = next_mid();
    replacement.token = token;
    ex.msg = std::move(replacement);
    ex.retransmissions++;
    ex.tx = coap::tx_step(coap::TxState::with(backoff_), w.now(), coap::TxEvent::Sent, &w.rng(),
                          backoff_.random_factor)
                .first;
    transmit(w, ex);
    arm(w, token, ex);
    return true;
}

void Requester::on_timer(World& w, const Bytes& token, std::uint64_t generation)
{
    auto it = pending_.find(token);
    if (it == pending_.end() || it->second.generation != generation)
        return;
    Exchange& ex = it->second;
    auto [tx, action] = coap::tx_step(ex.tx, w.now(), coap::TxEvent::TimerFired);
    ex.tx = tx;
    if (action == coap::TxAction::Retransmit) {
        ex.retransmissions++;
        if (w.trace().verbose()) {
            JsonFields d;
            d.add_raw("msg", World::describe(ex.msg).str());
            d.add("attempt", static_cast<unsigned>(tx.attempts));
            w.trace().record(w.now(), "retransmit", w.name_of(self_), d);
        }
        transmit(w, ex);
        arm(w, token, ex);
        return;
    }
    ExchangeOutcome out;
    out.retransmissions = ex.retransmissions;
    out.started = ex.started;
    out.finished = w.now();
    Callback done = std::move(ex.done);
    if (w.trace().verbose()) {
        JsonFields d;
        d.add_raw("msg", World::describe(ex.msg).str());
        w.trace().record(w.now(), "giveup", w.name_of(self_), d);
    }
    pending_.erase(it);
    if (done)
        done(w, out);
}

bool Requester::on_response(World& w, const Frame& frame)
{
    const auto& m = frame.msg;
    if (!m.code.is_response() || m.dst != self_)
        return false;
    auto it = pending_.find(m.token);
    if (it == pending_.end())
        return false;
    Exchange& ex = it->second;
    ExchangeOutcome out;
    out.response = m;
    out.response_attack = frame.attack;
    out.retransmissions = ex.retransmissions;
    out.started = ex.started;
    out.finished = w.now();
    Callback done = std::move(ex.done);
    pending_.erase(it);
    if (done)
        done(w, out);
    return true;
}

} // namespace guardsim::netsim
