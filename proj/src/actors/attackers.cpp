/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "guardsim/actors/attackers.hpp"

#include "guardsim/guard/setup.hpp"

namespace guardsim::actors {

using coap::SimMessage;
using netsim::World;

const char* to_string(AttackKind k)
{
    switch (k) {
    case AttackKind::BlindFlood: return "BlindFlood";
    case AttackKind::DistributedFlood: return "DistributedFlood";
    case AttackKind::Impersonator: return "Impersonator";
    case AttackKind::OnPath: return "OnPath";
    }
    return "?";
}

std::optional<AttackKind> attack_kind_from(const std::string& s)
{
    for (auto k : {AttackKind::BlindFlood, AttackKind::DistributedFlood, AttackKind::Impersonator, AttackKind::OnPath})
        if (s == to_string(k))
            return k;
    return std::nullopt;
}

namespace {

/// Picks entry point or server address with equal odds.
Address aim(const FloodTargets& t, Rng& rng, SimMessage& m)
{
    bool entry = t.entry == t.server || rng.uniform(2) == 0;
    m.dst = entry ? t.entry : t.server;
    if (entry && t.uri_host)
        m.uri_host = t.uri_host;
    return m.dst;
}

} // namespace

FloodAttacker::FloodAttacker(Address a, AttackerModel model, FloodTargets targets, std::uint64_t seed)
    : Node(a, "attacker"), model_(model), targets_(std::move(targets)), rng_(seed)
{
    std::uint32_t n = model_.kind == AttackKind::DistributedFlood ? std::max(1u, model_.n_sources) : 1;
    for (std::uint32_t i = 0; i < n; ++i)
        mids_.push_back(static_cast<std::uint16_t>(rng_.next_u64()));
}

void FloodAttacker::start(World& w)
{
    if (model_.rate <= 0)
        return;
    SimTime first = model_.start + SimTime::from_seconds(rng_.exponential(model_.rate));
    w.schedule(std::max(first, w.now()), [this, &w] { fire(w); });
}

void FloodAttacker::fire(World& w)
{
    if (w.now() >= model_.stop)
        return;
    auto i = static_cast<std::uint32_t>(rng_.uniform(mids_.size()));
    SimMessage m;
    m.src = Address{spoofed_base + i};
    m.type = coap::MessageType::Con;
    m.mid = mids_[i]++;
    m.token = rng_.bytes(2);
    m.code = coap::codes::Post;
    aim(targets_, rng_, m);
    m.uri_path = guard::paths::edhoc;
    m.set_body(rng_.bytes(9));
    m.payload_len = std::max(m.body.size(), coap::payload_for_size(m, 40));
    ++sent_;
    w.send(address(), {m, true});
    w.schedule_in(SimTime::from_seconds(rng_.exponential(model_.rate)), [this, &w] { fire(w); });
}

Impersonator::Impersonator(Address a, AttackerModel model, FloodTargets targets, VictimProvider victim,
                           std::uint64_t seed)
    : Node(a, "impersonator"), model_(model), targets_(std::move(targets)), victim_(std::move(victim)), rng_(seed)
{
}

void Impersonator::start(World& w)
{
    if (model_.rate <= 0)
        return;
    SimTime first = model_.start + SimTime::from_seconds(rng_.exponential(model_.rate));
    w.schedule(std::max(first, w.now()), [this, &w] { fire(w); });
}

void Impersonator::fire(World& w)
{
    if (w.now() >= model_.stop)
        return;
    w.schedule_in(SimTime::from_seconds(rng_.exponential(model_.rate)), [this, &w] { fire(w); });
    auto v = victim_();
    if (!v)
        return;
    SimMessage m;
    m.src = v->address;
    m.type = coap::MessageType::Con;
    m.mid = static_cast<std::uint16_t>(rng_.next_u64());
    m.token = rng_.bytes(2);
    m.code = coap::codes::Post;
    aim(targets_, rng_, m);
    Bytes kid = model_.knows_kid ? v->kid : Bytes{static_cast<std::uint8_t>(rng_.uniform(256))};
    std::uint32_t piv = 0;
    if (!v->completed_pivs.empty() && rng_.uniform(2) == 0) {
        piv = v->completed_pivs[rng_.uniform(v->completed_pivs.size())];
    } else {
        std::uint32_t highest = v->completed_pivs.empty() ? 0 : v->completed_pivs.back();
        piv = highest + 1000 + static_cast<std::uint32_t>(rng_.uniform(100000));
    }
    m.oscore = coap::OscoreOption{kid, piv};
    m.set_body(rng_.bytes(12), 21);
    ++sent_;
    w.send(address(), {m, true});
}

OnPathAttacker::OnPathAttacker(AttackerModel model, OnPathTarget target, Address from, Address to,
                               std::uint64_t seed)
    : model_(model), target_(target), from_(from), to_(to), rng_(seed)
{
}

void OnPathAttacker::install(World& w)
{
    w.set_link_tap(from_, to_, [this](World& w, netsim::Frame& f) { tap(w, f); });
    if (model_.rate <= 0)
        return;
    SimTime period = SimTime::from_seconds(1.0 / model_.rate);
    for (SimTime t = model_.start; t < model_.stop; t += period)
        w.schedule(t, [this] {
            armed_ = model_.burst;
            victim_.reset();
        });
}

void OnPathAttacker::tap(World& w, netsim::Frame& f)
{
    if (armed_ == 0 || w.now() >= model_.stop)
        return;
    const SimMessage& m = f.msg;
    if (!m.oscore || !m.code.is_response())
        return;
    if (target_ == OnPathTarget::ClientResponses) {
        if (!victim_)
            victim_ = m.dst;
        if (m.dst != *victim_)
            return;
    } else if (m.src != from_) {
        return;
    }
    f.msg.body = rng_.bytes(m.body.size());
    f.attack = true;
    --armed_;
    ++corrupted_;
    netsim::JsonFields d;
    d.add_raw("msg", World::describe(f.msg).str());
    w.trace().record(w.now(), "corrupt", "onpath", d);
}

} // namespace guardsim::actors
