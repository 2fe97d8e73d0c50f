/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "guardsim/harness/scenario.hpp"

#include <stdexcept>

namespace guardsim::harness {

namespace {

/// Independent per-node seeds from the run seed.
std::uint64_t derive(std::uint64_t seed, std::uint64_t salt)
{
    Rng r(seed ^ (salt * 0x9E3779B97F4A7C15ULL));
    return r.next_u64();
}

Key random_key(Rng& rng)
{
    Key k{};
    for (auto& b : k)
        b = static_cast<std::uint8_t>(rng.next_u64());
    return k;
}

const char* const audience = "S";

} // namespace

ScenarioWorld::ScenarioWorld(const ScenarioConfig& c)
    : config(c), world(netsim::WorldOptions{c.seed, c.links.internet, false})
{
}

void ScenarioWorld::run() { world.run_until(end()); }

Expected<std::unique_ptr<ScenarioWorld>, ConfigError> build_scenario(const ScenarioConfig& c, bool verbose_trace)
{
    if (c.warmup > c.duration)
        return unexpected(ConfigError{"warmup_s", "longer than duration_s"});
    if (c.attack && c.attack->stop < c.attack->start)
        return unexpected(ConfigError{"attack.stop_s", "before start_s"});

    auto sw = std::make_unique<ScenarioWorld>(c);
    auto& w = sw->world;
    w.trace().set_verbose(verbose_trace);
    Rng keys(derive(c.seed, 1));

    sw->rd = &w.add_node<actors::RendezvousNode>(addr::rd);
    w.attach_internet(addr::rd);
    sw->as = &w.add_node<actors::AsNode>(addr::as, derive(c.seed, 2));
    w.attach_internet(addr::as);

    const bool guarded = c.scenario == Scenario::Exemptions || c.scenario == Scenario::FullGuard;
    const bool full = c.scenario == Scenario::FullGuard;

    // Server network: the gateway is a router, a throttling router or the
    // server-side guard.
    switch (c.scenario) {
    case Scenario::BaselineOpen:
        sw->server_router = &w.add_node<actors::Router>(addr::server_gateway, "R-S");
        break;
    case Scenario::BaselineThrottled:
        sw->server_router = &w.add_node<actors::Router>(addr::server_gateway, "R-S", c.router);
        break;
    case Scenario::Exemptions:
    case Scenario::FullGuard: {
        guard::GuardPolicy policy = c.guard;
        policy.mode = full ? guard::GuardMode::FullGuard : guard::GuardMode::Exemptions;
        sw->server_guard =
            &w.add_node<guard::ServerGuardNode>(addr::server_gateway, policy, derive(c.seed, 3), "sgp", c.coap);
        break;
    }
    }
    w.attach_internet(addr::server_gateway);

    const Key as_key = random_key(keys);
    actors::ServerOptions so;
    so.rd = addr::rd;
    so.backoff = c.coap;
    if (guarded)
        so.guard = addr::server_gateway;
    if (full)
        so.accept = guard::AcceptedAs{as_key, audience, addr::as};
    sw->server = &w.add_node<actors::ServerNode>(addr::server, so, derive(c.seed, 4));
    w.attach_lan(addr::server, addr::server_gateway, c.links.server_lan, c.links.server_lan);
    w.attach_energy(addr::server, c.energy);

    // Client network.
    if (full) {
        guard::ClientGuardOptions go;
        go.backoff = c.coap;
        go.renegotiate_after = c.guard.tunnel_failures_before_renegotiate;
        go.cache_lifetime = c.guard.response_cache_lifetime;
        sw->client_guard = &w.add_node<guard::ClientGuardNode>(addr::client_gateway, go, derive(c.seed, 5));
    } else {
        sw->client_router = &w.add_node<actors::Router>(addr::client_gateway, "R-C");
    }
    w.attach_internet(addr::client_gateway);

    auto& registry = sw->as->registry();
    registry.add_audience(audience, as_key);
    registry.add_subject("cgp");

    std::uint32_t n_clients = c.clients.count.value_or(0);
    if (!c.clients.count && c.duration > c.clients.first_start)
        n_clients = static_cast<std::uint32_t>((c.duration - c.clients.first_start).ms() / c.clients.interval.ms() + 1);
    Rng jitter(derive(c.seed, 7));
    for (std::uint32_t k = 0; k < n_clients; ++k) {
        const Address a{addr::first_client + k};
        actors::ClientOptions co;
        co.key_id = "c" + std::to_string(k);
        co.rd = addr::rd;
        co.as = addr::as;
        if (full)
            co.client_guard = addr::client_gateway;
        co.start_at = c.clients.first_start + SimTime::from_ms(c.clients.interval.ms() * k);
        if (c.clients.start_jitter.ms() > 0)
            co.start_at = co.start_at + SimTime::from_ms(static_cast<std::int64_t>(
                                            jitter.uniform(static_cast<std::uint64_t>(c.clients.start_jitter.ms()))));
        co.requests = c.clients.requests;
        co.request_interval = c.clients.request_interval;
        co.poisson = c.clients.poisson;
        co.backoff = c.coap;
        registry.add_subject(co.key_id, {audience});
        auto& node = w.add_node<actors::ClientNode>(a, "client-" + std::to_string(k), co, sw->metrics,
                                                    derive(c.seed, 100 + k));
        w.attach_lan(a, addr::client_gateway, c.links.client_lan, c.links.client_lan);
        sw->clients.push_back(&node);
    }

    if (c.attack) {
        const auto& m = *c.attack;
        actors::FloodTargets t;
        t.server = addr::server;
        t.entry = guarded ? addr::server_gateway : addr::server;
        if (guarded)
            t.uri_host = so.name;
        const std::uint64_t aseed = derive(c.seed, 6);
        switch (m.kind) {
        case actors::AttackKind::BlindFlood:
        case actors::AttackKind::DistributedFlood:
            sw->flood = &w.add_node<actors::FloodAttacker>(addr::attacker, m, t, aseed);
            w.attach_internet(addr::attacker);
            break;
        case actors::AttackKind::Impersonator: {
            // The first client still in its data phase is the one worth posing as.
            auto* clients = &sw->clients;
            actors::VictimProvider victim = [clients]() -> std::optional<actors::VictimView> {
                for (auto* cl : *clients)
                    if (cl->active())
                        return cl->victim();
                return std::nullopt;
            };
            sw->impersonator = &w.add_node<actors::Impersonator>(addr::attacker, m, t, victim, aseed);
            w.attach_internet(addr::attacker);
            break;
        }
        case actors::AttackKind::OnPath:
            sw->on_path = std::make_unique<actors::OnPathAttacker>(
                m, full ? actors::OnPathTarget::TunnelFrames : actors::OnPathTarget::ClientResponses,
                addr::server_gateway, addr::client_gateway, aseed);
            sw->on_path->install(w);
            break;
        }
    }
    return sw;
}

ScenarioReport summarize(const ScenarioWorld& sw)
{
    const ScenarioConfig& c = sw.config;
    ScenarioReport r;
    r.name = c.label();
    r.scenario = c.scenario;
    if (c.attack)
        r.attack = c.attack->kind;
    r.seed = c.seed;
    r.duration_s = c.duration.seconds();

    const auto& all = sw.metrics.interactions();
    r.setup = collect_phase(all, actors::Phase::Setup, c.warmup, c.duration);
    r.steady = collect_phase(all, actors::Phase::Steady, c.warmup, c.duration);
    if (auto b = classify_behavior(r.setup, c.coap, c.classify))
        r.setup_behavior = *b;
    if (auto b = classify_behavior(r.steady, c.coap, c.classify))
        r.steady_behavior = *b;

    r.energy = energy_report(sw.world.trace(), c.energy.edhoc);
    SimTime active;
    if (c.attack) {
        const SimTime from = std::min(c.attack->start, sw.end());
        const SimTime to = std::min(c.attack->stop, sw.end());
        active = to - from;
    }
    r.resource = resource_label(r.energy.attack_attributable, active, c.energy.budget, c.classify.resource_high_per_day);

    r.rekeys = sw.metrics.rekeys;
    r.tunnel_renegotiations = sw.client_guard ? sw.client_guard->renegotiations() : 0;
    r.events = sw.world.events_processed();
    return r;
}

ScenarioReport run_scenario(const ScenarioConfig& config)
{
    auto sw = build_scenario(config);
    if (!sw)
        throw std::invalid_argument(sw.error().what());
    (*sw)->run();
    return summarize(**sw);
}

} // namespace guardsim::harness
