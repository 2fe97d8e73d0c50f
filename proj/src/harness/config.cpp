/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "guardsim/harness/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>

namespace guardsim::harness {

using nlohmann::json;

const char* to_string(Scenario s)
{
    switch (s) {
    case Scenario::BaselineOpen: return "baseline-open";
    case Scenario::BaselineThrottled: return "baseline-throttled";
    case Scenario::Exemptions: return "exemptions";
    case Scenario::FullGuard: return "fullguard";
    }
    return "?";
}

std::optional<Scenario> scenario_from(const std::string& s)
{
    for (auto v : {Scenario::BaselineOpen, Scenario::BaselineThrottled, Scenario::Exemptions, Scenario::FullGuard})
        if (s == to_string(v))
            return v;
    return std::nullopt;
}

std::string ScenarioConfig::label() const
{
    if (!name.empty())
        return name;
    return std::string(to_string(scenario)) + "/" + (attack ? actors::to_string(attack->kind) : "none");
}

std::vector<ScenarioConfig> MatrixConfig::cells() const
{
    std::vector<ScenarioConfig> out;
    for (auto s : scenarios) {
        for (const auto& a : attacks) {
            ScenarioConfig c = base;
            c.name.clear();
            c.scenario = s;
            c.attack = a;
            out.push_back(std::move(c));
        }
    }
    return out;
}

actors::AttackerModel default_attack(actors::AttackKind kind)
{
    actors::AttackerModel m;
    m.kind = kind;
    switch (kind) {
    case actors::AttackKind::BlindFlood: m.rate = 20.0; break;
    case actors::AttackKind::DistributedFlood:
        m.n_sources = 50;
        m.rate = 50.0;
        break;
    case actors::AttackKind::Impersonator: m.rate = 5.0; break;
    case actors::AttackKind::OnPath: m.rate = 1.0 / 60.0; break;
    }
    return m;
}

MatrixConfig default_matrix()
{
    MatrixConfig m;
    m.scenarios = {Scenario::BaselineOpen, Scenario::BaselineThrottled, Scenario::Exemptions, Scenario::FullGuard};
    m.attacks = {std::nullopt, default_attack(actors::AttackKind::BlindFlood),
                 default_attack(actors::AttackKind::DistributedFlood)};
    return m;
}

namespace {

struct Fail {
    ConfigError error;
};

[[noreturn]] void fail(const std::string& path, const std::string& msg) { throw Fail{{path, msg}}; }

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void expect_object(const json& j, const std::string& path, std::initializer_list<const char*> allowed)
{
    if (!j.is_object())
        fail(path, "expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : j.items())
        if (!ok.count(k))
            fail(join(path, k), "unknown field");
}

double number(const json& j, const std::string& path, double lo, double hi)
{
    if (!j.is_number())
        fail(path, "expected a number");
    double v = j.get<double>();
    if (!std::isfinite(v) || v < lo || v > hi)
        fail(path, "out of range [" + json(lo).dump() + ", " + json(hi).dump() + "]");
    return v;
}

std::uint64_t integer(const json& j, const std::string& path, std::uint64_t lo, std::uint64_t hi)
{
    if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<std::int64_t>() < 0))
        fail(path, "expected a non-negative integer");
    auto v = j.get<std::uint64_t>();
    if (v < lo || v > hi)
        fail(path, "out of range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return v;
}

bool boolean(const json& j, const std::string& path)
{
    if (!j.is_boolean())
        fail(path, "expected true or false");
    return j.get<bool>();
}

std::string string(const json& j, const std::string& path)
{
    if (!j.is_string())
        fail(path, "expected a string");
    return j.get<std::string>();
}

SimTime seconds(const json& j, const std::string& path, double hi = 86400.0)
{
    return SimTime::from_seconds(number(j, path, 0.0, hi));
}

/// Calls `f(value, path)` for `key` when present.
template <class F>
void opt(const json& j, const std::string& path, const char* key, F f)
{
    if (auto it = j.find(key); it != j.end())
        f(*it, join(path, key));
}

netsim::LinkParams link(const json& j, const std::string& path, netsim::LinkParams p)
{
    expect_object(j, path, {"bandwidth_bps", "delay_ms", "queue"});
    opt(j, path, "bandwidth_bps", [&](const json& v, const std::string& q) { p.bandwidth_bps = number(v, q, 1.0, 1e12); });
    opt(j, path, "delay_ms", [&](const json& v, const std::string& q) {
        p.propagation_delay = SimTime::from_ms(static_cast<std::int64_t>(integer(v, q, 0, 600000)));
    });
    opt(j, path, "queue", [&](const json& v, const std::string& q) { p.queue_capacity = integer(v, q, 1, 1u << 20); });
    return p;
}

guard::BucketSpec bucket(const json& j, const std::string& path, guard::BucketSpec b)
{
    expect_object(j, path, {"rate", "burst"});
    opt(j, path, "rate", [&](const json& v, const std::string& q) { b.rate = number(v, q, 0.0, 1e6); });
    opt(j, path, "burst", [&](const json& v, const std::string& q) { b.burst = number(v, q, 1.0, 1e6); });
    return b;
}

guard::ClassBuckets class_buckets(const json& j, const std::string& path, guard::ClassBuckets b)
{
    expect_object(j, path, {"per_source", "aggregate"});
    opt(j, path, "per_source", [&](const json& v, const std::string& q) { b.per_source = bucket(v, q, b.per_source); });
    opt(j, path, "aggregate", [&](const json& v, const std::string& q) { b.aggregate = bucket(v, q, b.aggregate); });
    return b;
}

actors::AttackerModel attack(const json& j, const std::string& path)
{
    expect_object(j, path, {"kind", "rate", "n_sources", "start_s", "stop_s", "knows_kid", "burst"});
    auto kj = j.find("kind");
    if (kj == j.end())
        fail(join(path, "kind"), "missing");
    auto kind = actors::attack_kind_from(string(*kj, join(path, "kind")));
    if (!kind)
        fail(join(path, "kind"), "expected BlindFlood, DistributedFlood, Impersonator or OnPath");
    auto m = default_attack(*kind);
    opt(j, path, "rate", [&](const json& v, const std::string& q) { m.rate = number(v, q, 0.0, 1e5); });
    opt(j, path, "n_sources", [&](const json& v, const std::string& q) {
        m.n_sources = static_cast<std::uint32_t>(integer(v, q, 1, 1u << 20));
    });
    opt(j, path, "start_s", [&](const json& v, const std::string& q) { m.start = seconds(v, q); });
    opt(j, path, "stop_s", [&](const json& v, const std::string& q) { m.stop = seconds(v, q); });
    opt(j, path, "knows_kid", [&](const json& v, const std::string& q) { m.knows_kid = boolean(v, q); });
    opt(j, path, "burst", [&](const json& v, const std::string& q) {
        m.burst = static_cast<std::uint32_t>(integer(v, q, 1, 1000));
    });
    if (*kind != actors::AttackKind::DistributedFlood && m.n_sources != 1)
        fail(join(path, "n_sources"), "only a distributed flood has several sources");
    if (m.stop < m.start)
        fail(join(path, "stop_s"), "before start_s");
    return m;
}

const char* const scenario_fields[] = {"name",   "scenario", "attack", "seed",   "duration_s", "warmup_s",
                                       "drain_s", "links",   "energy", "guard",  "router",     "coap",
                                       "clients", "classify"};

void apply(const json& j, const std::string& path, ScenarioConfig& c)
{
    opt(j, path, "name", [&](const json& v, const std::string& q) { c.name = string(v, q); });
    opt(j, path, "scenario", [&](const json& v, const std::string& q) {
        auto s = scenario_from(string(v, q));
        if (!s)
            fail(q, "expected baseline-open, baseline-throttled, exemptions or fullguard");
        c.scenario = *s;
    });
    opt(j, path, "attack", [&](const json& v, const std::string& q) {
        if (v.is_null())
            c.attack.reset();
        else
            c.attack = attack(v, q);
    });
    opt(j, path, "seed", [&](const json& v, const std::string& q) { c.seed = integer(v, q, 0, UINT64_MAX); });
    opt(j, path, "duration_s", [&](const json& v, const std::string& q) { c.duration = seconds(v, q, 7200.0); });
    opt(j, path, "warmup_s", [&](const json& v, const std::string& q) { c.warmup = seconds(v, q); });
    opt(j, path, "drain_s", [&](const json& v, const std::string& q) { c.drain = seconds(v, q, 3600.0); });

    opt(j, path, "links", [&](const json& v, const std::string& q) {
        expect_object(v, q, {"internet", "server_lan", "client_lan"});
        opt(v, q, "internet", [&](const json& x, const std::string& p) { c.links.internet = link(x, p, c.links.internet); });
        opt(v, q, "server_lan",
            [&](const json& x, const std::string& p) { c.links.server_lan = link(x, p, c.links.server_lan); });
        opt(v, q, "client_lan",
            [&](const json& x, const std::string& p) { c.links.client_lan = link(x, p, c.links.client_lan); });
    });
    opt(j, path, "energy", [&](const json& v, const std::string& q) {
        expect_object(v, q, {"budget", "per_rx_byte", "per_msg", "edhoc", "oscore_verify", "edhoc_abort_fraction"});
        auto& e = c.energy;
        opt(v, q, "budget", [&](const json& x, const std::string& p) { e.budget = number(x, p, 0.0, 1e15); });
        opt(v, q, "per_rx_byte", [&](const json& x, const std::string& p) { e.per_rx_byte = number(x, p, 0.0, 1e6); });
        opt(v, q, "per_msg", [&](const json& x, const std::string& p) { e.per_msg = number(x, p, 0.0, 1e6); });
        opt(v, q, "edhoc", [&](const json& x, const std::string& p) { e.edhoc = number(x, p, 1e-9, 1e6); });
        opt(v, q, "oscore_verify", [&](const json& x, const std::string& p) { e.oscore_verify = number(x, p, 0.0, 1e6); });
        opt(v, q, "edhoc_abort_fraction",
            [&](const json& x, const std::string& p) { e.edhoc_abort_fraction = number(x, p, 0.0, 1.0); });
    });
    opt(j, path, "guard", [&](const json& v, const std::string& q) {
        expect_object(v, q,
                      {"unknown", "non_proxy", "verified", "jump_threshold", "seq_window", "echo_max_age_s",
                       "allowlist_idle_expiry_s", "tunnel_failures_before_renegotiate", "downlink_queue_limit",
                       "response_cache_lifetime_s"});
        auto& g = c.guard;
        opt(v, q, "unknown", [&](const json& x, const std::string& p) { g.unknown = class_buckets(x, p, g.unknown); });
        opt(v, q, "non_proxy", [&](const json& x, const std::string& p) { g.non_proxy = class_buckets(x, p, g.non_proxy); });
        opt(v, q, "verified", [&](const json& x, const std::string& p) { g.verified = class_buckets(x, p, g.verified); });
        opt(v, q, "jump_threshold", [&](const json& x, const std::string& p) {
            g.jump_threshold = static_cast<std::uint32_t>(integer(x, p, 1, 1u << 30));
        });
        opt(v, q, "seq_window", [&](const json& x, const std::string& p) {
            g.seq_window = static_cast<std::uint32_t>(integer(x, p, 1, 1u << 16));
        });
        opt(v, q, "echo_max_age_s", [&](const json& x, const std::string& p) { g.echo_max_age = seconds(x, p); });
        opt(v, q, "allowlist_idle_expiry_s",
            [&](const json& x, const std::string& p) { g.allowlist_idle_expiry = seconds(x, p); });
        opt(v, q, "tunnel_failures_before_renegotiate", [&](const json& x, const std::string& p) {
            g.tunnel_failures_before_renegotiate = static_cast<std::uint32_t>(integer(x, p, 1, 1000));
        });
        opt(v, q, "downlink_queue_limit",
            [&](const json& x, const std::string& p) { g.downlink_queue_limit = integer(x, p, 1, 1u << 20); });
        opt(v, q, "response_cache_lifetime_s",
            [&](const json& x, const std::string& p) { g.response_cache_lifetime = seconds(x, p); });
    });
    opt(j, path, "router", [&](const json& v, const std::string& q) { c.router = bucket(v, q, c.router); });
    opt(j, path, "coap", [&](const json& v, const std::string& q) {
        expect_object(v, q, {"base_timeout_ms", "retransmit_limit", "random_factor"});
        opt(v, q, "base_timeout_ms", [&](const json& x, const std::string& p) {
            c.coap.base_timeout = SimTime::from_ms(static_cast<std::int64_t>(integer(x, p, 1, 600000)));
        });
        opt(v, q, "retransmit_limit", [&](const json& x, const std::string& p) {
            c.coap.retransmit_limit = static_cast<std::uint32_t>(integer(x, p, 0, 10));
        });
        opt(v, q, "random_factor", [&](const json& x, const std::string& p) { c.coap.random_factor = number(x, p, 1.0, 4.0); });
    });
    opt(j, path, "clients", [&](const json& v, const std::string& q) {
        expect_object(v, q, {"first_start_s", "interval_s", "start_jitter_s", "count", "requests", "request_interval_s", "poisson"});
        auto& w = c.clients;
        opt(v, q, "first_start_s", [&](const json& x, const std::string& p) { w.first_start = seconds(x, p); });
        opt(v, q, "interval_s", [&](const json& x, const std::string& p) {
            w.interval = seconds(x, p);
            if (w.interval.ms() == 0)
                fail(p, "must be positive");
        });
        opt(v, q, "start_jitter_s", [&](const json& x, const std::string& p) { w.start_jitter = seconds(x, p); });
        opt(v, q, "count", [&](const json& x, const std::string& p) {
            if (x.is_null())
                w.count.reset();
            else
                w.count = static_cast<std::uint32_t>(integer(x, p, 0, 10000));
        });
        opt(v, q, "requests", [&](const json& x, const std::string& p) {
            w.requests = static_cast<std::uint32_t>(integer(x, p, 0, 100000));
        });
        opt(v, q, "request_interval_s", [&](const json& x, const std::string& p) { w.request_interval = seconds(x, p); });
        opt(v, q, "poisson", [&](const json& x, const std::string& p) { w.poisson = boolean(x, p); });
    });
    opt(j, path, "classify", [&](const json& v, const std::string& q) {
        expect_object(v, q, {"loss_fraction", "retransmit_fraction", "resource_high_per_day"});
        auto& k = c.classify;
        opt(v, q, "loss_fraction", [&](const json& x, const std::string& p) { k.loss_fraction = number(x, p, 0.0, 1.0); });
        opt(v, q, "retransmit_fraction",
            [&](const json& x, const std::string& p) { k.retransmit_fraction = number(x, p, 0.0, 1.0); });
        opt(v, q, "resource_high_per_day",
            [&](const json& x, const std::string& p) { k.resource_high_per_day = number(x, p, 0.0, 1e6); });
    });

    if (c.warmup > c.duration)
        fail(join(path, "warmup_s"), "longer than duration_s");
}

void check_scenario_keys(const json& j, const std::string& path, std::initializer_list<const char*> extra)
{
    if (!j.is_object())
        fail(path, "expected an object");
    std::set<std::string> ok(std::begin(scenario_fields), std::end(scenario_fields));
    ok.insert(extra.begin(), extra.end());
    for (const auto& [k, v] : j.items())
        if (!ok.count(k))
            fail(join(path, k), "unknown field");
}

} // namespace

Expected<ScenarioConfig, ConfigError> parse_scenario_config(const json& j)
{
    try {
        check_scenario_keys(j, "", {});
        ScenarioConfig c;
        apply(j, "", c);
        return c;
    } catch (const Fail& f) {
        return unexpected(f.error);
    }
}

Expected<MatrixConfig, ConfigError> parse_matrix_config(const json& j)
{
    try {
        check_scenario_keys(j, "", {"matrix"});
        MatrixConfig m = default_matrix();
        json base = j;
        base.erase("matrix");
        base.erase("scenario");
        base.erase("attack");
        apply(base, "", m.base);
        opt(j, "", "matrix", [&](const json& v, const std::string& q) {
            expect_object(v, q, {"scenarios", "attacks"});
            opt(v, q, "scenarios", [&](const json& x, const std::string& p) {
                if (!x.is_array() || x.empty())
                    fail(p, "expected a non-empty array");
                m.scenarios.clear();
                for (std::size_t i = 0; i < x.size(); ++i) {
                    auto ip = p + "[" + std::to_string(i) + "]";
                    auto s = scenario_from(string(x[i], ip));
                    if (!s)
                        fail(ip, "unknown scenario");
                    m.scenarios.push_back(*s);
                }
            });
            opt(v, q, "attacks", [&](const json& x, const std::string& p) {
                if (!x.is_array() || x.empty())
                    fail(p, "expected a non-empty array");
                m.attacks.clear();
                for (std::size_t i = 0; i < x.size(); ++i) {
                    auto ip = p + "[" + std::to_string(i) + "]";
                    if (x[i].is_null())
                        m.attacks.push_back(std::nullopt);
                    else
                        m.attacks.push_back(attack(x[i], ip));
                }
            });
        });
        return m;
    } catch (const Fail& f) {
        return unexpected(f.error);
    }
}

Expected<json, ConfigError> load_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        return unexpected(ConfigError{"", "cannot open " + path});
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        return unexpected(ConfigError{"", std::string("invalid JSON: ") + e.what()});
    }
}

json to_json(const actors::AttackerModel& a)
{
    json j;
    j["kind"] = actors::to_string(a.kind);
    j["rate"] = a.rate;
    j["n_sources"] = a.n_sources;
    j["start_s"] = a.start.seconds();
    j["stop_s"] = a.stop.seconds();
    j["knows_kid"] = a.knows_kid;
    j["burst"] = a.burst;
    return j;
}

namespace {

json link_json(const netsim::LinkParams& p)
{
    return {{"bandwidth_bps", p.bandwidth_bps}, {"delay_ms", p.propagation_delay.ms()}, {"queue", p.queue_capacity}};
}

json bucket_json(const guard::BucketSpec& b) { return {{"rate", b.rate}, {"burst", b.burst}}; }

json class_json(const guard::ClassBuckets& b)
{
    return {{"per_source", bucket_json(b.per_source)}, {"aggregate", bucket_json(b.aggregate)}};
}

} // namespace

json to_json(const ScenarioConfig& c)
{
    json j;
    if (!c.name.empty())
        j["name"] = c.name;
    j["scenario"] = to_string(c.scenario);
    j["attack"] = c.attack ? to_json(*c.attack) : json(nullptr);
    j["seed"] = c.seed;
    j["duration_s"] = c.duration.seconds();
    j["warmup_s"] = c.warmup.seconds();
    j["drain_s"] = c.drain.seconds();
    j["links"] = {{"internet", link_json(c.links.internet)},
                  {"server_lan", link_json(c.links.server_lan)},
                  {"client_lan", link_json(c.links.client_lan)}};
    const auto& e = c.energy;
    j["energy"] = {{"budget", e.budget},   {"per_rx_byte", e.per_rx_byte},     {"per_msg", e.per_msg},
                   {"edhoc", e.edhoc},     {"oscore_verify", e.oscore_verify}, {"edhoc_abort_fraction", e.edhoc_abort_fraction}};
    const auto& g = c.guard;
    j["guard"] = {{"unknown", class_json(g.unknown)},
                  {"non_proxy", class_json(g.non_proxy)},
                  {"verified", class_json(g.verified)},
                  {"jump_threshold", g.jump_threshold},
                  {"seq_window", g.seq_window},
                  {"echo_max_age_s", g.echo_max_age.seconds()},
                  {"allowlist_idle_expiry_s", g.allowlist_idle_expiry.seconds()},
                  {"tunnel_failures_before_renegotiate", g.tunnel_failures_before_renegotiate},
                  {"downlink_queue_limit", g.downlink_queue_limit},
                  {"response_cache_lifetime_s", g.response_cache_lifetime.seconds()}};
    j["router"] = bucket_json(c.router);
    j["coap"] = {{"base_timeout_ms", c.coap.base_timeout.ms()},
                 {"retransmit_limit", c.coap.retransmit_limit},
                 {"random_factor", c.coap.random_factor}};
    j["clients"] = {{"first_start_s", c.clients.first_start.seconds()},
                    {"interval_s", c.clients.interval.seconds()},
                    {"start_jitter_s", c.clients.start_jitter.seconds()},
                    {"count", c.clients.count ? json(*c.clients.count) : json(nullptr)},
                    {"requests", c.clients.requests},
                    {"request_interval_s", c.clients.request_interval.seconds()},
                    {"poisson", c.clients.poisson}};
    j["classify"] = {{"loss_fraction", c.classify.loss_fraction},
                     {"retransmit_fraction", c.classify.retransmit_fraction},
                     {"resource_high_per_day", c.classify.resource_high_per_day}};
    return j;
}

} // namespace guardsim::harness
