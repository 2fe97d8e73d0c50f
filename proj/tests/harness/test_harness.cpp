/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "doctest.h"

#include <map>
#include <sstream>

#include <json.hpp>

#include "guardsim/harness/matrix.hpp"
#include "guardsim/harness/scenario.hpp"

using namespace guardsim;
using namespace guardsim::harness;
using actors::AttackKind;
using actors::Interaction;
using actors::InteractionResult;
using actors::Phase;
using nlohmann::json;

namespace {

Interaction make(Phase p, double start_s, double latency_s, InteractionResult r, std::uint32_t retx = 0)
{
    Interaction i;
    i.phase = p;
    i.client = Address{1000};
    i.started = SimTime::from_seconds(start_s);
    i.finished = SimTime::from_seconds(start_s + latency_s);
    i.result = r;
    i.retransmissions = retx;
    return i;
}

/// Completion time of a request that needed `retx` retransmissions with
/// random factor 1 and 2 s base timeout, plus a one-way trip each side.
double after_retx(std::uint32_t retx, double rtt = 0.4)
{
    double t = 0, to = 2.0;
    for (std::uint32_t k = 0; k < retx; ++k, to *= 2)
        t += to;
    return t + rtt;
}

PhaseMetrics metrics_of(const std::vector<Interaction>& v, Phase p = Phase::Steady)
{
    return collect_phase(v, p, SimTime::from_seconds(0), SimTime::from_seconds(1e6));
}

const coap::BackoffParams backoff{SimTime::from_ms(2000), 4, 1.0};

ScenarioConfig short_config(Scenario s, std::optional<actors::AttackerModel> a = std::nullopt)
{
    ScenarioConfig c;
    c.scenario = s;
    c.attack = a;
    c.duration = SimTime::from_seconds(600);
    c.warmup = SimTime::from_seconds(120);
    if (c.attack) {
        c.attack->start = SimTime::from_seconds(120);
        c.attack->stop = c.duration;
    }
    return c;
}

ScenarioReport random_report(Rng& rng)
{
    auto phase = [&] {
        PhaseMetrics m;
        m.n_started = rng.uniform(1000);
        m.n_completed = rng.uniform(m.n_started + 1);
        m.n_timed_out = m.n_started - m.n_completed;
        m.n_failed = rng.uniform(3);
        m.n_retransmissions = rng.uniform(5000);
        m.n_completed_retransmitted = rng.uniform(m.n_completed + 1);
        for (std::uint64_t k = 0; k < m.n_completed % 17; ++k)
            m.completion_latencies_s.push_back(rng.uniform01() * 90.0);
        return m;
    };
    ScenarioReport r;
    r.name = "cell-" + std::to_string(rng.uniform(100));
    r.scenario = static_cast<Scenario>(rng.uniform(4));
    if (rng.uniform(2))
        r.attack = static_cast<AttackKind>(rng.uniform(4));
    r.seed = rng.next_u64();
    r.duration_s = 1800;
    r.setup = phase();
    r.steady = phase();
    r.energy = {rng.uniform01() * 5e4, rng.uniform01() * 1e3, rng.uniform01() * 1e3};
    if (rng.uniform(3))
        r.setup_behavior = static_cast<Behavior>(rng.uniform(3));
    if (rng.uniform(3))
        r.steady_behavior = static_cast<Behavior>(rng.uniform(3));
    r.resource = static_cast<ResourceLabel>(rng.uniform(3));
    r.rekeys = rng.uniform(50);
    r.tunnel_renegotiations = rng.uniform(50);
    r.events = rng.next_u64() >> 12;
    if (rng.uniform(5) == 0)
        r.error = "boom \"quoted\", with comma";
    return r;
}

} // namespace

TEST_CASE("classify: every request answered without retransmission is good")
{
    std::vector<Interaction> v;
    for (int k = 0; k < 100; ++k)
        v.push_back(make(Phase::Steady, k * 10, 0.4, InteractionResult::Completed));
    auto m = metrics_of(v);
    CHECK(m.n_started == 100);
    CHECK(m.n_completed == 100);
    auto b = classify_behavior(m, backoff);
    REQUIRE(b.has_value());
    CHECK(*b == Behavior::Good);
}

TEST_CASE("classify: completions after two or three retransmissions are throttled")
{
    std::vector<Interaction> v;
    for (int k = 0; k < 100; ++k) {
        std::uint32_t retx = k % 2 ? 2 : 3;
        v.push_back(make(Phase::Steady, k * 100, after_retx(retx), InteractionResult::Completed, retx));
    }
    auto m = metrics_of(v);
    CHECK(m.n_completed_retransmitted == 100);
    CHECK(*classify_behavior(m, backoff) == Behavior::Throttled);
}

TEST_CASE("classify: slow answers without retransmission are throttled")
{
    std::vector<Interaction> v;
    for (int k = 0; k < 10; ++k)
        v.push_back(make(Phase::Steady, k * 100, 3.0, InteractionResult::Completed));
    CHECK(*classify_behavior(metrics_of(v), backoff) == Behavior::Throttled);
}

TEST_CASE("classify: 30% give-ups are losses")
{
    // Give-up after 4 retransmissions: 2 + 4 + 8 + 16 + 32 = 62 s.
    CHECK(after_retx(5, 0) == doctest::Approx(62.0));
    std::vector<Interaction> v;
    for (int k = 0; k < 100; ++k) {
        if (k % 10 < 3)
            v.push_back(make(Phase::Setup, k * 100, 62.0, InteractionResult::TimedOut, 4));
        else
            v.push_back(make(Phase::Setup, k * 100, 0.4, InteractionResult::Completed));
    }
    auto m = metrics_of(v, Phase::Setup);
    CHECK(m.n_timed_out == 30);
    CHECK(metrics_of(v, Phase::Steady).n_started == 0);
    CHECK(*classify_behavior(m, backoff) == Behavior::Losses);
}

TEST_CASE("classify: the loss boundary is exclusive")
{
    PhaseMetrics m;
    m.n_started = 100;
    m.n_completed = 95;
    m.completion_latencies_s.assign(95, 0.4);
    CHECK(*classify_behavior(m, backoff) == Behavior::Good);
    m.n_completed = 94;
    m.completion_latencies_s.assign(94, 0.4);
    CHECK(*classify_behavior(m, backoff) == Behavior::Losses);

    m.n_completed = 100;
    m.completion_latencies_s.assign(100, 0.4);
    m.n_completed_retransmitted = 10;
    CHECK(*classify_behavior(m, backoff) == Behavior::Good);
    m.n_completed_retransmitted = 11;
    CHECK(*classify_behavior(m, backoff) == Behavior::Throttled);
}

TEST_CASE("classify: no interactions")
{
    CHECK_FALSE(classify_behavior(PhaseMetrics{}, backoff).has_value());
    CHECK(label_of(std::nullopt) == "n/a");
}

TEST_CASE("collect_phase keeps the window half-open")
{
    std::vector<Interaction> v{make(Phase::Steady, 299.999, 1, InteractionResult::Completed),
                               make(Phase::Steady, 300, 1, InteractionResult::Completed),
                               make(Phase::Steady, 1799.999, 1, InteractionResult::Failed),
                               make(Phase::Steady, 1800, 1, InteractionResult::Completed)};
    auto m = collect_phase(v, Phase::Steady, SimTime::from_seconds(300), SimTime::from_seconds(1800));
    CHECK(m.n_started == 2);
    CHECK(m.n_completed == 1);
    CHECK(m.n_failed == 1);
}

TEST_CASE("resource label")
{
    const double budget = 50000;
    const auto hour = SimTime::from_seconds(3600);
    CHECK(resource_label(0, hour, budget, 1.0) == ResourceLabel::LowOrNone);
    // One budget per day is 2083.3 per hour.
    CHECK(resource_label(2084, hour, budget, 1.0) == ResourceLabel::High);
    CHECK(resource_label(2083, hour, budget, 1.0) == ResourceLabel::Low);
    CHECK(resource_label(209, hour, budget, 0.1) == ResourceLabel::High);
    CHECK(resource_label(1, SimTime{}, budget, 1.0) == ResourceLabel::High);
}

TEST_CASE("energy report without an attacker")
{
    auto c = short_config(Scenario::BaselineOpen);
    auto r = run_scenario(c);
    CHECK(r.energy.total_drained > 0);
    CHECK(r.energy.attack_attributable == 0);
    CHECK(r.resource == ResourceLabel::LowOrNone);
    CHECK(r.setup_behavior == Behavior::Good);
    CHECK(r.steady_behavior == Behavior::Good);
}

TEST_CASE("energy report splits by cause")
{
    netsim::Trace t;
    netsim::JsonFields a, b, other;
    a.add("cause", "edhoc").add("amount", 1.0).add("remaining", 9.0).add("attack", true);
    b.add("cause", "rx_bytes").add("amount", 0.25).add("remaining", 8.75).add("attack", false);
    other.add("x", 1);
    t.record(SimTime{}, "energy", "S", a);
    t.record(SimTime{}, "energy", "S", b);
    t.record(SimTime{}, "noise", "S", other);
    auto e = energy_report(t, 0.5);
    CHECK(e.total_drained == doctest::Approx(1.25));
    CHECK(e.attack_attributable == doctest::Approx(1.0));
    CHECK(e.projected_exchanges_lost == doctest::Approx(2.0));
}

TEST_CASE("report JSON round trip")
{
    Rng rng(7);
    for (int k = 0; k < 200; ++k) {
        auto r = random_report(rng);
        auto back = report_from_json(json::parse(to_json(r).dump()));
        REQUIRE(back.has_value());
        CHECK(*back == r);
    }
    auto real = run_scenario(short_config(Scenario::Exemptions, default_attack(AttackKind::BlindFlood)));
    auto back = report_from_json(json::parse(to_json(real).dump()));
    REQUIRE(back.has_value());
    CHECK(*back == real);

    CHECK_FALSE(report_from_json(json::object()).has_value());
}

TEST_CASE("CSV shape")
{
    Rng rng(3);
    std::vector<ScenarioReport> rs;
    for (int k = 0; k < 5; ++k)
        rs.push_back(random_report(rng));
    rs[0].error = "a \"b\", c";
    auto csv = to_csv(rs);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    auto columns = [](const std::string& l) {
        std::size_t n = 1;
        bool quoted = false;
        for (char c : l) {
            if (c == '"')
                quoted = !quoted;
            else if (c == ',' && !quoted)
                ++n;
        }
        return n;
    };
    const auto header = columns(line);
    CHECK(header == 19);
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        CHECK(columns(line) == header);
    }
    CHECK(rows == 2 * rs.size());
}

TEST_CASE("config errors name the field")
{
    auto path_of = [](const json& j) {
        auto c = parse_scenario_config(j);
        REQUIRE_FALSE(c.has_value());
        return c.error().path;
    };
    CHECK(path_of({{"bogus", 1}}) == "bogus");
    CHECK(path_of({{"scenario", "nope"}}) == "scenario");
    CHECK(path_of({{"attack", {{"kind", "BlindFlood"}, {"rate", -1}}}}) == "attack.rate");
    CHECK(path_of({{"attack", {{"rate", 1}}}}) == "attack.kind");
    CHECK(path_of({{"attack", {{"kind", "BlindFlood"}, {"n_sources", 3}}}}) == "attack.n_sources");
    CHECK(path_of({{"seed", "x"}}) == "seed");
    CHECK(path_of({{"duration_s", 100}, {"warmup_s", 200}}) == "warmup_s");

    auto m = parse_matrix_config({{"matrix", {{"attacks", {nullptr, {{"kind", "Nope"}}}}}}});
    REQUIRE_FALSE(m.has_value());
    CHECK(m.error().path == "matrix.attacks[1].kind");
    CHECK(m.error().what().find("matrix.attacks[1].kind: ") == 0);

    auto missing = load_json_file("/nonexistent/guardsim.json");
    CHECK_FALSE(missing.has_value());
}

TEST_CASE("config JSON round trip")
{
    ScenarioConfig c;
    c.name = "x";
    c.scenario = Scenario::Exemptions;
    c.attack = default_attack(AttackKind::DistributedFlood);
    c.seed = 123;
    c.clients.count = 4;
    c.clients.poisson = true;
    c.guard.echo_max_age = SimTime::from_seconds(17);
    auto back = parse_scenario_config(to_json(c));
    REQUIRE(back.has_value());
    CHECK(to_json(*back) == to_json(c));
    CHECK(back->label() == "x");

    auto d = parse_scenario_config(json::object());
    REQUIRE(d.has_value());
    CHECK(to_json(*d) == to_json(ScenarioConfig{}));
    CHECK(d->label() == "baseline-open/none");
}

TEST_CASE("shipped matrix config is the default matrix")
{
    auto j = load_json_file(GUARDSIM_CONFIG_DIR "/matrix.json");
    REQUIRE(j.has_value());
    auto m = parse_matrix_config(*j);
    REQUIRE(m.has_value());
    auto a = m->cells(), b = default_matrix().cells();
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k)
        CHECK(to_json(a[k]) == to_json(b[k]));
}

TEST_CASE("scenario wiring")
{
    SUBCASE("throttled baseline has no guard")
    {
        auto sw = build_scenario(short_config(Scenario::BaselineThrottled));
        REQUIRE(sw.has_value());
        (*sw)->run();
        CHECK((*sw)->server_guard == nullptr);
        CHECK((*sw)->client_guard == nullptr);
        REQUIRE((*sw)->server_router);
        CHECK((*sw)->world.trace().count("flow_class") == 0);
        CHECK((*sw)->world.trace().count("setup_step") == 0);
    }
    SUBCASE("exemptions point the directory at the guard")
    {
        auto sw = build_scenario(short_config(Scenario::Exemptions));
        REQUIRE(sw.has_value());
        (*sw)->run();
        auto e = (*sw)->rd->directory().lookup("S");
        REQUIRE(e.has_value());
        CHECK(e->proxy_address == addr::server_gateway);
        CHECK((*sw)->client_guard == nullptr);
    }
    SUBCASE("full guard setup steps are ordered")
    {
        auto sw = build_scenario(short_config(Scenario::FullGuard));
        REQUIRE(sw.has_value());
        (*sw)->run();
        std::map<int, double> first;
        for (const auto& ev : (*sw)->world.trace().events()) {
            if (ev.kind != "setup_step")
                continue;
            int step = json::parse(ev.detail).at("step").get<int>();
            first.try_emplace(step, ev.t.seconds());
        }
        REQUIRE(first.size() == 8);
        for (int s = 1; s < 6; ++s)
            CHECK(first[s] <= first[6]);
        CHECK(first[6] <= first[7]);
        CHECK(first[7] <= first[8]);
    }
}

TEST_CASE("build_scenario rejects inconsistent configs")
{
    auto c = short_config(Scenario::BaselineOpen);
    c.warmup = c.duration + SimTime::from_seconds(1);
    CHECK_FALSE(build_scenario(c).has_value());
    CHECK_THROWS_AS(run_scenario(c), std::invalid_argument);
}

TEST_CASE("matrix is deterministic and drain is monotone")
{
    MatrixConfig mc = default_matrix();
    mc.base = short_config(Scenario::BaselineOpen);
    for (auto& a : mc.attacks)
        if (a) {
            a->start = mc.base.warmup;
            a->stop = mc.base.duration;
        }
    auto cells = mc.cells();
    auto one = run_matrix(cells, 1);
    auto many = run_matrix(cells, 4);
    CHECK(to_json(one).dump() == to_json(many).dump());
    CHECK_FALSE(one.any_errored());

    for (auto kind : {AttackKind::BlindFlood, AttackKind::DistributedFlood}) {
        double prev = 1e300;
        for (auto s : {Scenario::BaselineOpen, Scenario::BaselineThrottled, Scenario::Exemptions,
                       Scenario::FullGuard}) {
            const auto* r = one.find(s, kind);
            REQUIRE(r);
            CHECK(r->energy.attack_attributable <= prev);
            prev = r->energy.attack_attributable;
        }
        CHECK(prev == 0);
    }
    auto md = to_markdown(one);
    CHECK(md.find("Behavior of connection setup") != std::string::npos);
}
