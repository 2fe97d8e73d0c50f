/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "guardsim/harness/matrix.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <sstream>
#include <thread>

#include "guardsim/harness/scenario.hpp"

namespace guardsim::harness {

bool MatrixReport::any_errored() const
{
    return std::any_of(cells.begin(), cells.end(), [](const auto& c) { return c.error.has_value(); });
}

const ScenarioReport* MatrixReport::find(Scenario s, std::optional<actors::AttackKind> attack) const
{
    for (const auto& c : cells)
        if (c.scenario == s && c.attack == attack)
            return &c;
    return nullptr;
}

MatrixReport run_matrix(const std::vector<ScenarioConfig>& cells, unsigned threads)
{
    MatrixReport m;
    m.cells.resize(cells.size());
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, cells.size())));

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            try {
                m.cells[i] = run_scenario(cells[i]);
            } catch (const std::exception& e) {
                ScenarioReport r;
                r.name = cells[i].label();
                r.scenario = cells[i].scenario;
                if (cells[i].attack)
                    r.attack = cells[i].attack->kind;
                r.seed = cells[i].seed;
                r.duration_s = cells[i].duration.seconds();
                r.error = e.what();
                m.cells[i] = std::move(r);
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool)
        t.join();
    return m;
}

nlohmann::json to_json(const MatrixReport& m)
{
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : m.cells)
        cells.push_back(to_json(c));
    return {{"cells", cells}};
}

namespace {

/// A distributed attacker causes setup losses where a single source is
/// merely throttled.
bool needs_dagger(const MatrixReport& m, const ScenarioReport& r)
{
    if (r.attack != actors::AttackKind::DistributedFlood || r.setup_behavior != Behavior::Losses)
        return false;
    const auto* single = m.find(r.scenario, actors::AttackKind::BlindFlood);
    return single && !single->error && single->setup_behavior != Behavior::Losses;
}

std::string cell(const ScenarioReport& r, const std::optional<Behavior>& b, bool dagger)
{
    if (r.error)
        return "Errored";
    return label_of(b) + (dagger ? " †" : "");
}

} // namespace

std::string to_markdown(const MatrixReport& m)
{
    std::ostringstream o;
    o << "| |";
    for (const auto& c : m.cells)
        o << ' ' << to_string(c.scenario) << " |";
    o << "\n|---|";
    for (std::size_t i = 0; i < m.cells.size(); ++i)
        o << "---|";
    o << "\n| attack |";
    for (const auto& c : m.cells)
        o << ' ' << (c.attack ? actors::to_string(*c.attack) : "none") << " |";
    o << "\n| Device resource spent under attack |";
    for (const auto& c : m.cells)
        o << ' ' << (c.error ? "Errored" : to_string(c.resource)) << " |";
    o << "\n| Behavior of connection setup |";
    bool any_dagger = false;
    for (const auto& c : m.cells) {
        const bool d = needs_dagger(m, c);
        any_dagger = any_dagger || d;
        o << ' ' << cell(c, c.setup_behavior, d) << " |";
    }
    o << "\n| Behavior after setup |";
    for (const auto& c : m.cells)
        o << ' ' << cell(c, c.steady_behavior, false) << " |";
    o << "\n";
    if (any_dagger)
        o << "\n† The attacker needs to be distributed; from a single source the behavior is throttled.\n";

    o << "\n| cell | setup started/completed/timed out/failed | steady started/completed/timed out/failed | "
         "attack drain | rekeys | tunnel renegotiations | events |\n|---|---|---|---|---|---|---|\n";
    for (const auto& c : m.cells) {
        if (c.error) {
            o << "| " << c.name << " | Errored: " << c.error->c_str() << " | | | | | |\n";
            continue;
        }
        char drain[32];
        std::snprintf(drain, sizeof drain, "%.2f", c.energy.attack_attributable);
        o << "| " << c.name << " | " << c.setup.n_started << '/' << c.setup.n_completed << '/'
          << c.setup.n_timed_out << '/' << c.setup.n_failed << " | " << c.steady.n_started << '/'
          << c.steady.n_completed << '/' << c.steady.n_timed_out << '/' << c.steady.n_failed << " | " << drain
          << " | " << c.rekeys << " | " << c.tunnel_renegotiations << " | " << c.events << " |\n";
    }
    return o.str();
}

} // namespace guardsim::harness
