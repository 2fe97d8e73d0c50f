/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "guardsim/actors/attackers.hpp"
#include "guardsim/coap/tx_state.hpp"
#include "guardsim/core/expected.hpp"
#include "guardsim/guard/policy.hpp"
#include "guardsim/netsim/energy.hpp"
#include "guardsim/netsim/link.hpp"

namespace guardsim::harness {

enum class Scenario { BaselineOpen, BaselineThrottled, Exemptions, FullGuard };

const char* to_string(Scenario s);
std::optional<Scenario> scenario_from(const std::string& s);

/// Invalid configuration; `path` names the offending field ("attack.rate").
struct ConfigError {
    std::string path;
    std::string message;

    std::string what() const { return path.empty() ? message : path + ": " + message; }
};

struct Links {
    netsim::LinkParams internet{10'000'000.0, SimTime::from_ms(50), 64};
    netsim::LinkParams server_lan{1000.0, SimTime::from_ms(10), 8};
    netsim::LinkParams client_lan{250'000.0, SimTime::from_ms(5), 32};
};

/// Legitimate workload: a new client session every `interval`, each doing
/// one key exchange and `requests` protected requests.
struct Workload {
    SimTime first_start = SimTime::from_seconds(5);
    SimTime interval = SimTime::from_seconds(60);
    /// Each session starts uniformly within this much after its slot.
    SimTime start_jitter = SimTime::from_seconds(10);
    /// Sessions started; empty means one per interval for the whole run.
    std::optional<std::uint32_t> count;
    std::uint32_t requests = 12;
    SimTime request_interval = SimTime::from_seconds(10);
    bool poisson = false;
};

/// Thresholds turning metrics into labels.
struct Classification {
    double loss_fraction = 0.05;
    double retransmit_fraction = 0.10;
    /// Attack drain per simulated day, as a fraction of the budget, above
    /// which device resource spend counts as high.
    double resource_high_per_day = 1.0;
};

struct ScenarioConfig {
    std::string name;  ///< label; generated when empty
    Scenario scenario = Scenario::BaselineOpen;
    std::optional<actors::AttackerModel> attack;
    std::uint64_t seed = 42;
    SimTime duration = SimTime::from_seconds(1800);
    /// Interactions started before this are not measured.
    SimTime warmup = SimTime::from_seconds(300);
    /// Extra time after `duration` so measured exchanges can finish or give up.
    SimTime drain = SimTime::from_seconds(100);

    Links links;
    netsim::EnergyCosts energy;
    guard::GuardPolicy guard;
    /// Indiscriminate inbound bucket of the throttled baseline router.
    guard::BucketSpec router{0.6, 1.0};
    coap::BackoffParams coap{SimTime::from_ms(2000), 4, 1.5};
    Workload clients;
    Classification classify;

    std::string label() const;
};

/// Cells to run: every scenario under every attack entry (none = no attack).
struct MatrixConfig {
    ScenarioConfig base;
    std::vector<Scenario> scenarios;
    std::vector<std::optional<actors::AttackerModel>> attacks;

    std::vector<ScenarioConfig> cells() const;
};

actors::AttackerModel default_attack(actors::AttackKind kind);

/// The reference grid: all four scenarios, without attack and under a
/// single-source and a distributed flood.
MatrixConfig default_matrix();

Expected<ScenarioConfig, ConfigError> parse_scenario_config(const nlohmann::json& j);
Expected<MatrixConfig, ConfigError> parse_matrix_config(const nlohmann::json& j);
Expected<nlohmann::json, ConfigError> load_json_file(const std::string& path);

nlohmann::json to_json(const ScenarioConfig& c);
nlohmann::json to_json(const actors::AttackerModel& a);

} // namespace guardsim::harness
