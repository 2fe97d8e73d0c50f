/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "guardsim/actors/metrics.hpp"
#include "guardsim/harness/config.hpp"
#include "guardsim/netsim/trace.hpp"

namespace guardsim::harness {

enum class Behavior { Good, Throttled, Losses };
const char* to_string(Behavior b);
std::optional<Behavior> behavior_from(const std::string& s);

enum class ResourceLabel { High, Low, LowOrNone };
const char* to_string(ResourceLabel r);
std::optional<ResourceLabel> resource_label_from(const std::string& s);

/// Client interactions of one phase.
struct PhaseMetrics {
    std::uint64_t n_started = 0;
    std::uint64_t n_completed = 0;
    std::uint64_t n_timed_out = 0;
    /// Answered, but not with a usable result (e.g. authentication failure).
    std::uint64_t n_failed = 0;
    std::uint64_t n_retransmissions = 0;
    /// Completions that needed at least one retransmission.
    std::uint64_t n_completed_retransmitted = 0;
    std::vector<double> completion_latencies_s;

    bool operator==(const PhaseMetrics&) const = default;
};

/// Aggregates interactions of `phase` started in [from, to).
PhaseMetrics collect_phase(const std::vector<actors::Interaction>& interactions, actors::Phase phase, SimTime from,
                           SimTime to);

struct NoInteractions {};

/// Losses when more than `loss_fraction` of started interactions did not
/// complete; else Throttled when more than `retransmit_fraction` of
/// completions needed a retransmission or the median latency exceeds the
/// base timeout; else Good.
Expected<Behavior, NoInteractions> classify_behavior(const PhaseMetrics& m, const coap::BackoffParams& backoff,
                                                     const Classification& thresholds = {});

struct EnergySummary {
    double total_drained = 0;
    double attack_attributable = 0;
    /// Key exchanges the attack-attributable drain would have paid for.
    double projected_exchanges_lost = 0;

    bool operator==(const EnergySummary&) const = default;
};

/// Sums "energy" trace events, split by whether attacker traffic caused them.
EnergySummary energy_report(const netsim::Trace& trace, double edhoc_cost);

/// High when the attack drain extrapolated to a day exceeds
/// `high_per_day` of the budget, LowOrNone when there was none.
ResourceLabel resource_label(double attack_attributable, SimTime attack_active, double budget, double high_per_day);

struct ScenarioReport {
    std::string name;
    Scenario scenario = Scenario::BaselineOpen;
    std::optional<actors::AttackKind> attack;
    std::uint64_t seed = 0;
    double duration_s = 0;

    PhaseMetrics setup;
    PhaseMetrics steady;
    EnergySummary energy;
    /// Empty when the phase had no interactions.
    std::optional<Behavior> setup_behavior;
    std::optional<Behavior> steady_behavior;
    ResourceLabel resource = ResourceLabel::LowOrNone;

    std::uint64_t rekeys = 0;
    std::uint64_t tunnel_renegotiations = 0;
    std::uint64_t events = 0;
    /// Set when the run failed; everything else is then meaningless.
    std::optional<std::string> error;

    bool operator==(const ScenarioReport&) const = default;
};

nlohmann::json to_json(const ScenarioReport& r);
Expected<ScenarioReport, std::string> report_from_json(const nlohmann::json& j);

std::string to_csv(const std::vector<ScenarioReport>& reports);
std::string to_markdown(const ScenarioReport& r);

/// Behavior label as printed in tables ("n/a" without interactions).
std::string label_of(const std::optional<Behavior>& b);

} // namespace guardsim::harness
