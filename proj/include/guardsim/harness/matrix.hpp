/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <string>
#include <vector>

#include "guardsim/harness/report.hpp"

namespace guardsim::harness {

struct MatrixReport {
    std::vector<ScenarioReport> cells;  ///< in configuration order

    bool any_errored() const;
    const ScenarioReport* find(Scenario s, std::optional<actors::AttackKind> attack) const;
};

/// Runs every cell; independent worlds run on up to `threads` threads.
/// A cell that throws is kept with its error set.
MatrixReport run_matrix(const std::vector<ScenarioConfig>& cells, unsigned threads = 0);

nlohmann::json to_json(const MatrixReport& m);

/// One column per cell and one row per label, followed by raw metrics.
std::string to_markdown(const MatrixReport& m);

} // namespace guardsim::harness
