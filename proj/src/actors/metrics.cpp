/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "guardsim/actors/metrics.hpp"

namespace guardsim::actors {

const char* to_string(Phase p) { return p == Phase::Setup ? "setup" : "steady"; }

} // namespace guardsim::actors
