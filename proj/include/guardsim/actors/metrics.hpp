/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <vector>

#include "guardsim/core/address.hpp"
#include "guardsim/core/time.hpp"

namespace guardsim::actors {

/// Key exchanges (EDHOC, including rekeys) versus requests made under an
/// established context.
enum class Phase { Setup, Steady };

const char* to_string(Phase p);

enum class InteractionResult { Completed, TimedOut, Failed };

/// One client exchange as the client experienced it.
struct Interaction {
    Phase phase = Phase::Setup;
    Address client;
    SimTime started;
    SimTime finished;
    InteractionResult result = InteractionResult::Completed;
    std::uint32_t retransmissions = 0;

    SimTime latency() const { return finished - started; }
};

/// Shared sink for client interactions and a few whole-run counters.
class Metrics {
public:
    void record(const Interaction& i) { interactions_.push_back(i); }
    const std::vector<Interaction>& interactions() const { return interactions_; }

    std::uint64_t rekeys = 0;

private:
    std::vector<Interaction> interactions_;
};

} // namespace guardsim::actors
