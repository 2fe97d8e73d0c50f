/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>

#include "guardsim/core/rng.hpp"
#include "guardsim/core/time.hpp"

namespace guardsim::coap {

struct BackoffParams {
    SimTime base_timeout = SimTime::from_ms(2000);
    std::uint32_t retransmit_limit = 4;
    /// ACK_RANDOM_FACTOR; 1.0 disables jitter.
    double random_factor = 1.0;

    /// Time from first transmission until the sender gives up.
    SimTime give_up_after() const;
};

enum class TxOutcome { Pending, Completed, TimedOut };
enum class TxEvent { Sent, AckReceived, TimerFired };
enum class TxAction { None, Retransmit, GiveUp, Done };

/// Confirmable-message retransmission state.
struct TxState {
    std::uint32_t attempts = 0;
    SimTime timeout;       ///< current interval, doubles per retransmission
    SimTime next_timeout;  ///< absolute time of the pending timer
    SimTime base_timeout = SimTime::from_ms(2000);
    std::uint32_t retransmit_limit = 4;
    TxOutcome outcome = TxOutcome::Pending;
    SimTime outcome_at;

    static TxState with(const BackoffParams& p);
    bool is_final() const { return outcome != TxOutcome::Pending; }
};

class EventAfterFinal : public std::logic_error {
public:
    EventAfterFinal() : std::logic_error("transmission already completed or timed out") {}
};

/// Advances the state machine. `jitter` is consulted only on Sent, and only
/// when random_factor > 1.
std::pair<TxState, TxAction> tx_step(TxState state, SimTime now, TxEvent event, Rng* jitter = nullptr,
                                     double random_factor = 1.0);

} // namespace guardsim::coap
