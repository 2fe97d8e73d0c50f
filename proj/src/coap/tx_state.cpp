/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "guardsim/coap/tx_state.hpp"

namespace guardsim::coap {

SimTime BackoffParams::give_up_after() const
{
    // b + 2b + ... + 2^n b
    return base_timeout * ((std::int64_t{1} << (retransmit_limit + 1)) - 1);
}

TxState TxState::with(const BackoffParams& p)
{
    TxState s;
    s.base_timeout = p.base_timeout;
    s.retransmit_limit = p.retransmit_limit;
    return s;
}

std::pair<TxState, TxAction> tx_step(TxState s, SimTime now, TxEvent event, Rng* jitter, double random_factor)
{
    if (s.is_final())
        throw EventAfterFinal();

    switch (event) {
    case TxEvent::Sent:
        s.attempts = 1;
        s.timeout = s.base_timeout;
        if (jitter && random_factor > 1.0) {
            auto extra = static_cast<std::int64_t>(static_cast<double>(s.base_timeout.ms()) * (random_factor - 1.0) *
                                                   jitter->uniform01());
            s.timeout = s.base_timeout + SimTime::from_ms(extra);
        }
        s.next_timeout = now + s.timeout;
        return {s, TxAction::None};

    case TxEvent::AckReceived:
        s.outcome = TxOutcome::Completed;
        s.outcome_at = now;
        return {s, TxAction::Done};

    case TxEvent::TimerFired:
        if (s.attempts <= s.retransmit_limit) {
            ++s.attempts;
            s.timeout = s.timeout * 2;
            s.next_timeout = now + s.timeout;
            return {s, TxAction::Retransmit};
        }
        s.outcome = TxOutcome::TimedOut;
        s.outcome_at = now;
        return {s, TxAction::GiveUp};
    }
    return {s, TxAction::None};
}

} // namespace guardsim::coap
