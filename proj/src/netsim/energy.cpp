/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "guardsim/netsim/energy.hpp"

#include <algorithm>

namespace guardsim::netsim {

const char* to_string(EnergyCause c)
{
    switch (c) {
    case EnergyCause::RxBytes: return "rx_bytes";
    case EnergyCause::MsgProcessed: return "msg";
    case EnergyCause::EdhocRun: return "edhoc";
    case EnergyCause::OscoreVerify: return "oscore_verify";
    }
    return "?";
}

double EnergyBudget::cost_of(const EnergyEvent& e) const
{
    switch (e.cause) {
    case EnergyCause::RxBytes: return costs_.per_rx_byte * e.quantity;
    case EnergyCause::MsgProcessed: return costs_.per_msg;
    case EnergyCause::EdhocRun: return costs_.edhoc * e.quantity;
    case EnergyCause::OscoreVerify: return costs_.oscore_verify;
    }
    return 0.0;
}

double EnergyBudget::drain(const EnergyEvent& e)
{
    double cost = std::max(0.0, cost_of(e));
    double taken = std::min(cost, remaining_);
    remaining_ -= taken;
    if (remaining_ <= 0.0) {
        remaining_ = 0.0;
        exhausted_ = true;
    }
    return taken;
}

} // namespace guardsim::netsim
