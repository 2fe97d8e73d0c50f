/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstddef>

namespace guardsim::netsim {

struct EnergyCosts {
    double budget = 50000.0;
    double per_rx_byte = 0.00002;
    double per_msg = 0.002;
    double edhoc = 1.0;
    double oscore_verify = 0.01;
    /// Share of an EDHOC run paid by a responder that answered message 1 but
    /// never saw message 3.
    double edhoc_abort_fraction = 0.5;
};

enum class EnergyCause { RxBytes, MsgProcessed, EdhocRun, OscoreVerify };

const char* to_string(EnergyCause c);

/// One chargeable event. `quantity` is bytes for RxBytes, the fraction of a
/// full handshake for EdhocRun, and ignored otherwise.
struct EnergyEvent {
    EnergyCause cause;
    double quantity = 1.0;

    static EnergyEvent rx_bytes(std::size_t n) { return {EnergyCause::RxBytes, static_cast<double>(n)}; }
    static EnergyEvent msg() { return {EnergyCause::MsgProcessed, 1.0}; }
    static EnergyEvent edhoc(double fraction = 1.0) { return {EnergyCause::EdhocRun, fraction}; }
    static EnergyEvent oscore_verify() { return {EnergyCause::OscoreVerify, 1.0}; }
};

class EnergyBudget {
public:
    EnergyBudget() : EnergyBudget(EnergyCosts{}) {}
    explicit EnergyBudget(const EnergyCosts& c) : costs_(c), remaining_(c.budget) {}

    double remaining() const { return remaining_; }
    bool exhausted() const { return exhausted_; }
    const EnergyCosts& costs() const { return costs_; }

    double cost_of(const EnergyEvent& e) const;

    /// Charges the event, floored at zero. Returns the amount actually drained.
    double drain(const EnergyEvent& e);

private:
    EnergyCosts costs_;
    double remaining_;
    bool exhausted_ = false;
};

} // namespace guardsim::netsim
