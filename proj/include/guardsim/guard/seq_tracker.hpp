/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>

#include "guardsim/core/address.hpp"
#include "guardsim/core/bytes.hpp"

namespace guardsim::guard {

enum class SeqVerdict { Plausible, ImplausibleJump, Conflict, KnownMobile };
const char* to_string(SeqVerdict v);

/// Sequence numbers observed per OSCORE kid. Remembers which CoAP token each
/// recent piv was used with (the newest `window` values) and from which
/// sources the context was seen.
///
/// Verdicts, in order:
///   - unknown kid: Plausible
///   - piv at or below highest - window (no longer remembered): Conflict
///   - piv remembered under another token: Conflict
///   - piv remembered under the same token: Plausible
///   - piv > highest + jump_threshold: ImplausibleJump
///   - source never seen with this kid: KnownMobile
///   - otherwise Plausible
class SeqTracker {
public:
    explicit SeqTracker(std::uint32_t jump_threshold = 128, std::uint32_t window = 64)
        : jump_threshold_(jump_threshold), window_(window)
    {
    }

    SeqVerdict check(const Bytes& kid, std::uint32_t piv, const Bytes& token, Address source) const;
    void record(const Bytes& kid, std::uint32_t piv, const Bytes& token, Address source);

    bool knows(const Bytes& kid) const { return contexts_.count(kid) > 0; }
    std::optional<std::uint32_t> highest(const Bytes& kid) const;
    std::size_t remembered(const Bytes& kid) const;

    std::uint32_t jump_threshold() const { return jump_threshold_; }
    std::uint32_t window() const { return window_; }

private:
    struct Context {
        std::uint32_t highest = 0;
        std::map<std::uint32_t, Bytes> seen;
        std::set<Address> sources;
    };
    std::uint32_t jump_threshold_;
    std::uint32_t window_;
    std::map<Bytes, Context> contexts_;
};

/// Checks and, for Plausible and KnownMobile, records in one step.
SeqVerdict seq_check(SeqTracker& tracker, const Bytes& kid, std::uint32_t piv, const Bytes& token, Address source);

} // namespace guardsim::guard
