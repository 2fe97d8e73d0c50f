/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <optional>

namespace guardsim::sec {

enum class ReplayVerdict { Accept, Reject };

/// Sliding anti-replay window of W <= 64 sequence numbers below the highest
/// accepted one. Rejects seq <= highest - W and anything already marked.
class ReplayWindow {
public:
    explicit ReplayWindow(unsigned size = 32);

    unsigned size() const { return size_; }
    std::optional<std::uint64_t> highest() const { return highest_; }

    bool would_accept(std::uint64_t seq) const;
    void mark(std::uint64_t seq);

    /// Accepts (and marks) or rejects in one step.
    ReplayVerdict check(std::uint64_t seq);

private:
    unsigned size_;
    std::optional<std::uint64_t> highest_;
    std::uint64_t mask_ = 0;  ///< bit i set: highest - i was accepted
};

inline ReplayVerdict replay_window_check(ReplayWindow& w, std::uint64_t seq) { return w.check(seq); }

} // namespace guardsim::sec
