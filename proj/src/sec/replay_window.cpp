/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "guardsim/sec/replay_window.hpp"

#include <stdexcept>

namespace guardsim::sec {

ReplayWindow::ReplayWindow(unsigned size) : size_(size)
{
    if (size == 0 || size > 64)
        throw std::invalid_argument("replay window size must be in 1..64");
}

bool ReplayWindow::would_accept(std::uint64_t seq) const
{
    if (!highest_ || seq > *highest_)
        return true;
    std::uint64_t diff = *highest_ - seq;
    if (diff >= size_)
        return false;
    return (mask_ >> diff & 1U) == 0;
}

void ReplayWindow::mark(std::uint64_t seq)
{
    if (!highest_) {
        highest_ = seq;
        mask_ = 1;
        return;
    }
    if (seq > *highest_) {
        std::uint64_t shift = seq - *highest_;
        mask_ = shift >= 64 ? 0 : mask_ << shift;
        mask_ |= 1;
        highest_ = seq;
        return;
    }
    std::uint64_t diff = *highest_ - seq;
    if (diff < 64)
        mask_ |= std::uint64_t{1} << diff;
}

ReplayVerdict ReplayWindow::check(std::uint64_t seq)
{
    if (!would_accept(seq))
        return ReplayVerdict::Reject;
    mark(seq);
    return ReplayVerdict::Accept;
}

} // namespace guardsim::sec
