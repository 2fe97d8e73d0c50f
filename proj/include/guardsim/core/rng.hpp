/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cmath>
#include <cstdint>

#include "guardsim/core/bytes.hpp"

namespace guardsim {

/// SplitMix64. Every stochastic choice in a run draws from one of these, so a
/// seed fixes the whole trace.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

    std::uint64_t next_u64()
    {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, bound). bound must be > 0.
    std::uint64_t uniform(std::uint64_t bound) { return next_u64() % bound; }

    /// Uniform in [0, 1).
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Exponential variate with the given rate (events per unit).
    double exponential(double rate) { return -std::log(1.0 - uniform01()) / rate; }

    Bytes bytes(std::size_t n)
    {
        Bytes out(n);
        for (auto& b : out)
            b = static_cast<std::uint8_t>(next_u64());
        return out;
    }

    /// Independent child stream, used to give each actor its own sequence.
    Rng fork() { return Rng(next_u64()); }

    std::uint64_t state() const { return state_; }

private:
    std::uint64_t state_;
};

} // namespace guardsim
