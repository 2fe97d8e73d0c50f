/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <compare>
#include <cstdint>
#include <limits>

namespace guardsim {

/// Simulated time as fixed-point milliseconds. Used for instants and durations.
class SimTime {
public:
    constexpr SimTime() = default;

    static constexpr SimTime from_ms(std::int64_t ms) { return SimTime{ms}; }
    static constexpr SimTime from_seconds(double s)
    {
        return SimTime{static_cast<std::int64_t>(s * 1000.0 + (s >= 0 ? 0.5 : -0.5))};
    }
    static constexpr SimTime max() { return SimTime{std::numeric_limits<std::int64_t>::max()}; }

    constexpr std::int64_t ms() const { return ms_; }
    constexpr double seconds() const { return static_cast<double>(ms_) / 1000.0; }

    constexpr auto operator<=>(const SimTime&) const = default;

    constexpr SimTime operator+(SimTime o) const { return SimTime{ms_ + o.ms_}; }
    constexpr SimTime operator-(SimTime o) const { return SimTime{ms_ - o.ms_}; }
    constexpr SimTime operator*(std::int64_t k) const { return SimTime{ms_ * k}; }
    constexpr SimTime& operator+=(SimTime o)
    {
        ms_ += o.ms_;
        return *this;
    }

private:
    constexpr explicit SimTime(std::int64_t ms) : ms_(ms) {}
    std::int64_t ms_ = 0;
};

namespace literals {
constexpr SimTime operator""_ms(unsigned long long v) { return SimTime::from_ms(static_cast<std::int64_t>(v)); }
constexpr SimTime operator""_s(unsigned long long v) { return SimTime::from_ms(static_cast<std::int64_t>(v) * 1000); }
} // namespace literals

} // namespace guardsim
