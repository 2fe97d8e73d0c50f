/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace guardsim {

/// Network address of a simulated node. Addresses that belong to no node are
/// legal (spoofed sources) and are unroutable.
struct Address {
    std::uint32_t value = 0;

    constexpr auto operator<=>(const Address&) const = default;
    std::string str() const { return "n" + std::to_string(value); }
};

} // namespace guardsim
