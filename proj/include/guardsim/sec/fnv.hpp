/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <string_view>

#include "guardsim/core/bytes.hpp"

namespace guardsim::sec {

/// Incremental 64-bit FNV-1a.
class Fnv1a64 {
public:
    static constexpr std::uint64_t offset_basis = 0xCBF29CE484222325ULL;
    static constexpr std::uint64_t prime = 0x100000001B3ULL;

    Fnv1a64& update(ByteView data)
    {
        for (auto b : data) {
            h_ ^= b;
            h_ *= prime;
        }
        return *this;
    }
    Fnv1a64& update(std::string_view s)
    {
        return update(ByteView(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
    }
    Fnv1a64& update_be(std::uint64_t v, int width)
    {
        for (int i = width - 1; i >= 0; --i) {
            h_ ^= static_cast<std::uint8_t>(v >> (8 * i));
            h_ *= prime;
        }
        return *this;
    }
    std::uint64_t digest() const { return h_; }

private:
    std::uint64_t h_ = offset_basis;
};

inline std::uint64_t fnv1a64(ByteView data) { return Fnv1a64{}.update(data).digest(); }

/// 16-byte key from two labelled FNV passes over the same input.
Key fnv_mix_key(std::string_view label, ByteView material);

} // namespace guardsim::sec
