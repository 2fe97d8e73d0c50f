/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include "guardsim/core/bytes.hpp"
#include "guardsim/core/expected.hpp"

namespace guardsim::sec {

enum class AeadError { AuthError };

/// Authenticated cipher interface. Output of seal is ciphertext || tag.
class Aead {
public:
    virtual ~Aead() = default;
    virtual std::size_t tag_size() const = 0;
    virtual Bytes seal(const Key& key, ByteView nonce, ByteView aad, ByteView plaintext) const = 0;
    virtual Expected<Bytes, AeadError> open(const Key& key, ByteView nonce, ByteView aad, ByteView sealed) const = 0;
};

/// Deterministic FNV-1a stream cipher with an 8-byte tag. Simulation-grade
/// only: it is trivially breakable and must never protect real data.
///   keystream block j = FNV1a64(key || nonce || be64(j))
///   tag               = FNV1a64(key || nonce || aad || plaintext)
class ToyAead final : public Aead {
public:
    static constexpr std::size_t tag_bytes = 8;

    std::size_t tag_size() const override { return tag_bytes; }
    Bytes seal(const Key& key, ByteView nonce, ByteView aad, ByteView plaintext) const override;
    Expected<Bytes, AeadError> open(const Key& key, ByteView nonce, ByteView aad, ByteView sealed) const override;
};

const Aead& default_aead();

inline Bytes aead_seal(const Key& key, ByteView nonce, ByteView aad, ByteView plaintext)
{
    return default_aead().seal(key, nonce, aad, plaintext);
}

inline Expected<Bytes, AeadError> aead_open(const Key& key, ByteView nonce, ByteView aad, ByteView sealed)
{
    return default_aead().open(key, nonce, aad, sealed);
}

} // namespace guardsim::sec
