/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "guardsim/sec/aead.hpp"

#include "guardsim/sec/fnv.hpp"

namespace guardsim::sec {

Key fnv_mix_key(std::string_view label, ByteView material)
{
    Key k{};
    for (int half = 0; half < 2; ++half) {
        auto h = Fnv1a64{}.update(label).update_be(static_cast<std::uint64_t>(half), 1).update(material).digest();
        for (int i = 0; i < 8; ++i)
            k[static_cast<std::size_t>(half * 8 + i)] = static_cast<std::uint8_t>(h >> (56 - 8 * i));
    }
    return k;
}

namespace {

std::uint64_t tag_of(const Key& key, ByteView nonce, ByteView aad, ByteView plaintext)
{
    return Fnv1a64{}.update(key).update(nonce).update(aad).update(plaintext).digest();
}

void apply_keystream(const Key& key, ByteView nonce, Bytes& data)
{
    std::uint64_t block = 0;
    std::uint64_t word = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (i % 8 == 0)
            word = Fnv1a64{}.update(key).update(nonce).update_be(block++, 8).digest();
        data[i] ^= static_cast<std::uint8_t>(word >> (56 - 8 * (i % 8)));
    }
}

} // namespace

Bytes ToyAead::seal(const Key& key, ByteView nonce, ByteView aad, ByteView plaintext) const
{
    Bytes out(plaintext.begin(), plaintext.end());
    apply_keystream(key, nonce, out);
    append_be(out, tag_of(key, nonce, aad, plaintext), 8);
    return out;
}

Expected<Bytes, AeadError> ToyAead::open(const Key& key, ByteView nonce, ByteView aad, ByteView sealed) const
{
    if (sealed.size() < tag_bytes)
        return unexpected(AeadError::AuthError);
    Bytes pt(sealed.begin(), sealed.end() - tag_bytes);
    apply_keystream(key, nonce, pt);
    std::uint64_t tag = read_be(sealed.subspan(sealed.size() - tag_bytes));
    if (tag != tag_of(key, nonce, aad, pt))
        return unexpected(AeadError::AuthError);
    return pt;
}

const Aead& default_aead()
{
    static const ToyAead instance;
    return instance;
}

} // namespace guardsim::sec
