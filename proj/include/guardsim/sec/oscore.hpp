/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>

#include "guardsim/coap/message.hpp"
#include "guardsim/core/expected.hpp"
#include "guardsim/sec/aead.hpp"
#include "guardsim/sec/replay_window.hpp"

namespace guardsim::sec {

inline constexpr std::uint32_t max_sequence_number = 1u << 23;

enum class OscoreError { SeqExhausted, ReplayError, AuthError, UnknownKid, NotProtected, Malformed };

const char* to_string(OscoreError e);

struct SecurityContext {
    Bytes sender_id;     ///< kid placed on our requests
    Bytes recipient_id;  ///< kid expected on the peer's requests
    Key master_key{};
    std::uint32_t sender_seq = 0;
    ReplayWindow replay_window{32};

    Key sender_key{};
    Key recipient_key{};

    static SecurityContext derive(const Key& master, Bytes sender_id, Bytes recipient_id, unsigned window = 32);
};

/// Identifies the request a response must be bound to.
struct RequestBinding {
    Bytes kid;
    std::uint32_t piv = 0;

    bool operator==(const RequestBinding&) const = default;
};

/// Protects a request. The result exposes OscoreOption(kid, piv) plus the
/// outer proxy-relevant fields; code, Uri-Path and payload are sealed.
Expected<coap::SimMessage, OscoreError> oscore_protect(SecurityContext& ctx, const coap::SimMessage& inner,
                                                       const Aead& aead = default_aead());

/// Protects a response bound to `request`.
coap::SimMessage oscore_protect_response(const SecurityContext& ctx, const coap::SimMessage& inner,
                                         const RequestBinding& request, const Aead& aead = default_aead());

struct UnprotectedRequest {
    coap::SimMessage inner;
    RequestBinding binding;
};

/// Verifies a request under ctx. Replay window is updated only on success.
Expected<UnprotectedRequest, OscoreError> oscore_unprotect(SecurityContext& ctx, const coap::SimMessage& msg,
                                                           const Aead& aead = default_aead());

Expected<coap::SimMessage, OscoreError> oscore_unprotect_response(const SecurityContext& ctx,
                                                                  const coap::SimMessage& msg,
                                                                  const RequestBinding& request,
                                                                  const Aead& aead = default_aead());

/// Binding of an already protected request (its outer kid and piv).
RequestBinding binding_of(const coap::SimMessage& protected_request);

} // namespace guardsim::sec
