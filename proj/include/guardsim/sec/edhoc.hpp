/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <optional>
#include <utility>

#include "guardsim/core/expected.hpp"
#include "guardsim/core/rng.hpp"
#include "guardsim/netsim/energy.hpp"
#include "guardsim/sec/oscore.hpp"

namespace guardsim::sec {

enum class EdhocRole { Initiator, Responder };
enum class EdhocError { Malformed, AuthFailed, WrongState, HandshakeTimeout };

const char* to_string(EdhocError e);

/// Frame sizes of the three handshake messages on the wire.
struct EdhocSizes {
    std::size_t message1 = 40;
    std::size_t message2 = 120;
    std::size_t message3 = 90;
};

/// Three-message Diffie-Hellman handshake producing an OSCORE context.
/// The group is the multiplicative group mod 2^61-1; toy strength only.
///
/// Message 2 carries a responder handle rather than C_R: the responder
/// assigns its OSCORE recipient id only once the handshake completes, in the
/// reply to message 3. Half-open handshakes therefore never consume ids.
///
/// step counts processed handshake messages; derived_context() is present
/// iff step() == 3.
class EdhocSession {
public:
    static EdhocSession initiator(Rng& rng);
    static EdhocSession responder(Rng& rng);

    EdhocRole role() const { return role_; }
    int step() const { return step_; }
    const std::optional<SecurityContext>& derived_context() const { return context_; }
    std::uint32_t handle() const { return handle_; }

    /// Initiator: message 1 body (C_I || G_X).
    Expected<Bytes, EdhocError> message1();
    /// Responder: consumes message 1, returns message 2 body (handle || G_Y || MAC_2).
    Expected<Bytes, EdhocError> handle_message1(ByteView body, std::uint32_t handle);
    /// Initiator: consumes message 2, returns message 3 body (handle || MAC_3).
    Expected<Bytes, EdhocError> handle_message2(ByteView body);
    /// Responder: consumes message 3, assigns recipient id `c_r`, derives the
    /// context and returns the completion body (C_R).
    Expected<Bytes, EdhocError> handle_message3(ByteView body, Bytes c_r);
    /// Initiator: consumes the completion body and derives the context.
    Expected<Bytes, EdhocError> handle_completion(ByteView body);

    static std::uint32_t handle_of_message3(ByteView body);

private:
    EdhocSession(EdhocRole role, std::uint64_t secret, std::uint8_t c_i);
    void derive_master();

    EdhocRole role_;
    int step_ = 0;
    std::uint64_t ephemeral_secret_;
    std::uint64_t own_public_;
    std::uint64_t peer_public_ = 0;
    std::uint8_t c_i_;
    std::uint32_t handle_ = 0;
    Key master_{};
    std::optional<SecurityContext> context_;
};

/// Runs the handshake directly (no network) between two fresh sessions,
/// charging the responder's budget the way the simulated server does:
/// the abort fraction on message 1, the remainder on message 3.
Expected<std::pair<SecurityContext, SecurityContext>, EdhocError>
edhoc_run(Rng& rng, Bytes c_r, netsim::EnergyBudget* responder_budget = nullptr);

} // namespace guardsim::sec
