/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <utility>

#include "guardsim/ace/token.hpp"
#include "guardsim/sec/oscore.hpp"

namespace guardsim::ace {

/// Client half of the token-to-context exchange: POST token + nonce1 + id1,
/// receive nonce2 + id2.
class AceClientExchange {
public:
    AceClientExchange(AccessToken token, const Key& pop_key, Bytes client_id, Rng& rng);

    Bytes request_body() const;
    /// Derives the context from the server's reply; nullopt if malformed.
    std::optional<sec::SecurityContext> finish(ByteView response_body) const;

private:
    AccessToken token_;
    Key pop_key_;
    Bytes client_id_;
    Bytes nonce1_;
};

struct AceServerResult {
    sec::SecurityContext context;
    Bytes response_body;
    Claims claims;
};

enum class Rejected { Malformed, BadTag, WrongAudience, Expired };
const char* to_string(Rejected r);

/// Server half: verifies the posted token and derives the context. The
/// server never talks to the AS here.
Expected<AceServerResult, Rejected> ace_server_accept(ByteView request_body, const Verifier& verifier, Bytes server_id,
                                                      SimTime now, Rng& rng);

/// Runs both halves directly. The client uses `client_pop_key`, which differs
/// from the token's bound key when an attacker replays a captured token.
Expected<std::pair<sec::SecurityContext, sec::SecurityContext>, Rejected>
ace_oscore_exchange(const AccessToken& token, const Key& client_pop_key, const Verifier& verifier, SimTime now,
                    Rng& rng, Bytes client_id = {0x01}, Bytes server_id = {0x02});

} // namespace guardsim::ace
