/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "guardsim/core/bytes.hpp"
#include "guardsim/core/expected.hpp"
#include "guardsim/core/rng.hpp"
#include "guardsim/core/time.hpp"

namespace guardsim::ace {

/// Guard proxy keys named by a client when asking for a token on behalf of
/// its guard.
struct GuardBindings {
    std::string client_guard_key_id;
    std::string server_guard_key_id;

    bool operator==(const GuardBindings&) const = default;
};

/// Self-contained access token. The proof-of-possession key travels sealed
/// under the audience key; everything else is readable by anyone.
struct AccessToken {
    std::string audience;
    std::string subject_key_id;
    std::string scope;
    SimTime issued_at;
    SimTime expiry;
    std::optional<GuardBindings> guard_bindings;
    Bytes sealed_pop_key;
    std::uint64_t tag = 0;

    /// Canonical bytes covered by the tag.
    Bytes claims_bytes() const;

    /// Transport encoding (CBOR map).
    Bytes serialize() const;
    static std::optional<AccessToken> parse(ByteView data);

    bool operator==(const AccessToken&) const = default;
};

struct Claims {
    std::string audience;
    std::string subject_key_id;
    std::string scope;
    SimTime expiry;
    std::optional<GuardBindings> guard_bindings;
    Key pop_key{};
};

enum class InvalidToken { BadTag, WrongAudience, Expired };
const char* to_string(InvalidToken e);

/// What a token verifier knows: who it is and the key its AS tags tokens
/// with. A guard verifying tunnel tokens also checks the server-guard binding.
struct Verifier {
    std::string audience;
    Key audience_key{};
    std::optional<std::string> guard_key_id;
};

/// Checks audience, then tag, then expiry (expired when now >= expiry).
Expected<Claims, InvalidToken> verify_token(const AccessToken& token, const Verifier& verifier, SimTime now);

enum class Denied { UnknownSubject, UnauthorizedAudience };
const char* to_string(Denied d);

struct TokenRequest {
    std::string subject_key_id;
    std::string audience;
    std::optional<GuardBindings> guard_bindings;
    std::string scope = "rw";
};

struct IssuedToken {
    AccessToken token;
    Key pop_key{};
};

/// Authorization server state.
class AsRegistry {
public:
    explicit AsRegistry(SimTime lifetime = SimTime::from_seconds(3600)) : lifetime_(lifetime) {}

    void add_subject(const std::string& key_id, std::set<std::string> audiences = {});
    void authorize(const std::string& key_id, const std::string& audience);
    void add_audience(const std::string& audience, const Key& tag_key) { audience_keys_[audience] = tag_key; }

    bool knows_subject(const std::string& key_id) const { return subjects_.count(key_id) > 0; }
    bool is_authorized(const std::string& key_id, const std::string& audience) const;
    const Key* audience_key(const std::string& audience) const;

    /// Issues a token for an authorized (subject, audience) pair. With guard
    /// bindings, the token is bound to the client guard's key, and that key
    /// becomes authorized for the audience.
    Expected<IssuedToken, Denied> issue_token(const TokenRequest& request, SimTime now, Rng& rng);

private:
    SimTime lifetime_;
    std::map<std::string, std::set<std::string>> subjects_;
    std::map<std::string, Key> audience_keys_;
};

} // namespace guardsim::ace
