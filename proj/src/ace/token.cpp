/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "guardsim/ace/token.hpp"

#include <json.hpp>

#include "guardsim/sec/aead.hpp"
#include "guardsim/sec/fnv.hpp"

namespace guardsim::ace {

namespace {

void put_string(Bytes& out, const std::string& s)
{
    append_be(out, s.size(), 2);
    out.insert(out.end(), s.begin(), s.end());
}

Bytes pop_nonce(const AccessToken& t)
{
    auto h = sec::Fnv1a64{}
                 .update(t.audience)
                 .update_be(0, 1)
                 .update(t.subject_key_id)
                 .update_be(static_cast<std::uint64_t>(t.issued_at.ms()), 8)
                 .update_be(static_cast<std::uint64_t>(t.expiry.ms()), 8)
                 .digest();
    Bytes n;
    append_be(n, h, 8);
    return n;
}

std::uint64_t tag_of(const AccessToken& t, const Key& audience_key)
{
    return sec::Fnv1a64{}.update(audience_key).update(t.claims_bytes()).digest();
}

} // namespace

Bytes AccessToken::claims_bytes() const
{
    Bytes out;
    put_string(out, audience);
    put_string(out, subject_key_id);
    put_string(out, scope);
    append_be(out, static_cast<std::uint64_t>(issued_at.ms()), 8);
    append_be(out, static_cast<std::uint64_t>(expiry.ms()), 8);
    out.push_back(guard_bindings ? 1 : 0);
    if (guard_bindings) {
        put_string(out, guard_bindings->client_guard_key_id);
        put_string(out, guard_bindings->server_guard_key_id);
    }
    append_be(out, sealed_pop_key.size(), 2);
    append(out, sealed_pop_key);
    return out;
}

Bytes AccessToken::serialize() const
{
    nlohmann::json j;
    j["aud"] = audience;
    j["sub"] = subject_key_id;
    j["scope"] = scope;
    j["iat"] = issued_at.ms();
    j["exp"] = expiry.ms();
    if (guard_bindings)
        j["guards"] = {guard_bindings->client_guard_key_id, guard_bindings->server_guard_key_id};
    j["cnf"] = nlohmann::json::binary(sealed_pop_key);
    j["tag"] = tag;
    return nlohmann::json::to_cbor(j);
}

std::optional<AccessToken> AccessToken::parse(ByteView data)
{
    auto j = nlohmann::json::from_cbor(data.begin(), data.end(), true, false);
    if (j.is_discarded() || !j.is_object())
        return std::nullopt;
    try {
        AccessToken t;
        t.audience = j.at("aud").get<std::string>();
        t.subject_key_id = j.at("sub").get<std::string>();
        t.scope = j.at("scope").get<std::string>();
        t.issued_at = SimTime::from_ms(j.at("iat").get<std::int64_t>());
        t.expiry = SimTime::from_ms(j.at("exp").get<std::int64_t>());
        if (j.contains("guards")) {
            const auto& g = j.at("guards");
            t.guard_bindings = GuardBindings{g.at(0).get<std::string>(), g.at(1).get<std::string>()};
        }
        const auto& cnf = j.at("cnf").get_binary();
        t.sealed_pop_key.assign(cnf.begin(), cnf.end());
        t.tag = j.at("tag").get<std::uint64_t>();
        return t;
    } catch (const nlohmann::json::exception&) {
        return std::nullopt;
    }
}

const char* to_string(InvalidToken e)
{
    switch (e) {
    case InvalidToken::BadTag: return "BadTag";
    case InvalidToken::WrongAudience: return "WrongAudience";
    case InvalidToken::Expired: return "Expired";
    }
    return "?";
}

const char* to_string(Denied d)
{
    switch (d) {
    case Denied::UnknownSubject: return "UnknownSubject";
    case Denied::UnauthorizedAudience: return "UnauthorizedAudience";
    }
    return "?";
}

Expected<Claims, InvalidToken> verify_token(const AccessToken& token, const Verifier& verifier, SimTime now)
{
    if (token.audience != verifier.audience)
        return unexpected(InvalidToken::WrongAudience);
    if (verifier.guard_key_id &&
        (!token.guard_bindings || token.guard_bindings->server_guard_key_id != *verifier.guard_key_id))
        return unexpected(InvalidToken::WrongAudience);
    if (tag_of(token, verifier.audience_key) != token.tag)
        return unexpected(InvalidToken::BadTag);
    if (now >= token.expiry)
        return unexpected(InvalidToken::Expired);

    auto pop = sec::aead_open(verifier.audience_key, pop_nonce(token), to_bytes("pop"), token.sealed_pop_key);
    if (!pop || pop->size() != sizeof(Key))
        return unexpected(InvalidToken::BadTag);

    Claims c;
    c.audience = token.audience;
    c.subject_key_id = token.subject_key_id;
    c.scope = token.scope;
    c.expiry = token.expiry;
    c.guard_bindings = token.guard_bindings;
    std::copy(pop->begin(), pop->end(), c.pop_key.begin());
    return c;
}

void AsRegistry::add_subject(const std::string& key_id, std::set<std::string> audiences)
{
    auto& s = subjects_[key_id];
    s.insert(audiences.begin(), audiences.end());
}

void AsRegistry::authorize(const std::string& key_id, const std::string& audience)
{
    subjects_[key_id].insert(audience);
}

bool AsRegistry::is_authorized(const std::string& key_id, const std::string& audience) const
{
    auto it = subjects_.find(key_id);
    return it != subjects_.end() && it->second.count(audience) > 0;
}

const Key* AsRegistry::audience_key(const std::string& audience) const
{
    auto it = audience_keys_.find(audience);
    return it == audience_keys_.end() ? nullptr : &it->second;
}

Expected<IssuedToken, Denied> AsRegistry::issue_token(const TokenRequest& request, SimTime now, Rng& rng)
{
    if (!knows_subject(request.subject_key_id))
        return unexpected(Denied::UnknownSubject);
    const Key* tag_key = audience_key(request.audience);
    if (!tag_key || !is_authorized(request.subject_key_id, request.audience))
        return unexpected(Denied::UnauthorizedAudience);

    AccessToken t;
    t.audience = request.audience;
    t.subject_key_id = request.subject_key_id;
    t.scope = request.scope;
    t.issued_at = now;
    t.expiry = now + lifetime_;
    if (request.guard_bindings) {
        const auto& guard = request.guard_bindings->client_guard_key_id;
        if (!knows_subject(guard))
            return unexpected(Denied::UnknownSubject);
        t.guard_bindings = request.guard_bindings;
        t.subject_key_id = guard;
        authorize(guard, request.audience);
    }

    IssuedToken out;
    for (auto& b : out.pop_key)
        b = static_cast<std::uint8_t>(rng.next_u64());
    t.sealed_pop_key = sec::aead_seal(*tag_key, pop_nonce(t), to_bytes("pop"), out.pop_key);
    t.tag = tag_of(t, *tag_key);
    out.token = std::move(t);
    return out;
}

} // namespace guardsim::ace
