/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "guardsim/ace/as_protocol.hpp"

#include <json.hpp>

namespace guardsim::ace {

using nlohmann::json;

Bytes encode_token_request(const TokenRequest& r)
{
    json j;
    j["sub"] = r.subject_key_id;
    j["aud"] = r.audience;
    j["scope"] = r.scope;
    if (r.guard_bindings)
        j["guards"] = {r.guard_bindings->client_guard_key_id, r.guard_bindings->server_guard_key_id};
    return json::to_cbor(j);
}

std::optional<TokenRequest> decode_token_request(ByteView body)
{
    auto j = json::from_cbor(body.begin(), body.end(), true, false);
    if (j.is_discarded() || !j.is_object())
        return std::nullopt;
    try {
        TokenRequest r;
        r.subject_key_id = j.at("sub").get<std::string>();
        r.audience = j.at("aud").get<std::string>();
        r.scope = j.at("scope").get<std::string>();
        if (j.contains("guards"))
            r.guard_bindings = GuardBindings{j["guards"].at(0).get<std::string>(), j["guards"].at(1).get<std::string>()};
        return r;
    } catch (const json::exception&) {
        return std::nullopt;
    }
}

Bytes encode_issued_token(const IssuedToken& t)
{
    json j;
    j["access_token"] = json::binary(t.token.serialize());
    j["cnf"] = json::binary(Bytes(t.pop_key.begin(), t.pop_key.end()));
    return json::to_cbor(j);
}

std::optional<IssuedToken> decode_issued_token(ByteView body)
{
    auto j = json::from_cbor(body.begin(), body.end(), true, false);
    if (j.is_discarded() || !j.is_object())
        return std::nullopt;
    try {
        const auto& tb = j.at("access_token").get_binary();
        auto token = AccessToken::parse(Bytes(tb.begin(), tb.end()));
        const auto& key = j.at("cnf").get_binary();
        if (!token || key.size() != sizeof(Key))
            return std::nullopt;
        IssuedToken out;
        out.token = *token;
        std::copy(key.begin(), key.end(), out.pop_key.begin());
        return out;
    } catch (const json::exception&) {
        return std::nullopt;
    }
}

} // namespace guardsim::ace
