/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "guardsim/ace/ace_oscore.hpp"

#include <json.hpp>

#include "guardsim/sec/fnv.hpp"

namespace guardsim::ace {

namespace {

constexpr std::size_t nonce_len = 8;

Key derive_master(const Key& pop, ByteView nonce1, ByteView nonce2)
{
    Bytes material(pop.begin(), pop.end());
    append(material, nonce1);
    append(material, nonce2);
    return sec::fnv_mix_key("ace-oscore", material);
}

Bytes binary_field(const nlohmann::json& j, const char* key)
{
    const auto& b = j.at(key).get_binary();
    return Bytes(b.begin(), b.end());
}

} // namespace

const char* to_string(Rejected r)
{
    switch (r) {
    case Rejected::Malformed: return "Malformed";
    case Rejected::BadTag: return "BadTag";
    case Rejected::WrongAudience: return "WrongAudience";
    case Rejected::Expired: return "Expired";
    }
    return "?";
}

AceClientExchange::AceClientExchange(AccessToken token, const Key& pop_key, Bytes client_id, Rng& rng)
    : token_(std::move(token)), pop_key_(pop_key), client_id_(std::move(client_id)), nonce1_(rng.bytes(nonce_len))
{
}

Bytes AceClientExchange::request_body() const
{
    nlohmann::json j;
    j["access_token"] = nlohmann::json::binary(token_.serialize());
    j["nonce1"] = nlohmann::json::binary(nonce1_);
    j["id1"] = nlohmann::json::binary(client_id_);
    return nlohmann::json::to_cbor(j);
}

std::optional<sec::SecurityContext> AceClientExchange::finish(ByteView response_body) const
{
    auto j = nlohmann::json::from_cbor(response_body.begin(), response_body.end(), true, false);
    if (j.is_discarded() || !j.is_object())
        return std::nullopt;
    try {
        Bytes nonce2 = binary_field(j, "nonce2");
        Bytes server_id = binary_field(j, "id2");
        return sec::SecurityContext::derive(derive_master(pop_key_, nonce1_, nonce2), server_id, client_id_);
    } catch (const nlohmann::json::exception&) {
        return std::nullopt;
    }
}

Expected<AceServerResult, Rejected> ace_server_accept(ByteView request_body, const Verifier& verifier, Bytes server_id,
                                                      SimTime now, Rng& rng)
{
    auto j = nlohmann::json::from_cbor(request_body.begin(), request_body.end(), true, false);
    if (j.is_discarded() || !j.is_object())
        return unexpected(Rejected::Malformed);
    Bytes token_bytes, nonce1, client_id;
    try {
        token_bytes = binary_field(j, "access_token");
        nonce1 = binary_field(j, "nonce1");
        client_id = binary_field(j, "id1");
    } catch (const nlohmann::json::exception&) {
        return unexpected(Rejected::Malformed);
    }
    auto token = AccessToken::parse(token_bytes);
    if (!token)
        return unexpected(Rejected::Malformed);
    auto claims = verify_token(*token, verifier, now);
    if (!claims) {
        switch (claims.error()) {
        case InvalidToken::BadTag: return unexpected(Rejected::BadTag);
        case InvalidToken::WrongAudience: return unexpected(Rejected::WrongAudience);
        case InvalidToken::Expired: return unexpected(Rejected::Expired);
        }
    }

    Bytes nonce2 = rng.bytes(nonce_len);
    nlohmann::json reply;
    reply["nonce2"] = nlohmann::json::binary(nonce2);
    reply["id2"] = nlohmann::json::binary(server_id);

    AceServerResult out{
        sec::SecurityContext::derive(derive_master(claims->pop_key, nonce1, nonce2), client_id, server_id),
        nlohmann::json::to_cbor(reply), *claims};
    return out;
}

Expected<std::pair<sec::SecurityContext, sec::SecurityContext>, Rejected>
ace_oscore_exchange(const AccessToken& token, const Key& client_pop_key, const Verifier& verifier, SimTime now,
                    Rng& rng, Bytes client_id, Bytes server_id)
{
    AceClientExchange client(token, client_pop_key, std::move(client_id), rng);
    auto server = ace_server_accept(client.request_body(), verifier, std::move(server_id), now, rng);
    if (!server)
        return unexpected(server.error());
    auto ctx = client.finish(server->response_body);
    if (!ctx)
        return unexpected(Rejected::Malformed);
    return std::make_pair(*ctx, server->context);
}

} // namespace guardsim::ace
