/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "guardsim/guard/setup.hpp"

#include <json.hpp>

#include "guardsim/netsim/world.hpp"

namespace guardsim::guard {

using nlohmann::json;

namespace {

json entry_json(const RendezvousEntry& e)
{
    json j;
    j["name"] = e.name;
    j["addr"] = e.address.value;
    if (e.proxy_address)
        j["proxy"] = e.proxy_address->value;
    if (e.server_guard_key_id)
        j["sgp"] = *e.server_guard_key_id;
    if (e.as_hint)
        j["as"] = e.as_hint->value;
    if (e.audience)
        j["aud"] = *e.audience;
    return j;
}

RendezvousEntry entry_from(const json& j)
{
    RendezvousEntry e;
    e.name = j.at("name").get<std::string>();
    e.address = Address{j.at("addr").get<std::uint32_t>()};
    if (j.contains("proxy"))
        e.proxy_address = Address{j["proxy"].get<std::uint32_t>()};
    if (j.contains("sgp"))
        e.server_guard_key_id = j["sgp"].get<std::string>();
    if (j.contains("as"))
        e.as_hint = Address{j["as"].get<std::uint32_t>()};
    if (j.contains("aud"))
        e.audience = j["aud"].get<std::string>();
    return e;
}

template <class T, class F>
std::optional<T> decode_with(ByteView body, F&& f)
{
    // f may throw on missing or mistyped fields, or return nullopt itself.
    auto j = json::from_cbor(body.begin(), body.end(), true, false);
    if (j.is_discarded() || !j.is_object())
        return std::nullopt;
    try {
        return std::optional<T>(f(j));
    } catch (const json::exception&) {
        return std::nullopt;
    }
}

} // namespace

Bytes encode(const RendezvousEntry& e) { return json::to_cbor(entry_json(e)); }

std::optional<RendezvousEntry> decode_rendezvous_entry(ByteView body)
{
    return decode_with<RendezvousEntry>(body, [](const json& j) { return entry_from(j); });
}

Bytes encode(const OnboardRequest& r)
{
    json j;
    j["name"] = r.server_name;
    j["server"] = r.server.value;
    if (r.accept) {
        j["as_key"] = json::binary(Bytes(r.accept->as_key.begin(), r.accept->as_key.end()));
        j["aud"] = r.accept->audience;
        j["as"] = r.accept->as_address.value;
    }
    return json::to_cbor(j);
}

std::optional<OnboardRequest> decode_onboard_request(ByteView body)
{
    return decode_with<OnboardRequest>(body, [](const json& j) -> std::optional<OnboardRequest> {
        OnboardRequest r;
        r.server_name = j.at("name").get<std::string>();
        r.server = Address{j.at("server").get<std::uint32_t>()};
        if (j.contains("as_key")) {
            AcceptedAs a;
            const auto& k = j["as_key"].get_binary();
            if (k.size() != a.as_key.size())
                return std::nullopt;
            std::copy(k.begin(), k.end(), a.as_key.begin());
            a.audience = j.at("aud").get<std::string>();
            a.as_address = Address{j.at("as").get<std::uint32_t>()};
            r.accept = a;
        }
        return r;
    });
}

Bytes encode(const GuardAnnouncement& a)
{
    json j;
    j["key"] = a.guard_key_id;
    j["proxy"] = a.proxy_address.value;
    return json::to_cbor(j);
}

std::optional<GuardAnnouncement> decode_guard_announcement(ByteView body)
{
    return decode_with<GuardAnnouncement>(body, [](const json& j) {
        return GuardAnnouncement{j.at("key").get<std::string>(), Address{j.at("proxy").get<std::uint32_t>()}};
    });
}

Bytes encode(const ClientMetadata& m)
{
    json j;
    j["entry"] = entry_json(m.entry);
    j["as"] = m.as_address.value;
    return json::to_cbor(j);
}

std::optional<ClientMetadata> decode_client_metadata(ByteView body)
{
    return decode_with<ClientMetadata>(body, [](const json& j) {
        return ClientMetadata{entry_from(j.at("entry")), Address{j.at("as").get<std::uint32_t>()}};
    });
}

void record_setup_step(netsim::World& w, int step, Address node, netsim::JsonFields detail)
{
    netsim::JsonFields d;
    d.add("step", step);
    auto extra = detail.str();
    if (extra.size() > 2)
        d.add_raw("info", extra);
    w.trace().record(w.now(), "setup_step", w.name_of(node), d);
}

} // namespace guardsim::guard
