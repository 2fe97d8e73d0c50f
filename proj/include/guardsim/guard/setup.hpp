/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <optional>
#include <string>

#include "guardsim/core/address.hpp"
#include "guardsim/core/bytes.hpp"
#include "guardsim/netsim/trace.hpp"

namespace guardsim::netsim {
class World;
}

namespace guardsim::guard {

/// Resource paths of the setup and data exchanges.
namespace paths {
inline constexpr const char* onboard = "/onboard";          // server -> its guard
inline constexpr const char* guard_info = "/guard";         // device <- its guard
inline constexpr const char* rd = "/rd";                    // registration and lookup
inline constexpr const char* token = "/token";              // AS token endpoint
inline constexpr const char* metadata = "/proxy-metadata";  // client -> its guard
inline constexpr const char* authz_info = "/authz-info";    // ACE token upload
inline constexpr const char* tunnel = "/tunnel";
inline constexpr const char* edhoc = "/edhoc";
inline constexpr const char* sensor = "/sensor";
} // namespace paths

/// What a server publishes at the rendezvous point.
struct RendezvousEntry {
    std::string name;
    Address address;
    std::optional<Address> proxy_address;
    std::optional<std::string> server_guard_key_id;
    std::optional<Address> as_hint;
    std::optional<std::string> audience;

    bool operator==(const RendezvousEntry&) const = default;
};

Bytes encode(const RendezvousEntry& e);
std::optional<RendezvousEntry> decode_rendezvous_entry(ByteView body);

/// AS a server accepts clients through.
struct AcceptedAs {
    Key as_key{};
    std::string audience;
    Address as_address;

    bool operator==(const AcceptedAs&) const = default;
};

/// Server asking its guard to proxy for it.
struct OnboardRequest {
    std::string server_name;
    Address server;
    std::optional<AcceptedAs> accept;

    bool operator==(const OnboardRequest&) const = default;
};

Bytes encode(const OnboardRequest& r);
std::optional<OnboardRequest> decode_onboard_request(ByteView body);

/// A guard introducing itself to a device on its network.
struct GuardAnnouncement {
    std::string guard_key_id;
    Address proxy_address;

    bool operator==(const GuardAnnouncement&) const = default;
};

Bytes encode(const GuardAnnouncement& a);
std::optional<GuardAnnouncement> decode_guard_announcement(ByteView body);

/// Client telling its guard about a server it is about to use.
struct ClientMetadata {
    RendezvousEntry entry;
    Address as_address;

    bool operator==(const ClientMetadata&) const = default;
};

Bytes encode(const ClientMetadata& m);
std::optional<ClientMetadata> decode_client_metadata(ByteView body);

/// Records a "setup_step" trace event for the numbered guard setup steps.
void record_setup_step(netsim::World& w, int step, Address node, netsim::JsonFields detail = {});

} // namespace guardsim::guard
