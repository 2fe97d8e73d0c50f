/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "guardsim/coap/message.hpp"
#include "guardsim/core/expected.hpp"
#include "guardsim/core/time.hpp"

namespace guardsim::coap {

enum class ProxyMode { Forward, Reverse };
enum class ProxyError { MissingProxyUri, UnknownOrigin };

const char* to_string(ProxyError e);

struct ParsedUri {
    std::string host;
    std::string path;
};

/// Parses "coap://host/path". Returns nullopt for anything else.
std::optional<ParsedUri> parse_coap_uri(const std::string& uri);

/// Where a proxied request came from, so its response can be sent back.
struct ClientBinding {
    Address client;
    Bytes token;
    std::uint16_t mid = 0;
    MessageType type = MessageType::Con;
    SimTime created;
};

/// Proxy-side token/mid remapping. Every forwarded request gets a fresh
/// proxy token, so the mapping is injective over outstanding exchanges.
class ProxyExchangeTable {
public:
    /// Name -> origin address, used for Proxy-Uri hosts (forward) and
    /// Uri-Host values (reverse).
    using Routes = std::map<std::string, Address>;

    /// Rewrites a client request into a proxy-to-origin request. OSCORE option
    /// and payload are copied untouched.
    Expected<SimMessage, ProxyError> rewrite(const SimMessage& msg, ProxyMode mode, Address proxy,
                                             const Routes& routes, SimTime now);

    /// Maps an origin response back onto the client exchange; nullopt when the
    /// token is unknown. The binding is released.
    std::optional<SimMessage> restore(const SimMessage& response);

    /// Looks up the client binding without releasing it.
    const ClientBinding* find(const Bytes& proxy_token) const;
    void release(const Bytes& proxy_token) { table_.erase(proxy_token); }

    /// Drops bindings older than `max_age`.
    void expire(SimTime now, SimTime max_age);

    std::size_t outstanding() const { return table_.size(); }

private:
    std::map<Bytes, ClientBinding> table_;
    std::uint64_t next_token_ = 1;
    std::uint16_t next_mid_ = 1;
};

} // namespace guardsim::coap
