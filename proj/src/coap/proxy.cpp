/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "guardsim/coap/proxy.hpp"

#include <stdexcept>

namespace guardsim::coap {

const char* to_string(ProxyError e)
{
    switch (e) {
    case ProxyError::MissingProxyUri: return "MissingProxyUri";
    case ProxyError::UnknownOrigin: return "UnknownOrigin";
    }
    return "?";
}

std::optional<ParsedUri> parse_coap_uri(const std::string& uri)
{
    static const std::string scheme = "coap://";
    if (uri.compare(0, scheme.size(), scheme) != 0)
        return std::nullopt;
    auto rest = uri.substr(scheme.size());
    auto slash = rest.find('/');
    ParsedUri out;
    out.host = rest.substr(0, slash);
    out.path = slash == std::string::npos ? "/" : rest.substr(slash);
    if (out.host.empty())
        return std::nullopt;
    return out;
}

Expected<SimMessage, ProxyError> ProxyExchangeTable::rewrite(const SimMessage& msg, ProxyMode mode, Address proxy,
                                                             const Routes& routes, SimTime now)
{
    SimMessage out = msg;
    if (mode == ProxyMode::Forward) {
        if (!msg.proxy_uri)
            return unexpected(ProxyError::MissingProxyUri);
        auto uri = parse_coap_uri(*msg.proxy_uri);
        if (!uri)
            return unexpected(ProxyError::UnknownOrigin);
        auto it = routes.find(uri->host);
        if (it == routes.end())
            return unexpected(ProxyError::UnknownOrigin);
        out.dst = it->second;
        out.proxy_uri.reset();
        // The path travels inside OSCORE when the message is protected.
        if (!msg.is_protected())
            out.uri_path = uri->path;
    } else {
        if (msg.dst != proxy)
            throw std::invalid_argument("reverse proxy rewrite requires dst == proxy");
        if (!msg.uri_host)
            return unexpected(ProxyError::UnknownOrigin);
        auto it = routes.find(*msg.uri_host);
        if (it == routes.end())
            return unexpected(ProxyError::UnknownOrigin);
        out.dst = it->second;
    }
    out.src = proxy;

    Bytes token;
    append_be(token, next_token_++, 8);
    out.token = token;
    out.mid = next_mid_++;
    if (next_mid_ == 0)
        next_mid_ = 1;

    table_[token] = ClientBinding{msg.src, msg.token, msg.mid, msg.type, now};
    return out;
}

std::optional<SimMessage> ProxyExchangeTable::restore(const SimMessage& response)
{
    auto it = table_.find(response.token);
    if (it == table_.end())
        return std::nullopt;
    const ClientBinding& b = it->second;
    SimMessage out = response;
    out.src = response.dst;
    out.dst = b.client;
    out.token = b.token;
    if (b.type == MessageType::Con) {
        out.type = MessageType::Ack;
        out.mid = b.mid;
    } else {
        out.type = MessageType::Non;
    }
    table_.erase(it);
    return out;
}

const ClientBinding* ProxyExchangeTable::find(const Bytes& proxy_token) const
{
    auto it = table_.find(proxy_token);
    return it == table_.end() ? nullptr : &it->second;
}

void ProxyExchangeTable::expire(SimTime now, SimTime max_age)
{
    for (auto it = table_.begin(); it != table_.end();) {
        if (now - it->second.created > max_age)
            it = table_.erase(it);
        else
            ++it;
    }
}

} // namespace guardsim::coap
