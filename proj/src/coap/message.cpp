/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "guardsim/coap/message.hpp"

#include <algorithm>

namespace guardsim::coap {

const char* to_string(MessageType t)
{
    switch (t) {
    case MessageType::Con: return "CON";
    case MessageType::Non: return "NON";
    case MessageType::Ack: return "ACK";
    case MessageType::Rst: return "RST";
    }
    return "?";
}

std::string Code::str() const
{
    std::string s = std::to_string(cls) + ".";
    if (detail < 10)
        s += "0";
    return s + std::to_string(detail);
}

std::size_t OscoreOption::value_length() const
{
    std::size_t n = 1 + kid.size();
    if (piv) {
        std::uint32_t v = *piv;
        std::size_t len = 1;
        while (v > 0xff) {
            v >>= 8;
            ++len;
        }
        n += len;
    }
    return n;
}

void SimMessage::set_body(Bytes b, std::size_t modeled_len)
{
    body = std::move(b);
    payload_len = std::max(body.size(), modeled_len);
}

namespace {

std::size_t options_size(const SimMessage& m)
{
    std::size_t n = 0;
    if (m.proxy_uri)
        n += 2 + m.proxy_uri->size();
    if (m.uri_host)
        n += 2 + m.uri_host->size();
    if (m.uri_path)
        n += 2 + m.uri_path->size();
    if (m.echo)
        n += 2 + m.echo->size();
    if (m.oscore)
        n += 2 + m.oscore->value_length();
    return n;
}

} // namespace

std::size_t message_size(const SimMessage& msg)
{
    return 4 + msg.token.size() + options_size(msg) + msg.payload_len;
}

std::size_t payload_for_size(const SimMessage& msg, std::size_t target)
{
    std::size_t overhead = 4 + msg.token.size() + options_size(msg);
    return target > overhead ? target - overhead : 0;
}

SimMessage make_response(const SimMessage& request, Code code)
{
    SimMessage r;
    r.src = request.dst;
    r.dst = request.src;
    r.token = request.token;
    r.code = code;
    if (request.type == MessageType::Con) {
        r.type = MessageType::Ack;
        r.mid = request.mid;
    } else {
        r.type = MessageType::Non;
    }
    return r;
}

} // namespace guardsim::coap
