/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include "guardsim/core/address.hpp"
#include "guardsim/core/bytes.hpp"

namespace guardsim::coap {

enum class MessageType : std::uint8_t { Con, Non, Ack, Rst };

const char* to_string(MessageType t);

/// CoAP code as class.detail (0.02 POST, 2.05 Content, 4.01 Unauthorized, ...).
struct Code {
    std::uint8_t cls = 0;
    std::uint8_t detail = 0;

    constexpr bool operator==(const Code&) const = default;
    constexpr bool is_empty() const { return cls == 0 && detail == 0; }
    constexpr bool is_request() const { return cls == 0 && detail != 0; }
    constexpr bool is_response() const { return cls >= 2; }
    constexpr bool is_success() const { return cls == 2; }
    std::string str() const;
};

namespace codes {
inline constexpr Code Empty{0, 0};
inline constexpr Code Get{0, 1};
inline constexpr Code Post{0, 2};
inline constexpr Code Put{0, 3};
inline constexpr Code Fetch{0, 5};
inline constexpr Code Created{2, 1};
inline constexpr Code Changed{2, 4};
inline constexpr Code Content{2, 5};
inline constexpr Code BadRequest{4, 0};
inline constexpr Code Unauthorized{4, 1};
inline constexpr Code NotFound{4, 4};
inline constexpr Code TooManyRequests{4, 29};
inline constexpr Code BadGateway{5, 2};
inline constexpr Code ServiceUnavailable{5, 3};
} // namespace codes

/// Outer OSCORE option: the parts of the security header proxies can read.
struct OscoreOption {
    Bytes kid;
    std::optional<std::uint32_t> piv;

    bool operator==(const OscoreOption&) const = default;
    std::size_t value_length() const;
};

/// Simplified CoAP message. `payload_len` is the modeled payload size used for
/// bandwidth and energy; `body` holds the bytes the simulation actually
/// interprets and is never longer than `payload_len`.
struct SimMessage {
    Address src;
    Address dst;
    MessageType type = MessageType::Con;
    std::uint16_t mid = 0;
    Bytes token;
    Code code;

    std::optional<std::string> proxy_uri;
    std::optional<std::string> uri_host;
    std::optional<std::string> uri_path;
    std::optional<Bytes> echo;
    std::optional<OscoreOption> oscore;

    std::size_t payload_len = 0;
    Bytes body;

    bool is_protected() const { return oscore.has_value(); }

    /// Sets body and grows payload_len to at least body.size().
    void set_body(Bytes b, std::size_t modeled_len = 0);

    bool operator==(const SimMessage&) const = default;
};

/// Synthetic size: 4-byte header + token + (2 + value length) per option + payload.
std::size_t message_size(const SimMessage& msg);

/// Smallest payload_len for which message_size(msg) reaches `target`.
std::size_t payload_for_size(const SimMessage& msg, std::size_t target);

/// Builds a response skeleton mirroring token (and mid for piggybacked ACKs).
SimMessage make_response(const SimMessage& request, Code code);

} // namespace guardsim::coap
