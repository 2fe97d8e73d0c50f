/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include "guardsim/coap/message.hpp"
#include "guardsim/core/expected.hpp"

namespace guardsim::coap {

enum class DecodeError { Truncated, BadField };

/// Private binary encoding of SimMessage used as AEAD plaintext (OSCORE inner
/// messages, guard tunnel payloads). Not CoAP wire format.
Bytes encode(const SimMessage& msg);
Expected<SimMessage, DecodeError> decode(ByteView data);

} // namespace guardsim::coap
