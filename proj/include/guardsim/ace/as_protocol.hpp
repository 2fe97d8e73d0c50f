/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <optional>

#include "guardsim/ace/token.hpp"

namespace guardsim::ace {

/// Bodies of the token endpoint. The channel to the AS counts as already
/// secured, so the PoP key travels in the clear inside the response.
Bytes encode_token_request(const TokenRequest& r);
std::optional<TokenRequest> decode_token_request(ByteView body);

Bytes encode_issued_token(const IssuedToken& t);
std::optional<IssuedToken> decode_issued_token(ByteView body);

} // namespace guardsim::ace
