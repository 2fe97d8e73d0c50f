/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "guardsim/actors/as_node.hpp"

#include "guardsim/ace/as_protocol.hpp"
#include "guardsim/guard/setup.hpp"

namespace guardsim::actors {

void AsNode::on_frame(netsim::World& w, netsim::Frame f)
{
    const auto& m = f.msg;
    if (m.dst != address() || m.code != coap::codes::Post || !m.uri_path || *m.uri_path != guard::paths::token)
        return;
    requesters_.push_back(m.src);
    coap::SimMessage r;
    auto req = ace::decode_token_request(m.body);
    if (!req) {
        r = coap::make_response(m, coap::codes::BadRequest);
    } else if (auto issued = as_.issue_token(*req, w.now(), rng_)) {
        r = coap::make_response(m, coap::codes::Created);
        r.set_body(ace::encode_issued_token(*issued));
    } else {
        r = coap::make_response(m, coap::Code{4, 3});
        r.set_body(to_bytes(ace::to_string(issued.error())));
    }
    w.send(address(), {r, f.attack});
}

} // namespace guardsim::actors
