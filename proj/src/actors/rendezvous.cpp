/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "guardsim/actors/rendezvous.hpp"

namespace guardsim::actors {

Expected<guard::RendezvousEntry, NotFound> Rendezvous::lookup(const std::string& name) const
{
    auto it = entries_.find(name);
    if (it == entries_.end())
        return unexpected(NotFound{});
    return it->second;
}

void RendezvousNode::on_frame(netsim::World& w, netsim::Frame f)
{
    const auto& m = f.msg;
    if (m.dst != address() || !m.code.is_request() || !m.uri_path || *m.uri_path != guard::paths::rd)
        return;
    coap::SimMessage r;
    if (m.code == coap::codes::Post) {
        auto e = guard::decode_rendezvous_entry(m.body);
        if (e) {
            rd_.register_entry(*e);
            r = coap::make_response(m, coap::codes::Created);
        } else {
            r = coap::make_response(m, coap::codes::BadRequest);
        }
    } else {
        auto e = rd_.lookup(std::string(m.body.begin(), m.body.end()));
        if (e) {
            r = coap::make_response(m, coap::codes::Content);
            r.set_body(guard::encode(*e));
        } else {
            r = coap::make_response(m, coap::codes::NotFound);
        }
    }
    w.send(address(), {r, f.attack});
}

} // namespace guardsim::actors
