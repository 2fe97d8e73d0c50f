/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "guardsim/actors/router.hpp"

namespace guardsim::actors {

void Router::on_frame(netsim::World& w, netsim::Frame f)
{
    if (f.msg.dst == address())
        return;
    const bool inbound = w.gateway_of(f.msg.dst) == address();
    if (!inbound) {
        w.send(address(), std::move(f));
        return;
    }
    if (bucket_ && w.gateway_of(f.last_hop) != address()) {
        if (!bucket_->has_token(w.now())) {
            ++dropped_;
            netsim::JsonFields d;
            d.add_raw("msg", netsim::World::describe(f.msg).str());
            d.add("reason", "throttled");
            d.add("attack", f.attack);
            w.note("drop", address(), d);
            return;
        }
        bucket_->take();
    }
    w.send_via(address(), f.msg.dst, std::move(f));
}

} // namespace guardsim::actors
