#pragma once

#include "tomkit/dirnet/protocol.hpp"

#include <vector>

namespace tomkit::dirnet {

/// I'm-Alive task of node `node`. Every d_IA_CLR it checks the flag: set
/// means the local DIR-x is alive and the flag is reset; still clear means
/// the DIR-x stopped setting it, so (m_TEIF, node) goes to every DIR-x and
/// the check stops until a WAKEUP brings a replacement up.
struct IatState {
    NodeId node = 0;
    std::vector<NodeId> peers; // every node's DIR-x, including our own
    Deadlines deadlines;
    bool checking = false;
};

struct IatStep {
    IatState state;
    Effects fx;
};

inline IatStep iat_init(NodeId node, std::vector<NodeId> peers, const Deadlines& d)
{
    IatStep out{IatState{node, std::move(peers), d, true}, {}};
    out.fx.tom.push_back(TomCommand::insert(timers::ia_clr(node, d)));
    return out;
}

inline IatStep iat_step(const IatState& s, IafPort& iaf, const DirnetMessage& m)
{
    IatStep out{s, {}};
    auto& n = out.state;

    switch (m.type) {
    case MsgType::ia_clr_alarm:
        if (!s.checking)
            break;
        if (iaf.value()) {
            iaf.clear();
        } else {
            const Endpoint me{s.node, Port::iat};
            for (NodeId k : s.peers)
                out.fx.sends.push_back(encode(MsgType::teif, me, {k, Port::main}, s.node));
            out.fx.tom.push_back(TomCommand::erase(timer_id(TimerClass::ia_clr)));
            out.fx.events.push_back({"teif_sent", s.node, {}});
            n.checking = false;
        }
        break;
    case MsgType::wakeup:
        // The host spawns a replacement only if the local DIR-x is down.
        out.fx.respawn_dirx = true;
        out.fx.tom.push_back(TomCommand::renew(timers::ia_clr(s.node, s.deadlines)));
        n.checking = true;
        break;
    default:
        break;
    }
    return out;
}

} // namespace tomkit::dirnet
