#pragma once

#include "tomkit/dirnet/protocol.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <vector>

namespace tomkit::dirnet {

/// State of the DIR-x process on one node. The manager watches every live
/// backup with a cyclic t_TAIA_A[i]; when it lapses the watch is swapped for
/// a one-shot t_TEIF_A[i] (the suspicion period). Backups do the same on the
/// manager with t_MIA_B / t_TEIF_B.
struct DirxState {
    NodeId node = 0;
    NodeRole role = NodeRole::agent;
    NodeId mid = 0;
    std::vector<NodeId> backups; // configured backup nodes
    std::set<NodeId> crashed;    // nodes declared crashed
    Deadlines deadlines;
    std::map<NodeId, Suspicion> watch; // manager side, one per watched backup
    Suspicion manager_watch = Suspicion::normal;
};

struct DirxStep {
    DirxState state;
    Effects fx;
};

/// Backups the manager is expected to watch right now.
inline std::vector<NodeId> watched_backups(const DirxState& s)
{
    std::vector<NodeId> out;
    for (NodeId b : s.backups)
        if (b != s.node && b != s.mid && !s.crashed.contains(b))
            out.push_back(b);
    return out;
}

namespace detail {

inline void arm_manager(DirxState& s, Effects& fx)
{
    s.role = NodeRole::manager;
    s.mid = s.node;
    s.watch.clear();
    fx.tom.push_back(TomCommand::insert(timers::mia_a(s.node, s.deadlines)));
    for (NodeId i : watched_backups(s)) {
        s.watch[i] = Suspicion::normal;
        fx.tom.push_back(TomCommand::renew(timers::taia_a(s.node, i, s.deadlines)));
    }
}

inline void send(Effects& fx, const DirxState& s, MsgType t, Endpoint to, NodeId subject)
{
    fx.sends.push_back(encode(t, {s.node, Port::main}, to, subject));
}

} // namespace detail

/// Fresh DIR-x. A respawned process passes the role, manager id and crash
/// knowledge of the one it replaces; a manager rebuilds every watch at once.
inline DirxStep dirx_init(NodeId node, NodeRole role, NodeId mid, std::vector<NodeId> backups,
                          const Deadlines& d, std::set<NodeId> crashed = {})
{
    DirxStep out;
    auto& s = out.state;
    s.node = node;
    s.role = role;
    s.mid = mid;
    s.backups = std::move(backups);
    s.crashed = std::move(crashed);
    s.deadlines = d;

    out.fx.tom.push_back(TomCommand::insert(timers::ia_set(node, d)));
    if (role == NodeRole::manager) {
        detail::arm_manager(s, out.fx);
    } else if (role == NodeRole::backup) {
        out.fx.tom.push_back(TomCommand::insert(timers::taia_b(node, d)));
        out.fx.tom.push_back(TomCommand::insert(timers::mia_b(node, d)));
    }
    return out;
}

/// m_IA_SET_ALARM: the only way the flag gets set. The alarm itself never
/// touches it, so a hung DIR-x stops setting it.
inline DirxStep dirx_heartbeat_step(const DirxState& s, IafPort& iaf, const DirnetMessage& m)
{
    DirxStep out{s, {}};
    if (m.type == MsgType::ia_set_alarm)
        iaf.set();
    return out;
}

inline DirxStep manager_step(const DirxState& s, const DirnetMessage& m)
{
    if (s.role != NodeRole::manager)
        throw std::invalid_argument("manager_step on a non-manager");

    DirxStep out{s, {}};
    auto& n = out.state;
    auto& fx = out.fx;
    const auto& d = s.deadlines;
    const auto watching = [&](NodeId i) { return n.watch.contains(i); };

    switch (m.type) {
    case MsgType::mia_a_alarm:
        for (NodeId i : watched_backups(s))
            detail::send(fx, s, MsgType::mia, {i, Port::main}, s.node);
        break;

    case MsgType::taia: {
        const NodeId i = m.subject;
        if (!watching(i))
            break; // stale: unknown or already declared crashed
        if (n.watch[i] == Suspicion::suspect) {
            // late, not dead
            n.watch[i] = Suspicion::normal;
            fx.tom.push_back(TomCommand::erase(timer_id(TimerClass::teif_a, i)));
            fx.events.push_back({"clear", i, {}});
        }
        fx.tom.push_back(TomCommand::renew(timers::taia_a(s.node, i, d)));
        break;
    }

    case MsgType::taia_a_alarm: {
        const NodeId i = m.subject;
        if (!watching(i) || n.watch[i] != Suspicion::normal)
            break;
        n.watch[i] = Suspicion::suspect;
        fx.tom.push_back(TomCommand::erase(timer_id(TimerClass::taia_a, i)));
        fx.tom.push_back(TomCommand::insert(timers::teif_a(s.node, i, d)));
        fx.events.push_back({"suspect", i, {}});
        break;
    }

    case MsgType::teif: {
        // The node's IAT is alive but its DIR-x is not: restart the process.
        const NodeId k = m.subject;
        const bool is_backup = std::find(s.backups.begin(), s.backups.end(), k) != s.backups.end();
        if (!is_backup || k == s.node || n.crashed.contains(k))
            break;
        fx.events.push_back({"declare_crashed", k, "process"});
        detail::send(fx, s, MsgType::wakeup, {k, Port::iat}, k);
        fx.events.push_back({"wakeup", k, {}});
        if (watching(k)) {
            if (n.watch[k] == Suspicion::suspect) {
                n.watch[k] = Suspicion::normal;
                fx.tom.push_back(TomCommand::erase(timer_id(TimerClass::teif_a, k)));
            }
            fx.tom.push_back(TomCommand::renew(timers::taia_a(s.node, k, d)));
        }
        break;
    }

    case MsgType::teif_a_alarm: {
        const NodeId i = m.subject;
        if (!watching(i) || n.watch[i] != Suspicion::suspect)
            break;
        n.watch.erase(i);
        n.crashed.insert(i);
        fx.events.push_back({"declare_crashed", i, "node"});
        for (NodeId j : watched_backups(n))
            detail::send(fx, s, MsgType::node_crashed, {j, Port::main}, i);
        break;
    }

    default:
        break;
    }
    return out;
}

inline DirxStep backup_step(const DirxState& s, const DirnetMessage& m)
{
    if (s.role != NodeRole::backup)
        throw std::invalid_argument("backup_step on a non-backup");

    DirxStep out{s, {}};
    auto& n = out.state;
    auto& fx = out.fx;
    const auto& d = s.deadlines;

    switch (m.type) {
    case MsgType::taia_b_alarm:
        detail::send(fx, s, MsgType::taia, {s.mid, Port::main}, s.node);
        break;

    case MsgType::mia:
        if (m.sender != s.mid)
            break;
        if (n.manager_watch == Suspicion::suspect) {
            n.manager_watch = Suspicion::normal;
            fx.tom.push_back(TomCommand::erase(timer_id(TimerClass::teif_b)));
            fx.events.push_back({"clear", s.mid, {}});
        }
        fx.tom.push_back(TomCommand::renew(timers::mia_b(s.node, d)));
        break;

    case MsgType::mia_b_alarm:
        if (n.manager_watch != Suspicion::normal)
            break;
        n.manager_watch = Suspicion::suspect;
        fx.tom.push_back(TomCommand::erase(timer_id(TimerClass::mia_b)));
        fx.tom.push_back(TomCommand::insert(timers::teif_b(s.node, d)));
        fx.events.push_back({"suspect", s.mid, {}});
        break;

    case MsgType::teif:
        if (m.subject != s.mid)
            break;
        // manager process down, node alive: manager recovery on that node
        fx.events.push_back({"declare_crashed", s.mid, "process"});
        detail::send(fx, s, MsgType::wakeup, {s.mid, Port::iat}, s.mid);
        fx.events.push_back({"wakeup", s.mid, {}});
        if (n.manager_watch == Suspicion::suspect) {
            n.manager_watch = Suspicion::normal;
            fx.tom.push_back(TomCommand::erase(timer_id(TimerClass::teif_b)));
        }
        fx.tom.push_back(TomCommand::renew(timers::mia_b(s.node, d)));
        break;

    case MsgType::teif_b_alarm: {
        if (n.manager_watch != Suspicion::suspect)
            break;
        const NodeId old = s.mid;
        n.crashed.insert(old);
        fx.events.push_back({"declare_crashed", old, "node"});

        std::set<NodeId> candidates;
        for (NodeId b : n.backups)
            if (!n.crashed.contains(b))
                candidates.insert(b);
        const NodeId elected = elect(candidates);
        fx.events.push_back({"elected", elected, {}});
        n.manager_watch = Suspicion::normal;
        n.mid = elected;
        if (elected == s.node) {
            fx.tom.push_back(TomCommand::erase(timer_id(TimerClass::taia_b)));
            detail::arm_manager(n, fx);
        } else {
            fx.tom.push_back(TomCommand::renew(timers::mia_b(s.node, d)));
        }
        break;
    }

    case MsgType::node_crashed:
        if (m.subject != s.node)
            n.crashed.insert(m.subject);
        break;

    default:
        break;
    }
    return out;
}

/// Entry point for every message addressed to a DIR-x.
inline DirxStep dirx_step(const DirxState& s, IafPort& iaf, const DirnetMessage& m)
{
    switch (m.type) {
    case MsgType::ia_set_alarm:
        return dirx_heartbeat_step(s, iaf, m);
    case MsgType::inject_fault_timeout: {
        DirxStep out{s, {}};
        out.fx.apply_fault = m.subject;
        return out;
    }
    default:
        break;
    }
    switch (s.role) {
    case NodeRole::manager: return manager_step(s, m);
    case NodeRole::backup:  return backup_step(s, m);
    case NodeRole::agent:   break;
    }
    return DirxStep{s, {}};
}

} // namespace tomkit::dirnet
