#pragma once

#include "tomkit/clock.hpp"
#include "tomkit/error.hpp"
#include "tomkit/message.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace tomkit::sim {

/// Matches (src, dst) during [from, to]; an empty end matches any node.
struct LinkRule {
    std::optional<NodeId> src;
    std::optional<NodeId> dst;
    Tick from = 0;
    Tick to = 0;
    Tick extra = 0; // spikes only

    bool matches(NodeId s, NodeId d, Tick now) const
    {
        return (!src || *src == s) && (!dst || *dst == d) && now >= from && now <= to;
    }
};

struct LinkModel {
    Tick base_delay = 1;
    Tick jitter = 0;
    std::uint64_t seed = 1;
    std::vector<LinkRule> drops;
    std::vector<LinkRule> spikes;
};

struct SimEvent {
    Tick deliver_at = 0;
    std::uint64_t seq = 0;
    Tick sent_at = 0;
    Message msg;

    friend bool operator<(const SimEvent& a, const SimEvent& b)
    {
        return a.deliver_at != b.deliver_at ? a.deliver_at < b.deliver_at : a.seq < b.seq;
    }
};

struct NetStats {
    std::uint64_t sent = 0;
    std::uint64_t delivered = 0;
    std::uint64_t dropped = 0;
};

/// Virtual-time message network. Remote sends get base_delay plus a seeded
/// jitter plus any matching spike; messages between endpoints on the same
/// node are delivered with no delay and are never dropped.
class Network {
public:
    Network(LinkModel link, std::size_t nodes) : link_(std::move(link)), nodes_(nodes), rng_(link_.seed) {}

    std::size_t nodes() const noexcept { return nodes_; }
    const LinkModel& link() const noexcept { return link_; }
    const NetStats& stats() const noexcept { return stats_; }
    std::size_t in_flight() const noexcept { return queue_.size(); }

    void send(Message m, Tick now)
    {
        check(m.from.node);
        check(m.to.node);
        ++stats_.sent;
        const NodeId s = m.from.node;
        const NodeId d = m.to.node;

        Tick delay = 0;
        if (s != d) {
            for (const auto& r : link_.drops)
                if (r.matches(s, d, now)) {
                    ++stats_.dropped;
                    return;
                }
            delay = link_.base_delay;
            if (link_.jitter > 0)
                delay += rng_() % (link_.jitter + 1);
            for (const auto& r : link_.spikes)
                if (r.matches(s, d, now))
                    delay += r.extra;
        }
        queue_.insert(SimEvent{now + delay, seq_++, now, std::move(m)});
    }

    /// One copy to every node's `port`, the sender included, in id order.
    void broadcast(const Message& m, Port port, Tick now)
    {
        for (NodeId n = 0; n < nodes_; ++n) {
            Message c = m;
            c.to = {n, port};
            send(std::move(c), now);
        }
    }

    /// Counts a message the sender's host suppressed before it hit a link.
    void discard(const Message& m)
    {
        check(m.from.node);
        ++stats_.sent;
        ++stats_.dropped;
    }

    /// Next event due at or before `now`, in (deliver_at, seq) order.
    std::optional<SimEvent> pop_due(Tick now)
    {
        if (queue_.empty() || queue_.begin()->deliver_at > now)
            return std::nullopt;
        auto node = queue_.extract(queue_.begin());
        ++stats_.delivered;
        return std::move(node.value());
    }

    bool conserved() const noexcept { return stats_.sent == stats_.delivered + stats_.dropped + queue_.size(); }

private:
    void check(NodeId n) const
    {
        if (n >= nodes_)
            throw TomError(Errc::unknown_node, "node " + std::to_string(n));
    }

    LinkModel link_;
    std::size_t nodes_;
    std::mt19937_64 rng_;
    std::set<SimEvent> queue_;
    std::uint64_t seq_ = 0;
    NetStats stats_;
};

} // namespace tomkit::sim
