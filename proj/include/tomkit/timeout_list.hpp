#pragma once

#include "tomkit/clock.hpp"
#include "tomkit/error.hpp"
#include "tomkit/timeout.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tomkit {

/// Ordered list of time-outs kept in relative-residual form.
///
/// Only the head is compared against the clock: its `running` field is an
/// offset from `start_time()`, so the head residual is
///
///     r1 = head.running - (now - start_time)
///
/// and every later entry stores the distance from its predecessor's expiry,
/// giving r_n = r1 + sum(entries[2..n].running). Residuals are therefore
/// non-decreasing along the list and the absolute expiry of entry n is
/// start_time + sum(entries[1..n].running), independent of `now`.
///
/// `start_time` is written only when an element is inserted into an empty
/// list. Insertion on top or in the middle subdivides [0, r_m] without
/// changing its length; only insertion at the end extends it.
///
/// Every operation taking `now` rejects a clock value smaller than the
/// largest one seen so far (ClockRegression).
class TimeoutList {
public:
    struct Expiry {
        Timeout timeout;
        Tick due = 0;
    };

    struct Drained {
        std::vector<Expiry> expired;          // enabled: these fire
        std::vector<Expiry> expired_disabled; // drained silently
    };

    /// Structured trace record emitted after each state transition.
    struct Event {
        std::string_view op;
        TimeoutId id;
        Tick now = 0;
        std::vector<TickDelta> residuals;
    };
    using Observer = std::function<void(const Event&)>;

    bool empty() const noexcept { return entries_.empty(); }
    std::size_t size() const noexcept { return entries_.size(); }
    Tick start_time() const noexcept { return start_time_; }
    std::span<const Timeout> entries() const noexcept { return entries_; }

    bool contains(TimeoutId id) const noexcept { return index_of(id).has_value(); }

    const Timeout* find(TimeoutId id) const noexcept
    {
        auto i = index_of(id);
        return i ? &entries_[*i] : nullptr;
    }

    void set_observer(Observer obs) { observer_ = std::move(obs); }

    void insert(Timeout t, Tick now)
    {
        observe_clock(now);
        if (t.deadline < 1)
            throw TomError(Errc::zero_deadline, "time-out " + to_string(t.id));
        if (contains(t.id))
            throw TomError(Errc::duplicate_id, "time-out " + to_string(t.id));
        TimeoutId id = t.id;
        place(std::move(t), now);
        notify("insert", id, now);
    }

    /// Removes `id`; its running time is folded into the successor so that
    /// every surviving entry keeps its absolute expiry.
    Timeout erase(TimeoutId id, Tick now)
    {
        observe_clock(now);
        auto i = index_of(id);
        if (!i)
            throw TomError(Errc::not_found, "time-out " + to_string(id));
        Timeout removed = unlink(*i);
        notify("delete", id, now);
        return removed;
    }

    /// Drains every entry whose expiry is <= now, head first. Entries with the
    /// same expiry come out in list order, which is insertion order.
    /// Cyclic entries are not re-armed here.
    Drained advance(Tick now)
    {
        observe_clock(now);
        Drained out;
        while (!entries_.empty() && head_residual(now) <= 0) {
            Tick due = start_time_ + entries_.front().running;
            Timeout t = unlink(0);
            auto& bucket = t.enabled ? out.expired : out.expired_disabled;
            TimeoutId id = t.id;
            bucket.push_back({std::move(t), due});
            notify("expire", id, now);
        }
        return out;
    }

    /// Delete-then-insert so the entry expires at now + t.deadline. Deadline,
    /// cyclic flag and action come from `t`; an entry already in the list keeps
    /// its enabled flag. An absent entry is simply inserted.
    void renew(Timeout t, Tick now)
    {
        observe_clock(now);
        if (t.deadline < 1)
            throw TomError(Errc::zero_deadline, "time-out " + to_string(t.id));
        if (auto i = index_of(t.id)) {
            t.enabled = entries_[*i].enabled;
            unlink(*i);
        }
        TimeoutId id = t.id;
        place(std::move(t), now);
        notify("renew", id, now);
    }

    void enable(TimeoutId id) { flag(id, true); }
    void disable(TimeoutId id) { flag(id, false); }

    /// [r1, ..., r_m] at `now`.
    std::vector<TickDelta> residuals(Tick now) const
    {
        if (now < last_now_)
            throw TomError(Errc::clock_regression);
        std::vector<TickDelta> out;
        out.reserve(entries_.size());
        if (entries_.empty())
            return out;
        TickDelta r = head_residual(now);
        out.push_back(r);
        for (std::size_t k = 1; k < entries_.size(); ++k) {
            r += static_cast<TickDelta>(entries_[k].running);
            out.push_back(r);
        }
        return out;
    }

    /// Absolute expiry tick of each entry, in list order.
    std::vector<Tick> expiries() const
    {
        std::vector<Tick> out;
        out.reserve(entries_.size());
        Tick acc = start_time_;
        for (const auto& e : entries_) {
            acc += e.running;
            out.push_back(acc);
        }
        return out;
    }

    std::optional<Tick> next_expiry() const
    {
        if (entries_.empty())
            return std::nullopt;
        return start_time_ + entries_.front().running;
    }

private:
    std::optional<std::size_t> index_of(TimeoutId id) const noexcept
    {
        for (std::size_t i = 0; i < entries_.size(); ++i)
            if (entries_[i].id == id)
                return i;
        return std::nullopt;
    }

    void observe_clock(Tick now)
    {
        if (now < last_now_)
            throw TomError(Errc::clock_regression,
                           "now " + std::to_string(now) + " < " + std::to_string(last_now_));
        last_now_ = now;
    }

    TickDelta head_residual(Tick now) const
    {
        return static_cast<TickDelta>(entries_.front().running)
             - static_cast<TickDelta>(now - start_time_);
    }

    void place(Timeout t, Tick now)
    {
        const auto d = static_cast<TickDelta>(t.deadline);

        if (entries_.empty()) {
            start_time_ = now;
            t.running = t.deadline;
            entries_.push_back(std::move(t));
            return;
        }

        const TickDelta r1 = head_residual(now);
        if (d < r1) {
            // on top: the old head becomes relative to the newcomer
            t.running = t.deadline + (now - start_time_);
            entries_.front().running = static_cast<Tick>(r1 - d);
            entries_.insert(entries_.begin(), std::move(t));
            return;
        }

        // in the middle: first j with r_j <= d < r_{j+1}
        TickDelta rj = r1;
        for (std::size_t k = 1; k < entries_.size(); ++k) {
            const TickDelta next = rj + static_cast<TickDelta>(entries_[k].running);
            if (d < next) {
                t.running = static_cast<Tick>(d - rj);
                entries_[k].running -= t.running;
                entries_.insert(entries_.begin() + static_cast<std::ptrdiff_t>(k), std::move(t));
                return;
            }
            rj = next;
        }

        // at the end
        t.running = static_cast<Tick>(d - rj);
        entries_.push_back(std::move(t));
    }

    Timeout unlink(std::size_t i)
    {
        if (i + 1 < entries_.size())
            entries_[i + 1].running += entries_[i].running;
        Timeout out = std::move(entries_[i]);
        entries_.erase(entries_.begin() + static_cast<std::ptrdiff_t>(i));
        return out;
    }

    void flag(TimeoutId id, bool on)
    {
        auto i = index_of(id);
        if (!i)
            throw TomError(Errc::not_found, "time-out " + to_string(id));
        entries_[*i].enabled = on;
        notify(on ? "enable" : "disable", id, last_now_);
    }

    void notify(std::string_view op, TimeoutId id, Tick now) const
    {
        if (!observer_)
            return;
        observer_(Event{op, id, now, residuals(now)});
    }

    std::vector<Timeout> entries_;
    Tick start_time_ = 0;
    Tick last_now_ = 0;
    Observer observer_;
};

} // namespace tomkit
