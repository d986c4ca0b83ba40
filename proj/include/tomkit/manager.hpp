#pragma once

#include "tomkit/clock.hpp"
#include "tomkit/error.hpp"
#include "tomkit/message.hpp"
#include "tomkit/timeout.hpp"
#include "tomkit/timeout_list.hpp"
#include "tomkit/trace.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <future>
#include <map>
#include <mutex>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

namespace tomkit {

/// Reply to a client request: Errc::ok or the error the list raised.
using Status = Errc;

/// Receives every alarm message the manager emits.
using AlarmSink = std::function<void(Message)>;

struct ManagerConfig {
    // 0 selects the simple mode: the list manager emits alarms itself.
    std::size_t pool_size = 0;
    Tick tm_cycle = 1;
    // Ticks an executor stays busy per alarm.
    Tick alarm_latency = 0;
    std::size_t pending_capacity = 1024;
};

/// Alarm scheduler plus a circular set of executors. A fired action goes to
/// the first free executor after the last one used; when none is free it
/// waits in a bounded FIFO. Emission order equals submission order as long
/// as every executor has the same latency.
class AlarmPool {
public:
    AlarmPool(std::size_t executors, Tick latency, std::size_t capacity)
        : slots_(executors), latency_(latency), capacity_(capacity)
    {}

    std::size_t size() const noexcept { return slots_.size(); }
    std::size_t pending() const noexcept { return pending_.size(); }
    std::size_t busy() const noexcept
    {
        return static_cast<std::size_t>(
            std::count_if(slots_.begin(), slots_.end(), [](const Slot& s) { return s.job.has_value(); }));
    }
    const std::vector<std::size_t>& dispatch_counts() const noexcept { return dispatched_; }

    /// False when the pending queue is full; the alarm is lost.
    bool submit(Message m)
    {
        if (pending_.size() >= capacity_)
            return false;
        pending_.push_back(std::move(m));
        return true;
    }

    template <typename Emit>
    void step(Tick now, Emit&& emit)
    {
        if (dispatched_.size() != slots_.size())
            dispatched_.assign(slots_.size(), 0);

        // finished jobs, oldest assignment first
        std::vector<std::size_t> done;
        for (std::size_t i = 0; i < slots_.size(); ++i)
            if (slots_[i].job && slots_[i].done_at <= now)
                done.push_back(i);
        std::sort(done.begin(), done.end(),
                  [&](std::size_t a, std::size_t b) { return slots_[a].seq < slots_[b].seq; });
        for (auto i : done) {
            emit(std::move(*slots_[i].job));
            slots_[i].job.reset();
        }

        while (!pending_.empty()) {
            auto free = next_free();
            if (!free)
                break;
            auto& slot = slots_[*free];
            ++dispatched_[*free];
            cursor_ = (*free + 1) % slots_.size();
            if (latency_ == 0) {
                emit(std::move(pending_.front()));
            } else {
                slot.job = std::move(pending_.front());
                slot.done_at = now + latency_;
                slot.seq = seq_++;
            }
            pending_.pop_front();
        }
    }

private:
    struct Slot {
        std::optional<Message> job;
        Tick done_at = 0;
        std::uint64_t seq = 0;
    };

    std::optional<std::size_t> next_free() const
    {
        for (std::size_t k = 0; k < slots_.size(); ++k) {
            std::size_t i = (cursor_ + k) % slots_.size();
            if (!slots_[i].job)
                return i;
        }
        return std::nullopt;
    }

    std::vector<Slot> slots_;
    std::deque<Message> pending_;
    std::vector<std::size_t> dispatched_;
    Tick latency_;
    std::size_t capacity_;
    std::size_t cursor_ = 0;
    std::uint64_t seq_ = 0;
};

class TimeoutManager;

using ListId = std::uint32_t;

/// Client side of one time-out list served by a TimeoutManager. Requests are
/// queued and applied by the manager at its next cycle; each gets exactly one
/// reply. The manager must outlive its handles.
class TomHandle {
public:
    TomHandle() = default;

    std::future<Status> insert(Timeout t);
    std::future<Status> erase(TimeoutId id);
    std::future<Status> renew(Timeout t);
    std::future<Status> enable(TimeoutId id);
    std::future<Status> disable(TimeoutId id);
    std::future<Status> close();

    std::uint32_t manager_id() const noexcept { return manager_id_; }
    ListId list_id() const noexcept { return list_; }
    const ActionDescriptor& default_action() const noexcept { return default_action_; }
    bool valid() const noexcept { return mgr_ != nullptr; }

private:
    friend class TimeoutManager;
    TomHandle(TimeoutManager* m, std::uint32_t mid, ListId l, ActionDescriptor a)
        : mgr_(m), manager_id_(mid), list_(l), default_action_(std::move(a))
    {}

    TimeoutManager* mgr_ = nullptr;
    std::uint32_t manager_id_ = 0;
    ListId list_ = 0;
    ActionDescriptor default_action_;
};

/// The time-out list manager: serves client requests, drains expired entries
/// every `tm_cycle` ticks, hands enabled alarms to the scheduler and re-arms
/// cyclic entries at the tick the expiry was processed.
///
/// Driven cooperatively through step(); the clock is owned by the caller.
/// Request submission is thread-safe, everything else belongs to the thread
/// that calls step().
class TimeoutManager {
public:
    TimeoutManager(const VirtualClock& clock, AlarmSink sink, ManagerConfig cfg = {},
                   std::uint32_t id = 0)
        : clock_(&clock)
        , sink_(std::move(sink))
        , cfg_(cfg)
        , id_(id)
        , pool_(cfg.pool_size, cfg.alarm_latency, cfg.pending_capacity)
        , next_cycle_(clock.now())
    {
        if (cfg_.tm_cycle < 1)
            cfg_.tm_cycle = 1;
    }

    TimeoutManager(const TimeoutManager&) = delete;
    TimeoutManager& operator=(const TimeoutManager&) = delete;

    ~TimeoutManager()
    {
        std::lock_guard lock(mu_);
        for (auto& r : inbox_)
            r.reply.set_value(Errc::closed);
    }

    /// Opens a new list on this manager. The first open (re)starts the loop.
    TomHandle tom_init(ActionDescriptor default_action)
    {
        std::lock_guard lock(mu_);
        ListId l = next_list_++;
        accepting_[l] = true;
        Request r{Kind::open, l, std::monostate{}, {}};
        r.action = default_action;
        inbox_.push_back(std::move(r));
        return TomHandle(this, id_, l, std::move(default_action));
    }

    std::uint32_t id() const noexcept { return id_; }
    const ManagerConfig& config() const noexcept { return cfg_; }
    const AlarmPool& pool() const noexcept { return pool_; }
    std::size_t emission_failures() const noexcept { return failures_; }

    /// True while at least one list is open or requests are pending.
    bool running() const
    {
        std::lock_guard lock(mu_);
        return !inbox_.empty() || std::any_of(accepting_.begin(), accepting_.end(),
                                              [](const auto& kv) { return kv.second; });
    }

    const TimeoutList* list(ListId l) const
    {
        auto it = lists_.find(l);
        return it == lists_.end() ? nullptr : &it->second.list;
    }

    std::size_t pending_requests(ListId l) const
    {
        std::lock_guard lock(mu_);
        return static_cast<std::size_t>(
            std::count_if(inbox_.begin(), inbox_.end(), [&](const Request& r) { return r.list == l; }));
    }

    void set_trace(Trace* t) { trace_ = t; }

    /// Runs a list-manager cycle if one is due at the current tick, then lets
    /// the executors make progress.
    void step()
    {
        const Tick now = clock_->now();
        if (now >= next_cycle_ && running()) {
            cycle();
            next_cycle_ = now + cfg_.tm_cycle;
        }
        if (cfg_.pool_size > 0)
            pool_.step(now, [this](Message m) { emit(std::move(m)); });
    }

    /// One list-manager cycle at the current tick regardless of schedule.
    void cycle()
    {
        const Tick now = clock_->now();

        std::deque<Request> batch;
        {
            std::lock_guard lock(mu_);
            batch.swap(inbox_);
        }
        const std::size_t served = batch.size();
        for (auto& r : batch)
            r.reply.set_value(apply(r, now));

        struct Fired {
            ListId list;
            TimeoutList::Expiry e;
        };
        std::vector<Fired> fired;
        std::vector<std::pair<ListId, Timeout>> rearm;
        for (auto& [l, inst] : lists_) {
            auto drained = inst.list.advance(now);
            for (auto& e : drained.expired) {
                if (e.timeout.cyclic)
                    rearm.emplace_back(l, e.timeout);
                fired.push_back({l, std::move(e)});
            }
            for (auto& e : drained.expired_disabled)
                if (e.timeout.cyclic)
                    rearm.emplace_back(l, e.timeout);
        }
        std::stable_sort(fired.begin(), fired.end(),
                         [](const Fired& a, const Fired& b) { return a.e.due < b.e.due; });

        for (auto& f : fired) {
            const auto& inst = lists_.at(f.list);
            Message m = alarm_message(f.e.timeout, f.e.timeout.action.value_or(inst.default_action));
            if (cfg_.pool_size == 0) {
                emit(std::move(m));
            } else if (!pool_.submit(std::move(m))) {
                ++failures_;
                if (trace_)
                    trace_->record(Record{{"tick", now}, {"manager", id_}, {"alarm_dropped", to_string(f.e.timeout.id)}});
            }
        }

        for (auto& [l, t] : rearm) {
            // cannot collide: the entry was just drained and no request ran since
            lists_.at(l).list.insert(t, now);
        }

        if (trace_ && (served > 0 || !fired.empty() || !rearm.empty())) {
            Record rec;
            rec["tick"] = now;
            rec["manager"] = id_;
            rec["requests_served"] = served;
            auto ids = Record::array();
            for (auto& f : fired)
                ids.push_back(to_string(f.e.timeout.id));
            rec["fired"] = std::move(ids);
            auto re = Record::array();
            for (auto& [l, t] : rearm)
                re.push_back(to_string(t.id));
            rec["reinserted"] = std::move(re);
            trace_->record(rec);
        }
    }

private:
    friend class TomHandle;

    enum class Kind { open, insert, erase, renew, enable, disable, close };

    struct Request {
        Kind kind;
        ListId list;
        std::variant<std::monostate, Timeout, TimeoutId> arg;
        std::promise<Status> reply;
        ActionDescriptor action{};
    };

    struct Instance {
        TimeoutList list;
        ActionDescriptor default_action;
    };

    static std::future<Status> ready(Status s)
    {
        std::promise<Status> p;
        p.set_value(s);
        return p.get_future();
    }

    std::future<Status> submit(Kind k, ListId l, std::variant<std::monostate, Timeout, TimeoutId> arg)
    {
        std::lock_guard lock(mu_);
        auto it = accepting_.find(l);
        if (it == accepting_.end() || !it->second)
            return ready(k == Kind::close ? Errc::ok : Errc::closed);
        if (k == Kind::close)
            it->second = false;
        Request r{k, l, std::move(arg), {}};
        auto fut = r.reply.get_future();
        inbox_.push_back(std::move(r));
        return fut;
    }

    Status apply(Request& r, Tick now)
    {
        if (r.kind == Kind::open) {
            lists_[r.list].default_action = r.action;
            return Errc::ok;
        }
        auto it = lists_.find(r.list);
        if (it == lists_.end())
            return Errc::closed;
        auto& list = it->second.list;
        try {
            switch (r.kind) {
            case Kind::insert: list.insert(std::get<Timeout>(r.arg), now); break;
            case Kind::erase: list.erase(std::get<TimeoutId>(r.arg), now); break;
            case Kind::renew: list.renew(std::get<Timeout>(r.arg), now); break;
            case Kind::enable: list.enable(std::get<TimeoutId>(r.arg)); break;
            case Kind::disable: list.disable(std::get<TimeoutId>(r.arg)); break;
            case Kind::close: lists_.erase(it); break;
            case Kind::open: break;
            }
        } catch (const TomError& e) {
            return e.code();
        }
        return Errc::ok;
    }

    void emit(Message m)
    {
        try {
            if (sink_)
                sink_(std::move(m));
        } catch (const std::exception&) {
            ++failures_;
        }
    }

    const VirtualClock* clock_;
    AlarmSink sink_;
    ManagerConfig cfg_;
    std::uint32_t id_;
    AlarmPool pool_;
    Tick next_cycle_;
    Trace* trace_ = nullptr;
    std::size_t failures_ = 0;

    mutable std::mutex mu_;
    std::deque<Request> inbox_;
    std::map<ListId, bool> accepting_;
    ListId next_list_ = 0;

    std::map<ListId, Instance> lists_;
};

inline std::future<Status> TomHandle::insert(Timeout t)
{
    if (!mgr_)
        return TimeoutManager::ready(Errc::closed);
    return mgr_->submit(TimeoutManager::Kind::insert, list_, std::move(t));
}

inline std::future<Status> TomHandle::erase(TimeoutId id)
{
    if (!mgr_)
        return TimeoutManager::ready(Errc::closed);
    return mgr_->submit(TimeoutManager::Kind::erase, list_, id);
}

inline std::future<Status> TomHandle::renew(Timeout t)
{
    if (!mgr_)
        return TimeoutManager::ready(Errc::closed);
    return mgr_->submit(TimeoutManager::Kind::renew, list_, std::move(t));
}

inline std::future<Status> TomHandle::enable(TimeoutId id)
{
    if (!mgr_)
        return TimeoutManager::ready(Errc::closed);
    return mgr_->submit(TimeoutManager::Kind::enable, list_, id);
}

inline std::future<Status> TomHandle::disable(TimeoutId id)
{
    if (!mgr_)
        return TimeoutManager::ready(Errc::closed);
    return mgr_->submit(TimeoutManager::Kind::disable, list_, id);
}

inline std::future<Status> TomHandle::close()
{
    if (!mgr_)
        return TimeoutManager::ready(Errc::ok);
    return mgr_->submit(TimeoutManager::Kind::close, list_, std::monostate{});
}

} // namespace tomkit
