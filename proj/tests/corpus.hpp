#pragma once

// Random operation sequences run side by side on TimeoutList and the
// absolute-time oracle, with the structural properties checked after every
// step. Shared by the unit tests and the acceptance binary.

#include "oracle.hpp"

#include "tomkit/timeout_list.hpp"

#include <sstream>
#include <string>

namespace corpus {

using tomkit::Tick;
using tomkit::TickDelta;
using tomkit::TimeoutId;
using tomkit::TimeoutList;

struct Report {
    std::size_t ops = 0;
    std::size_t fired = 0;
    std::size_t oracle_mismatches = 0;
    std::size_t interval_violations = 0;
    std::size_t start_time_violations = 0;
    std::size_t monotone_violations = 0;
    std::size_t inverse_violations = 0;
    std::string first_failure;

    std::size_t property_violations() const
    {
        return interval_violations + start_time_violations + monotone_violations + inverse_violations;
    }

    Report& operator+=(const Report& o)
    {
        ops += o.ops;
        fired += o.fired;
        oracle_mismatches += o.oracle_mismatches;
        interval_violations += o.interval_violations;
        start_time_violations += o.start_time_violations;
        monotone_violations += o.monotone_violations;
        inverse_violations += o.inverse_violations;
        if (first_failure.empty())
            first_failure = o.first_failure;
        return *this;
    }
};

namespace detail {

inline std::vector<std::pair<TimeoutId, Tick>> snapshot(const TimeoutList& l)
{
    std::vector<std::pair<TimeoutId, Tick>> out;
    auto ex = l.expiries();
    auto es = l.entries();
    for (std::size_t i = 0; i < es.size(); ++i)
        out.emplace_back(es[i].id, ex[i]);
    return out;
}

inline TimeoutId present_id(const TimeoutList& l, oracle::Generator& g)
{
    return l.entries()[g.pick(0, l.size() - 1)].id;
}

} // namespace detail

/// One sequence of `length` operations over at most `max_ids` time-outs.
inline Report check_sequence(std::uint64_t seed, std::size_t max_ids = 50, std::size_t length = 200)
{
    oracle::Generator g(seed, max_ids);
    oracle::AbsoluteQueue ref;
    TimeoutList list;
    Report rep;
    Tick now = g.pick(0, 1000);

    auto fail = [&](std::size_t& counter, const std::string& what) {
        ++counter;
        if (rep.first_failure.empty()) {
            std::ostringstream os;
            os << "seed " << seed << " op " << rep.ops << " now " << now << ": " << what;
            rep.first_failure = os.str();
        }
    };

    for (std::size_t step = 0; step < length; ++step, ++rep.ops) {
        const Tick start_before = list.start_time();
        const std::size_t size_before = list.size();
        const auto res_before = list.residuals(now);
        bool start_may_change = false;

        switch (g.pick(0, 9)) {
        case 0:
        case 1:
        case 2: { // insert
            if (list.size() >= max_ids)
                break;
            TimeoutId id = g.any_id();
            if (list.contains(id))
                break;
            const Tick d = g.deadline();
            const bool enabled = g.pick(0, 4) != 0;
            list.insert(tomkit::declare(id, tomkit::Cyclic::no, enabled ? tomkit::Enabled::yes : tomkit::Enabled::no, d),
                        now);
            ref.insert(id, d, now, enabled);
            start_may_change = size_before == 0;

            const auto res = list.residuals(now);
            const bool at_end = list.entries().back().id == id;
            if (size_before > 0) {
                const TickDelta old_span = res_before.back();
                if (at_end ? (res.back() != static_cast<TickDelta>(d) || static_cast<TickDelta>(d) < old_span)
                           : res.back() != old_span)
                    fail(rep.interval_violations, "insert of " + tomkit::to_string(id) + " changed r_m from " +
                                                      std::to_string(old_span) + " to " +
                                                      std::to_string(res.back()));
            }
            break;
        }
        case 3: { // erase
            if (list.empty())
                break;
            TimeoutId id = detail::present_id(list, g);
            list.erase(id, now);
            ref.erase(id);
            break;
        }
        case 4: { // renew, present or absent
            TimeoutId id = g.any_id();
            if (!list.contains(id) && list.size() >= max_ids)
                break;
            const Tick d = g.deadline();
            const bool present = list.contains(id);
            list.renew(tomkit::declare(id, tomkit::Cyclic::no, tomkit::Enabled::yes, d), now);
            ref.renew(id, d, now, true);
            start_may_change = size_before - (present ? 1 : 0) == 0;
            break;
        }
        case 5: { // enable / disable
            if (list.empty())
                break;
            TimeoutId id = detail::present_id(list, g);
            const bool on = g.pick(0, 1) == 1;
            on ? list.enable(id) : list.disable(id);
            ref.set_enabled(id, on);
            break;
        }
        case 6: { // delete then re-insert at the same absolute expiry
            if (list.empty())
                break;
            const auto before = detail::snapshot(list);
            const auto& pick = before[g.pick(0, before.size() - 1)];
            const TimeoutId id = pick.first;
            const Tick due = pick.second;
            const bool enabled = list.find(id)->enabled;
            list.erase(id, now);
            list.insert(tomkit::declare(id, tomkit::Cyclic::no, enabled ? tomkit::Enabled::yes : tomkit::Enabled::no,
                                        due - now),
                        now);
            ref.erase(id);
            ref.insert(id, due - now, now, enabled);
            start_may_change = size_before == 1;

            auto a = before;
            auto b = detail::snapshot(list);
            std::sort(a.begin(), a.end());
            std::sort(b.begin(), b.end());
            if (a != b)
                fail(rep.inverse_violations, "delete/insert of " + tomkit::to_string(id) + " moved expiries");
            break;
        }
        default: { // advance
            now += g.pick(0, 80);
            auto drained = list.advance(now);
            auto fired = ref.advance(now);
            std::vector<oracle::Fired> en, dis;
            for (const auto& f : fired)
                (f.enabled ? en : dis).push_back(f);
            auto same = [](const std::vector<TimeoutList::Expiry>& got, const std::vector<oracle::Fired>& want) {
                if (got.size() != want.size())
                    return false;
                for (std::size_t i = 0; i < got.size(); ++i)
                    if (got[i].timeout.id != want[i].id || got[i].due != want[i].due)
                        return false;
                return true;
            };
            if (!same(drained.expired, en) || !same(drained.expired_disabled, dis))
                fail(rep.oracle_mismatches, "advance to " + std::to_string(now) + " drained a different set");
            rep.fired += fired.size();
            break;
        }
        }

        if (detail::snapshot(list) != ref.snapshot())
            fail(rep.oracle_mismatches, "list and oracle disagree on pending expiries");
        if (!start_may_change && list.start_time() != start_before && !list.empty())
            fail(rep.start_time_violations, "start_time moved from " + std::to_string(start_before) + " to " +
                                                std::to_string(list.start_time()));
        const auto res = list.residuals(now);
        for (std::size_t i = 1; i < res.size(); ++i)
            if (res[i] < res[i - 1]) {
                fail(rep.monotone_violations, "residuals decrease at " + std::to_string(i));
                break;
            }
        if (!res.empty() && res.front() < 0)
            fail(rep.monotone_violations, "negative head residual between steps");
    }

    // drain whatever is left so every time-out is accounted for
    now += 100000;
    auto drained = list.advance(now);
    auto fired = ref.advance(now);
    if (drained.expired.size() + drained.expired_disabled.size() != fired.size())
        fail(rep.oracle_mismatches, "final drain sizes differ");
    rep.fired += fired.size();
    return rep;
}

inline Report check_corpus(std::size_t sequences, std::uint64_t base_seed = 1)
{
    Report total;
    for (std::size_t i = 0; i < sequences; ++i)
        total += check_sequence(base_seed + i);
    return total;
}

} // namespace corpus
