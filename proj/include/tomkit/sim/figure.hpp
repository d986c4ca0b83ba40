#pragma once

#include "tomkit/clock.hpp"
#include "tomkit/manager.hpp"
#include "tomkit/timeout.hpp"
#include "tomkit/trace.hpp"

#include <array>
#include <string>
#include <vector>

namespace tomkit::sim {

/// Four time-outs A, B, C, D inserted into one list at 0, 100, 170 and 350.
struct FigureReplay {
    struct Snapshot {
        Tick tick = 0;
        std::string inserted;
        std::vector<std::string> ids;
        std::vector<Tick> running;
    };
    struct Firing {
        std::string id;
        Tick tick = 0;
    };

    std::vector<Snapshot> snapshots; // list contents after each insertion
    std::vector<Firing> firings;
    Trace trace;
};

inline FigureReplay replay_figure()
{
    struct Step {
        const char* name;
        Tick at;
        Tick deadline;
    };
    constexpr std::array<Step, 4> steps{{{"A", 0, 330}, {"B", 100, 400}, {"C", 170, 510}, {"D", 350, 230}}};
    const auto name_of = [](const TimeoutId& id) { return std::string(1, static_cast<char>('A' + id.class_id - 1)); };

    FigureReplay out;
    VirtualClock clock;
    TimeoutManager mgr(clock, [&](Message m) {
        const std::string id = name_of({m.class_id, 0});
        out.firings.push_back({id, clock.now()});
        Record r;
        r["tick"] = clock.now();
        r["fired"] = id;
        out.trace.record(r);
    });
    auto h = mgr.tom_init({"ALARM", {0, Port::main}, false});

    std::size_t next = 0;
    for (Tick t = 0; t <= 700; ++t) {
        clock.advance_to(t);
        const bool inserting = next < steps.size() && steps[next].at == t;
        if (inserting) {
            const auto& s = steps[next];
            h.insert(declare({static_cast<std::uint32_t>(next + 1), 0}, Cyclic::no, Enabled::yes, s.deadline));
        }
        mgr.step();
        if (inserting) {
            FigureReplay::Snapshot snap{t, steps[next].name, {}, {}};
            Record r;
            r["tick"] = t;
            r["inserted"] = snap.inserted;
            auto list = Record::array();
            for (const auto& e : mgr.list(h.list_id())->entries()) {
                snap.ids.push_back(name_of(e.id));
                snap.running.push_back(e.running);
                list.push_back(Record{{"id", name_of(e.id)}, {"running", e.running}});
            }
            r["list"] = std::move(list);
            out.trace.record(r);
            out.snapshots.push_back(std::move(snap));
            ++next;
        }
    }
    return out;
}

} // namespace tomkit::sim
