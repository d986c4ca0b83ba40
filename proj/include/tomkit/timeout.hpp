#pragma once

#include "tomkit/clock.hpp"
#include "tomkit/error.hpp"
#include "tomkit/message.hpp"

#include <compare>
#include <cstdint>
#include <optional>
#include <string>

namespace tomkit {

/// (class, instance) pair; the class groups related time-outs, the instance
/// tells them apart (e.g. one watch per peer node).
struct TimeoutId {
    std::uint32_t class_id = 0;
    std::uint32_t instance_id = 0;

    friend constexpr auto operator<=>(const TimeoutId&, const TimeoutId&) = default;
};

inline std::string to_string(TimeoutId id)
{
    return std::to_string(id.class_id) + "." + std::to_string(id.instance_id);
}

/// What an alarm does: emit exactly one message to `target`.
struct ActionDescriptor {
    std::string message_type;
    Endpoint target;
    bool carries_instance_id = false;

    friend bool operator==(const ActionDescriptor&, const ActionDescriptor&) = default;
};

enum class Cyclic : bool { no = false, yes = true };
enum class Enabled : bool { no = false, yes = true };

struct Timeout {
    TimeoutId id;
    Tick deadline = 1;
    // Meaningful only inside a list: absolute offset from the list origin for
    // the head, distance from the predecessor's expiry otherwise.
    Tick running = 0;
    bool cyclic = false;
    bool enabled = true;
    // Unset means "use the manager handle's default action".
    std::optional<ActionDescriptor> action;

    friend bool operator==(const Timeout&, const Timeout&) = default;
};

inline Timeout declare(TimeoutId id, Cyclic cyclic, Enabled enabled, Tick deadline,
                       std::optional<ActionDescriptor> action = std::nullopt)
{
    if (deadline < 1)
        throw TomError(Errc::zero_deadline, "time-out " + to_string(id));
    Timeout t;
    t.id = id;
    t.deadline = deadline;
    t.cyclic = cyclic == Cyclic::yes;
    t.enabled = enabled == Enabled::yes;
    t.action = std::move(action);
    return t;
}

/// New deadline; an entry already inside a list keeps its position until renewed.
inline void set_deadline(Timeout& t, Tick deadline)
{
    if (deadline < 1)
        throw TomError(Errc::zero_deadline, "time-out " + to_string(t.id));
    t.deadline = deadline;
}

inline void set_action(Timeout& t, ActionDescriptor action) { t.action = std::move(action); }

/// The message an alarm emits. Alarms are self-addressed: sender == target.
inline Message alarm_message(const Timeout& t, const ActionDescriptor& action)
{
    Message m;
    m.type = action.message_type;
    m.from = action.target;
    m.to = action.target;
    m.class_id = t.id.class_id;
    m.instance_id = action.carries_instance_id ? t.id.instance_id : 0;
    return m;
}

} // namespace tomkit
