#pragma once

#include "tomkit/error.hpp"

#include <cstdint>
#include <string>

namespace tomkit {

/// One tick is one virtual millisecond unless a scenario says otherwise.
using Tick = std::uint64_t;

/// Signed tick distance; residuals go negative when the head is overdue.
using TickDelta = std::int64_t;

/// Monotone tick counter standing in for the system clock register.
class VirtualClock {
public:
    VirtualClock() = default;
    explicit VirtualClock(Tick start) : now_(start) {}

    Tick now() const noexcept { return now_; }

    void advance_to(Tick t)
    {
        if (t < now_)
            throw TomError(Errc::clock_regression,
                           "clock moved from " + std::to_string(now_) + " to " + std::to_string(t));
        now_ = t;
    }

    void advance_by(Tick dt) { now_ += dt; }

private:
    Tick now_ = 0;
};

} // namespace tomkit
