#pragma once

#include "tomkit/clock.hpp"
#include "tomkit/manager.hpp"

#include <chrono>
#include <stop_token>
#include <thread>

namespace tomkit {

/// Wall-clock adapter: maps elapsed steady time onto the virtual clock and
/// steps the manager once per tick. Demos only; no determinism guarantee.
/// Alarms are emitted on the driver thread.
class LiveDriver {
public:
    LiveDriver(TimeoutManager& mgr, VirtualClock& clock,
               std::chrono::microseconds tick = std::chrono::milliseconds(1))
        : mgr_(mgr), clock_(clock), tick_(tick)
    {}

    ~LiveDriver() { stop(); }

    void start()
    {
        if (thread_.joinable())
            return;
        thread_ = std::jthread([this](std::stop_token st) { loop(st); });
    }

    void stop()
    {
        if (thread_.joinable()) {
            thread_.request_stop();
            thread_.join();
        }
    }

private:
    void loop(std::stop_token st)
    {
        const auto origin = std::chrono::steady_clock::now();
        const Tick base = clock_.now();
        while (!st.stop_requested()) {
            const Tick next = clock_.now() + 1;
            std::this_thread::sleep_until(origin + tick_ * static_cast<long long>(next - base));
            const auto elapsed = std::chrono::steady_clock::now() - origin;
            clock_.advance_to(base + static_cast<Tick>(elapsed / tick_));
            mgr_.step();
        }
    }

    TimeoutManager& mgr_;
    VirtualClock& clock_;
    std::chrono::microseconds tick_;
    std::jthread thread_;
};

} // namespace tomkit
