#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace tomkit {

using NodeId = std::uint32_t;

/// Port of a process on its node. Every node hosts a main process and,
/// for the DIR net, an I'm-Alive task.
enum class Port : std::uint8_t { main = 0, iat = 1 };

struct Endpoint {
    NodeId node = 0;
    Port port = Port::main;

    friend constexpr auto operator<=>(const Endpoint&, const Endpoint&) = default;
};

/// Typed envelope; the only event currency once time-based constructs have
/// been turned into alarms.
struct Message {
    std::string type;
    Endpoint from;
    Endpoint to;
    std::uint32_t class_id = 0;
    std::uint32_t instance_id = 0;
    std::int64_t payload = 0;

    friend bool operator==(const Message&, const Message&) = default;
};

} // namespace tomkit
