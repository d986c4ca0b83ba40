#pragma once

#include "tomkit/manager.hpp"
#include "tomkit/timeout.hpp"

#include <future>
#include <vector>

namespace tomkit {

/// A TOM request produced by a protocol transition; the hosting process
/// forwards it to its handle. Keeps the transitions themselves free of I/O.
struct TomCommand {
    enum class Kind { insert, erase, renew, enable, disable };

    Kind kind = Kind::insert;
    Timeout timeout; // insert, renew
    TimeoutId id;    // erase, enable, disable

    static TomCommand insert(Timeout t) { return {Kind::insert, std::move(t), {}}; }
    static TomCommand renew(Timeout t) { return {Kind::renew, std::move(t), {}}; }
    static TomCommand erase(TimeoutId id) { return {Kind::erase, {}, id}; }
    static TomCommand enable(TimeoutId id) { return {Kind::enable, {}, id}; }
    static TomCommand disable(TimeoutId id) { return {Kind::disable, {}, id}; }

    TimeoutId target() const { return kind == Kind::insert || kind == Kind::renew ? timeout.id : id; }

    friend bool operator==(const TomCommand&, const TomCommand&) = default;
};

inline std::future<Status> submit(TomHandle& h, const TomCommand& c)
{
    switch (c.kind) {
    case TomCommand::Kind::insert:  return h.insert(c.timeout);
    case TomCommand::Kind::renew:   return h.renew(c.timeout);
    case TomCommand::Kind::erase:   return h.erase(c.id);
    case TomCommand::Kind::enable:  return h.enable(c.id);
    case TomCommand::Kind::disable: return h.disable(c.id);
    }
    return h.erase(c.id);
}

inline void submit_all(TomHandle& h, const std::vector<TomCommand>& cs)
{
    for (const auto& c : cs)
        submit(h, c);
}

} // namespace tomkit
