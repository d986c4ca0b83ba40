#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tomkit {

enum class Errc {
    ok,
    zero_deadline,
    duplicate_id,
    not_found,
    clock_regression,
    closed,
    unknown_sender,
    no_peers,
    empty_candidate_set,
    unknown_node,
};

constexpr std::string_view to_string(Errc e) noexcept
{
    switch (e) {
    case Errc::ok:                  return "Ok";
    case Errc::zero_deadline:       return "ZeroDeadline";
    case Errc::duplicate_id:        return "DuplicateId";
    case Errc::not_found:           return "NotFound";
    case Errc::clock_regression:    return "ClockRegression";
    case Errc::closed:              return "Closed";
    case Errc::unknown_sender:      return "UnknownSender";
    case Errc::no_peers:            return "NoPeers";
    case Errc::empty_candidate_set: return "EmptyCandidateSet";
    case Errc::unknown_node:        return "UnknownNode";
    }
    return "?";
}

/// Error raised by the time-out list, the manager and the protocol automata.
class TomError : public std::runtime_error {
public:
    explicit TomError(Errc code, const std::string& what = {})
        : std::runtime_error(what.empty() ? std::string(to_string(code))
                                          : std::string(to_string(code)) + ": " + what)
        , code_(code)
    {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

/// Scenario configuration error. `line` is 1-based; 0 means the file as a whole.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::size_t line, std::string reason)
        : std::runtime_error(line == 0 ? reason : "line " + std::to_string(line) + ": " + reason)
        , line_(line)
        , reason_(std::move(reason))
    {}

    std::size_t line() const noexcept { return line_; }
    const std::string& reason() const noexcept { return reason_; }

private:
    std::size_t line_;
    std::string reason_;
};

} // namespace tomkit
