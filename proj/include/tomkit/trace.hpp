#pragma once

#include <json.hpp>

#include <ostream>
#include <string>
#include <vector>

namespace tomkit {

using Record = nlohmann::ordered_json;

/// Line-delimited trace: one compact JSON object per line, fields in the
/// order they were added, so equal runs give byte-identical text.
class Trace {
public:
    void record(const Record& r) { lines_.push_back(r.dump()); }

    const std::vector<std::string>& lines() const noexcept { return lines_; }
    std::size_t size() const noexcept { return lines_.size(); }
    bool empty() const noexcept { return lines_.empty(); }

    std::string text() const
    {
        std::string out;
        for (const auto& l : lines_) {
            out += l;
            out += '\n';
        }
        return out;
    }

    void write(std::ostream& os) const
    {
        for (const auto& l : lines_)
            os << l << '\n';
    }

private:
    std::vector<std::string> lines_;
};

} // namespace tomkit
