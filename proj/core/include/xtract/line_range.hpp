#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace xtract {

// Inclusive, 1-based range of source lines. A range with last < first is empty.
struct LineRange {
    int first = 1;
    int last = 0;

    [[nodiscard]] bool empty() const { return last < first; }
    [[nodiscard]] int size() const { return empty() ? 0 : last - first + 1; }
    [[nodiscard]] bool contains(int line) const { return line >= first && line <= last; }
    [[nodiscard]] bool contains(const LineRange& other) const
    {
        return other.empty() || (!empty() && other.first >= first && other.last <= last);
    }

    friend bool operator==(const LineRange&, const LineRange&) = default;
    friend auto operator<=>(const LineRange&, const LineRange&) = default;
};

[[nodiscard]] LineRange intersect(const LineRange& a, const LineRange& b);

// "85-90"
[[nodiscard]] std::string to_string(const LineRange& range);

// Accepts "85-90", "85:90" and a single line "85".
[[nodiscard]] std::optional<LineRange> parse_line_range(std::string_view text);

}  // namespace xtract
