#include "xtract/line_range.hpp"

#include <algorithm>
#include <charconv>

namespace xtract {

LineRange intersect(const LineRange& a, const LineRange& b)
{
    return LineRange{std::max(a.first, b.first), std::min(a.last, b.last)};
}

std::string to_string(const LineRange& range)
{
    return std::to_string(range.first) + "-" + std::to_string(range.last);
}

namespace {

std::optional<int> parse_int(std::string_view s)
{
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    int value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
        return std::nullopt;
    }
    return value;
}

}  // namespace

std::optional<LineRange> parse_line_range(std::string_view text)
{
    auto sep = text.find_first_of("-:", 1);
    if (sep == std::string_view::npos) {
        auto line = parse_int(text);
        if (!line) return std::nullopt;
        return LineRange{*line, *line};
    }
    auto a = parse_int(text.substr(0, sep));
    auto b = parse_int(text.substr(sep + 1));
    if (!a || !b) return std::nullopt;
    return LineRange{*a, *b};
}

}  // namespace xtract
