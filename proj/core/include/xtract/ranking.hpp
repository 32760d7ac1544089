#pragma once

#include <optional>
#include <string>
#include <vector>

#include "xtract/candidates.hpp"

namespace xtract {

struct RankedGroup {
    LineRange canonical_range;
    std::vector<StmtId> fragment;
    int frequency = 0;
    std::vector<std::string> names;  // sorted, with repeats
    std::string representative_name;
    std::vector<int> members;        // suggestion ids, sorted
};

struct AggregateOptions {
    /// When set, a group merges into a higher-ranked group whose line range
    /// overlaps it with at least this Jaccard index.
    std::optional<double> overlap_jaccard = std::nullopt;
};

/// Groups useful suggestions by normalized range. Output is sorted by range.
/// Throws std::invalid_argument if any suggestion is not useful.
[[nodiscard]] std::vector<RankedGroup> aggregate(const std::vector<Suggestion>& useful,
                                                 const AggregateOptions& options = {});

/// Frequency descending, then more lines, then earlier start; first top_n.
[[nodiscard]] std::vector<RankedGroup> rank(std::vector<RankedGroup> groups, int top_n = 3);

/// Most frequent name; ties go to the lexicographically least.
[[nodiscard]] std::string modal_name(const std::vector<std::string>& names);

[[nodiscard]] double line_jaccard(const LineRange& a, const LineRange& b);

}  // namespace xtract
