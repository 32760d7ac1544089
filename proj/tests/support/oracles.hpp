#pragma once

// Independent reference implementations used to cross-check the analyses.
// They favour obviousness over speed: path enumeration instead of fixed
// points, text scanning instead of token tables, language completion rules
// instead of graph reachability.

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "xtract/candidates.hpp"
#include "xtract/dataflow.hpp"
#include "xtract/source_model.hpp"

namespace xtract::testing {

/// live_in per CFG node: v is live at n iff some simple path from n reaches a
/// use of v before any definite definition of v.
std::vector<std::set<std::string>> path_live_in(const Cfg& cfg);

/// Every run of consecutive siblings (top level and each body).
std::vector<std::vector<StmtId>> all_sibling_runs(const MethodModel& model);

/// A run is aligned when, on each of its lines, everything outside the run's
/// text is whitespace or comment.
bool text_aligned(const MethodModel& model, const std::vector<StmtId>& run);

struct OracleVerdict {
    bool accept = false;
    std::optional<RejectionCategory> category;
};

/// Extract-method preconditions checked straight from their definitions.
OracleVerdict oracle_check(const MethodModel& model, const Cfg& cfg, const std::vector<StmtId>& fragment);
/// Same, reusing a path_live_in result for `cfg`.
OracleVerdict oracle_check(const MethodModel& model, const Cfg& cfg, const std::vector<std::set<std::string>>& live,
                           const std::vector<StmtId>& fragment);

/// fragment inputs/outputs computed from path_live_in.
FragmentIo oracle_fragment_io(const MethodModel& model, const Cfg& cfg, const std::vector<StmtId>& fragment);
FragmentIo oracle_fragment_io(const MethodModel& model, const Cfg& cfg, const std::vector<std::set<std::string>>& live,
                              const std::vector<StmtId>& fragment);

/// A compilable class whose method `longMethod` spans about `lines` lines.
std::string generate_long_method(int lines, unsigned seed = 7);

}  // namespace xtract::testing
