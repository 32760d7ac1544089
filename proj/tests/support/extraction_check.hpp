#pragma once

#include <string>
#include <vector>

#include "xtract/candidates.hpp"
#include "xtract/extractor.hpp"

namespace xtract::testing {

/// Plans and applies `run` as a method called `name`, then checks the
/// extractor's invariants on the result: the output re-parses, the host
/// loses the fragment's statements and gains the call, the fragment text is
/// conserved in the new method, and re-analysing the new method gives inputs
/// within its parameters and outputs within its return variable. Returns one
/// message per violation.
std::vector<std::string> extraction_violations(const SourceUnit& unit, const MethodModel& model,
                                               const MethodAnalysis& analysis, const std::vector<StmtId>& run,
                                               const std::string& name);

}  // namespace xtract::testing
