#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xtract/line_range.hpp"

namespace xtract {

struct OracleEntry {
    std::string id;
    std::filesystem::path file;
    std::string method_name;
    LineRange method_lines;
    LineRange extracted;
    std::optional<std::string> extracted_name;
    /// Statement-bearing lines of the host body. Empty: every line counts.
    std::vector<int> code_lines;

    [[nodiscard]] int host_loc() const { return method_lines.size(); }
};

struct LocSummary {
    int count = 0;
    int min = 0;
    int max = 0;
    double mean = 0;
    double median = 0;
};

struct OracleLoad {
    std::vector<OracleEntry> entries;
    std::vector<std::string> diagnostics;  // one per skipped line
    LocSummary host_loc;
};

/// Reads the JSONL oracle. Files resolve relative to the oracle's directory.
/// Unresolvable entries are skipped with a diagnostic; throws
/// Error(empty_oracle) when none resolve and Error(io_error) when the file
/// cannot be read.
[[nodiscard]] OracleLoad load_oracle(const std::filesystem::path& path);

[[nodiscard]] LocSummary summarize_loc(std::vector<int> locs);

/// Lines of deviation tolerated for a host of `host_loc` lines.
using Allowance = std::function<int(int host_loc, double tolerance)>;

/// floor(tolerance * host_loc), robust to binary rounding (0.03 * 200 is 6).
[[nodiscard]] int floor_allowance(int host_loc, double tolerance);

/// |suggested Δ oracle| <= allowance, over the given line sets.
[[nodiscard]] bool matches(const std::vector<int>& suggested_lines, const std::vector<int>& oracle_lines, int host_loc,
                           double tolerance, const Allowance& allowance = floor_allowance);
/// Same, with every line of both ranges counted.
[[nodiscard]] bool matches(const LineRange& suggested, const LineRange& oracle, int host_loc, double tolerance,
                           const Allowance& allowance = floor_allowance);

struct RankedRange {
    LineRange range;
    std::string name;
};

struct SourcedSuggestions {
    std::vector<RankedRange> ranked;
    /// Why candidates were dropped, e.g. "12-40 whole_body: ...".
    std::vector<std::string> trail;
    std::optional<std::string> error;
};

class SuggestionSource {
public:
    virtual ~SuggestionSource() = default;
    virtual SourcedSuggestions suggestions_for(const OracleEntry& entry, int k) = 0;
};

/// Suggestion-dump JSONL: {id, suggestions: [{start, end, name?}, ...]}, ranked.
class DumpSource : public SuggestionSource {
public:
    explicit DumpSource(std::map<std::string, std::vector<RankedRange>> dump) : dump_(std::move(dump)) {}
    static DumpSource load(const std::filesystem::path& path);

    SourcedSuggestions suggestions_for(const OracleEntry& entry, int k) override;

private:
    std::map<std::string, std::vector<RankedRange>> dump_;
};

struct EntryVerdict {
    std::string id;
    std::optional<int> matched_rank;  // 1-based
    std::optional<LineRange> matched_range;
    std::vector<std::string> trail;
    std::optional<std::string> error;
};

struct RunStats {
    int n = 0;
    double baseline = 0;
    double mean = 0;
    double sd = 0;
    double t = 0;
    double p = 1;
    /// sd == 0: t is 0 (mean == baseline) or infinite, p is 1 or 0.
    bool degenerate = false;
};

struct EvalReport {
    int k = 5;
    double tolerance = 0.03;
    std::vector<EntryVerdict> verdicts;
    int matched = 0;
    int total = 0;
    double recall = 0;
    std::optional<RunStats> stats;
};

struct EvalOptions {
    int k = 5;
    double tolerance = 0.03;
    Allowance allowance = floor_allowance;
};

/// An entry matches when any of its top-k suggestions does. Throws
/// Error(empty_oracle) on no entries.
[[nodiscard]] EvalReport evaluate(const std::vector<OracleEntry>& entries, SuggestionSource& source,
                                  const EvalOptions& options = {});

/// One-sample two-sided t-test of `recalls` against `baseline`. Throws
/// Error(insufficient_samples) below two samples.
[[nodiscard]] RunStats repeated_stats(const std::vector<double>& recalls, double baseline);

[[nodiscard]] std::string report_json(const EvalReport& report);
[[nodiscard]] std::string report_table(const EvalReport& report);

}  // namespace xtract
