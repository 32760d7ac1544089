#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "xtract/dataflow.hpp"
#include "xtract/source_model.hpp"

namespace xtract {

enum class SuggestionState { raw, normalized, invalid, valid, filtered, useful };

[[nodiscard]] std::string_view to_string(SuggestionState state);

enum class RejectionCategory {
    out_of_bounds,
    inverted_range,
    unalignable,
    jump_crosses_boundary,
    multiple_outputs,
    conditional_return,
    whole_body,
    empty_fragment,
    name_invalid,
};

[[nodiscard]] std::string_view to_string(RejectionCategory category);
[[nodiscard]] std::optional<RejectionCategory> parse_rejection_category(std::string_view text);

struct RejectionReason {
    RejectionCategory category = RejectionCategory::unalignable;
    std::string detail;
};

struct Provenance {
    int iteration = 0;
    std::string provider;
};

struct Suggestion {
    int id = 0;
    std::string proposed_name;
    /// As emitted; first > last is preserved for inverted ranges.
    LineRange raw_range;
    std::optional<LineRange> normalized_range;
    std::optional<std::vector<StmtId>> fragment;
    SuggestionState state = SuggestionState::raw;
    /// Set exactly when state is invalid or filtered.
    std::optional<RejectionReason> reason;
    Provenance provenance;

    [[nodiscard]] bool terminal() const
    {
        return state == SuggestionState::invalid || state == SuggestionState::filtered
               || state == SuggestionState::useful;
    }
};

/// Clamps the raw range to the body and snaps it outward to whole statements.
/// Leaves normalized_range empty when no aligned sequence encloses it.
[[nodiscard]] Suggestion normalize(const MethodModel& model, Suggestion s);

/// Shared analyses for validating many suggestions against one method.
struct MethodAnalysis {
    const MethodModel* model = nullptr;
    Cfg cfg;
    LivenessResult live;

    explicit MethodAnalysis(const MethodModel& m);
};

/// Checks, in order: out_of_bounds, inverted_range, unalignable, name_invalid,
/// jump_crosses_boundary, conditional_return, multiple_outputs.
[[nodiscard]] Suggestion validate(const MethodModel& model, const Cfg& cfg, const LivenessResult& live,
                                  Suggestion s);

struct FilterOptions {
    /// When set, fragments covering at least this share of the body's
    /// statement-bearing lines are also filtered as whole_body.
    std::optional<double> near_whole_body = std::nullopt;
};

[[nodiscard]] Suggestion filter_useful(const MethodModel& model, Suggestion s, const FilterOptions& options = {});

/// Lexically legal Java identifier that is not a reserved word or literal.
[[nodiscard]] bool is_java_identifier(std::string_view name);

/// The validator's checks 5-7 for an aligned, non-empty fragment. Returns the
/// first failing category and detail.
[[nodiscard]] std::optional<RejectionReason> check_fragment(const MethodModel& model, const Cfg& cfg,
                                                            const LivenessResult& live,
                                                            const std::vector<StmtId>& fragment);

}  // namespace xtract
