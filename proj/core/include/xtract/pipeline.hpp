#pragma once

#include <optional>
#include <string>
#include <vector>

#include "xtract/candidates.hpp"
#include "xtract/eval.hpp"
#include "xtract/extractor.hpp"
#include "xtract/provider.hpp"
#include "xtract/ranking.hpp"
#include "xtract/source_model.hpp"

namespace xtract {

struct PipelineOptions {
    int top_n = 3;
    FilterOptions filter;
    AggregateOptions aggregate;
    PromptOptions prompt;
};

struct GroupPreview {
    RankedGroup group;
    std::string signature;  // empty when planning failed
    std::string call;
    std::optional<std::string> plan_error;
};

struct SuggestResult {
    std::string path;
    std::string method;
    LineRange method_lines;
    std::string unit_digest;
    std::string request_digest;
    std::vector<CompletionRecord> completions;
    /// Every parsed suggestion in its terminal state, ids in completion order.
    std::vector<Suggestion> suggestions;
    std::vector<GroupPreview> ranked;
};

/// Everything after sampling: parse, normalize, validate, filter, aggregate,
/// rank and preview.
[[nodiscard]] SuggestResult process(const MethodModel& model, std::vector<CompletionRecord> completions,
                                    const std::string& provider_name, const PipelineOptions& options = {});

/// The whole pipeline for one method.
[[nodiscard]] SuggestResult suggest(const MethodModel& model, Provider& provider, const ProviderConfig& config,
                                    const PromptTemplate& tmpl, const PipelineOptions& options = {});

/// "12-40 whole_body: the fragment is the entire method body"
[[nodiscard]] std::string trail_line(const Suggestion& s);

[[nodiscard]] std::string to_json(const SuggestResult& result);
[[nodiscard]] std::string to_text(const SuggestResult& result);

struct RangeExtraction {
    /// Terminal; `reason` is set when the range was rejected.
    Suggestion suggestion;
    std::optional<ExtractPlan> plan;
    std::optional<ApplyResult> result;
};

/// normalize -> validate -> filter -> plan -> apply for a user-chosen range.
/// Planning and rendering errors propagate.
[[nodiscard]] RangeExtraction extract_range(const SourceUnit& unit, const MethodModel& model, const LineRange& range,
                                            const std::string& name, const FilterOptions& filter = {});

/// Eval source that runs the pipeline on each entry's host.
class PipelineSource : public SuggestionSource {
public:
    PipelineSource(Provider& provider, ProviderConfig config, PromptTemplate tmpl, PipelineOptions options = {})
        : provider_(provider), config_(std::move(config)), tmpl_(std::move(tmpl)), options_(options)
    {
    }

    SourcedSuggestions suggestions_for(const OracleEntry& entry, int k) override;

private:
    Provider& provider_;
    ProviderConfig config_;
    PromptTemplate tmpl_;
    PipelineOptions options_;
};

}  // namespace xtract
