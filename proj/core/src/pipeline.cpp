#include "xtract/pipeline.hpp"

#include <sstream>

#include <nlohmann/json.hpp>

#include "xtract/error.hpp"

namespace xtract {

using nlohmann::json;

SuggestResult process(const MethodModel& model, std::vector<CompletionRecord> completions,
                      const std::string& provider_name, const PipelineOptions& options)
{
    SuggestResult r;
    r.path = model.owner.path();
    r.method = model.name;
    r.method_lines = model.declaration_span;
    r.unit_digest = model.owner.digest();
    if (!completions.empty()) r.request_digest = completions.front().request_digest;

    MethodAnalysis analysis(model);
    std::vector<Suggestion> useful;
    for (const auto& c : completions) {
        if (c.failed) continue;
        for (Suggestion s : c.parsed) {
            s.id = static_cast<int>(r.suggestions.size());
            s.provenance = {c.iteration, provider_name};
            s = validate(model, analysis.cfg, analysis.live, normalize(model, std::move(s)));
            if (s.state == SuggestionState::valid) s = filter_useful(model, std::move(s), options.filter);
            if (s.state == SuggestionState::useful) useful.push_back(s);
            r.suggestions.push_back(std::move(s));
        }
    }
    r.completions = std::move(completions);

    for (auto& g : rank(aggregate(useful, options.aggregate), options.top_n)) {
        GroupPreview p;
        try {
            ExtractPlan plan_ = plan(model, analysis.cfg, analysis.live, g);
            p.signature = plan_.signature();
            p.call = plan_.call_text();
        } catch (const Error& e) {
            p.plan_error = e.what();
        }
        p.group = std::move(g);
        r.ranked.push_back(std::move(p));
    }
    return r;
}

SuggestResult suggest(const MethodModel& model, Provider& provider, const ProviderConfig& config,
                      const PromptTemplate& tmpl, const PipelineOptions& options)
{
    PromptSpec prompt = build_prompt(model, tmpl, options.prompt);
    return process(model, sample(provider, prompt, config), provider.name(), options);
}

RangeExtraction extract_range(const SourceUnit& unit, const MethodModel& model, const LineRange& range,
                              const std::string& name, const FilterOptions& filter)
{
    MethodAnalysis analysis(model);
    RangeExtraction out;
    Suggestion s;
    s.proposed_name = name;
    s.raw_range = range;
    s = validate(model, analysis.cfg, analysis.live, normalize(model, std::move(s)));
    if (s.state == SuggestionState::valid) s = filter_useful(model, std::move(s), filter);
    out.suggestion = s;
    if (s.state != SuggestionState::useful) return out;
    out.plan = plan(model, analysis.cfg, analysis.live, *s.fragment, *s.normalized_range, name);
    out.result = apply(unit, model, *out.plan);
    return out;
}

std::string trail_line(const Suggestion& s)
{
    std::string range = to_string(s.normalized_range ? *s.normalized_range : s.raw_range);
    if (s.raw_range.first > s.raw_range.last) {
        range = std::to_string(s.raw_range.first) + "-" + std::to_string(s.raw_range.last);
    }
    std::string out = range + " " + s.proposed_name;
    if (s.reason) out += " " + std::string(to_string(s.reason->category)) + ": " + s.reason->detail;
    return out;
}

namespace {

json suggestion_json(const Suggestion& s)
{
    json j{{"id", s.id},
           {"name", s.proposed_name},
           {"raw_range", {s.raw_range.first, s.raw_range.last}},
           {"state", std::string(to_string(s.state))},
           {"iteration", s.provenance.iteration}};
    j["normalized_range"] = s.normalized_range ? json{s.normalized_range->first, s.normalized_range->last} : json(nullptr);
    if (s.reason) j["reason"] = {{"category", std::string(to_string(s.reason->category))}, {"detail", s.reason->detail}};
    return j;
}

}  // namespace

std::string to_json(const SuggestResult& r)
{
    json completions = json::array();
    for (const auto& c : r.completions) {
        completions.push_back({{"iteration", c.iteration}, {"failed", c.failed}, {"diagnostics", c.diagnostics}});
    }
    json suggestions = json::array();
    for (const auto& s : r.suggestions) suggestions.push_back(suggestion_json(s));
    json ranked = json::array();
    for (const auto& p : r.ranked) {
        json g{{"name", p.group.representative_name},
               {"range", {p.group.canonical_range.first, p.group.canonical_range.last}},
               {"lines", p.group.canonical_range.size()},
               {"statements", p.group.fragment.size()},
               {"frequency", p.group.frequency},
               {"names", p.group.names},
               {"members", p.group.members},
               {"signature", p.signature},
               {"call", p.call}};
        if (p.plan_error) g["plan_error"] = *p.plan_error;
        ranked.push_back(std::move(g));
    }
    json j{{"path", r.path},
           {"method", r.method},
           {"method_range", {r.method_lines.first, r.method_lines.last}},
           {"unit_digest", r.unit_digest},
           {"request_digest", r.request_digest},
           {"completions", std::move(completions)},
           {"suggestions", std::move(suggestions)},
           {"ranked", std::move(ranked)}};
    return j.dump(2) + "\n";
}

std::string to_text(const SuggestResult& r)
{
    std::ostringstream out;
    out << r.path << " " << r.method << " (lines " << to_string(r.method_lines) << ")\n";
    int failed = 0;
    for (const auto& c : r.completions) failed += c.failed ? 1 : 0;
    out << r.completions.size() << " completions";
    if (failed) out << " (" << failed << " failed)";
    out << ", " << r.suggestions.size() << " suggestions\n";
    if (r.ranked.empty()) {
        out << "no suggestions\n";
    } else {
        int i = 0;
        for (const auto& p : r.ranked) {
            out << ++i << ". " << p.group.representative_name << "  lines " << to_string(p.group.canonical_range)
                << "  (" << p.group.canonical_range.size() << " lines, frequency " << p.group.frequency << ")\n";
            if (p.plan_error) out << "   cannot plan: " << *p.plan_error << "\n";
            else out << "   " << p.signature << "\n";
        }
    }
    bool header = false;
    for (const auto& s : r.suggestions) {
        if (!s.reason) continue;
        if (!header) out << "rejected:\n";
        header = true;
        out << "  #" << s.id << " " << trail_line(s) << "\n";
    }
    return out.str();
}

SourcedSuggestions PipelineSource::suggestions_for(const OracleEntry& entry, int k)
{
    SourcedSuggestions out;
    try {
        auto unit = load_unit(entry.file);
        auto model = locate_method(unit, MethodLocator{entry.method_lines.first});
        PipelineOptions options = options_;
        options.top_n = k;
        auto r = suggest(model, provider_, config_, tmpl_, options);
        for (const auto& p : r.ranked) out.ranked.push_back({p.group.canonical_range, p.group.representative_name});
        for (const auto& s : r.suggestions) {
            if (s.reason) out.trail.push_back(trail_line(s));
        }
    } catch (const Error& e) {
        out.error = e.what();
    }
    return out;
}

}  // namespace xtract
