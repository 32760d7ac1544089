#include "xtract/candidates.hpp"

#include <algorithm>
#include <array>

namespace xtract {

std::string_view to_string(SuggestionState state)
{
    switch (state) {
    case SuggestionState::raw: return "raw";
    case SuggestionState::normalized: return "normalized";
    case SuggestionState::invalid: return "invalid";
    case SuggestionState::valid: return "valid";
    case SuggestionState::filtered: return "filtered";
    case SuggestionState::useful: return "useful";
    }
    return "raw";
}

namespace {

constexpr std::array<std::pair<RejectionCategory, std::string_view>, 9> kCategoryNames{{
    {RejectionCategory::out_of_bounds, "out_of_bounds"},
    {RejectionCategory::inverted_range, "inverted_range"},
    {RejectionCategory::unalignable, "unalignable"},
    {RejectionCategory::jump_crosses_boundary, "jump_crosses_boundary"},
    {RejectionCategory::multiple_outputs, "multiple_outputs"},
    {RejectionCategory::conditional_return, "conditional_return"},
    {RejectionCategory::whole_body, "whole_body"},
    {RejectionCategory::empty_fragment, "empty_fragment"},
    {RejectionCategory::name_invalid, "name_invalid"},
}};

Suggestion reject(Suggestion s, SuggestionState state, RejectionCategory category, std::string detail)
{
    s.state = state;
    s.reason = RejectionReason{category, std::move(detail)};
    return s;
}

bool contains_constructor_call(const MethodModel& model, const std::vector<StmtId>& run)
{
    return std::any_of(run.begin(), run.end(), [&](StmtId id) { return model.statement(id).constructor_call; });
}

std::string lines_text(const LineRange& r) { return to_string(r); }

}  // namespace

std::string_view to_string(RejectionCategory category)
{
    for (const auto& [c, name] : kCategoryNames) {
        if (c == category) return name;
    }
    return "unalignable";
}

std::optional<RejectionCategory> parse_rejection_category(std::string_view text)
{
    for (const auto& [c, name] : kCategoryNames) {
        if (name == text) return c;
    }
    return std::nullopt;
}

bool is_java_identifier(std::string_view name)
{
    static constexpr std::array<std::string_view, 53> kReserved{
        "abstract", "assert",     "boolean",   "break",     "byte",      "case",     "catch",        "char",
        "class",    "const",      "continue",  "default",   "do",        "double",   "else",         "enum",
        "extends",  "final",      "finally",   "float",     "for",       "goto",     "if",           "implements",
        "import",   "instanceof", "int",       "interface", "long",      "native",   "new",          "package",
        "private",  "protected",  "public",    "return",    "short",     "static",   "strictfp",     "super",
        "switch",   "synchronized", "this",    "throw",     "throws",    "transient", "try",         "void",
        "volatile", "while",      "true",      "false",     "null",
    };
    if (name.empty() || name == "_") return false;
    auto start_ok = [](unsigned char c) { return std::isalpha(c) || c == '_' || c == '$' || c >= 0x80; };
    auto part_ok = [&](unsigned char c) { return start_ok(c) || std::isdigit(c); };
    if (!start_ok(static_cast<unsigned char>(name.front()))) return false;
    if (!std::all_of(name.begin(), name.end(), [&](char c) { return part_ok(static_cast<unsigned char>(c)); })) {
        return false;
    }
    return std::find(kReserved.begin(), kReserved.end(), name) == kReserved.end();
}

Suggestion normalize(const MethodModel& model, Suggestion s)
{
    s.state = SuggestionState::normalized;
    s.normalized_range.reset();
    s.fragment.reset();
    LineRange span{std::min(s.raw_range.first, s.raw_range.last), std::max(s.raw_range.first, s.raw_range.last)};
    if (s.raw_range.first > s.raw_range.last) return s;  // inverted_range
    LineRange clamped = intersect(span, model.body_span);
    if (clamped.empty()) return s;  // out_of_bounds

    RangeSelection sel = statements_in_range(model, clamped);
    std::optional<AlignedRun> run;
    if (auto* aligned = std::get_if<AlignedRun>(&sel)) {
        run = *aligned;
        if (run->statements.empty()) run->lines = clamped;
    } else {
        run = std::get<NotAligned>(sel).enclosing;
    }
    if (!run || contains_constructor_call(model, run->statements)) return s;  // unalignable
    s.normalized_range = run->lines;
    s.fragment = run->statements;
    return s;
}

MethodAnalysis::MethodAnalysis(const MethodModel& m) : model(&m), cfg(build_cfg(m)), live(liveness(cfg, m)) {}

std::optional<RejectionReason> check_fragment(const MethodModel& model, const Cfg& cfg, const LivenessResult& live,
                                              const std::vector<StmtId>& fragment)
{
    std::set<StmtId> inside;
    bool has_return = false;
    for (StmtId top : fragment) {
        for (StmtId k : model.subtree(top)) inside.insert(k);
    }
    for (StmtId k : inside) {
        const Statement& s = model.statement(k);
        if (s.kind == StmtKind::return_) has_return = true;
        if (!s.jump || s.jump->to_exit) continue;
        bool unsupported = std::binary_search(cfg.unsupported.begin(), cfg.unsupported.end(), k);
        if (unsupported || !s.jump->target || !inside.count(*s.jump->target)) {
            std::string what(to_string(s.jump->kind));
            if (s.jump->label) what += " " + *s.jump->label;
            return RejectionReason{RejectionCategory::jump_crosses_boundary,
                                   "'" + what + "' at line " + std::to_string(s.span.lines.first)
                                       + (unsupported ? " names a label outside the method's statements"
                                                      : " leaves the fragment")};
        }
    }

    bool all_exit = exits_abruptly(model, cfg, fragment);
    if (has_return && !all_exit) {
        return RejectionReason{RejectionCategory::conditional_return,
                               "the fragment returns on some paths but completes normally on others"};
    }

    FragmentIo io = fragment_io(model, cfg, live, fragment);
    auto names = [](const std::set<std::string>& set) {
        std::string out;
        for (const auto& n : set) out += (out.empty() ? "" : ", ") + n;
        return out;
    };
    if (io.outputs.size() > 1) {
        return RejectionReason{RejectionCategory::multiple_outputs,
                               "values needed after the fragment: " + names(io.outputs)};
    }
    if (io.outputs.size() == 1 && all_exit) {
        return RejectionReason{RejectionCategory::multiple_outputs,
                               "the fragment returns on all paths and also defines " + names(io.outputs)};
    }
    if (io.outputs.size() == 1) {
        const std::string& out = *io.outputs.begin();
        bool declared_inside = false;
        for (StmtId top : fragment) {
            const auto& d = model.statement(top).declares;
            if (std::find(d.begin(), d.end(), out) != d.end()) declared_inside = true;
        }
        if (declared_inside && !definitely_assigned(model, cfg, fragment).count(out)) {
            return RejectionReason{RejectionCategory::multiple_outputs,
                                   "'" + out + "' is declared in the fragment but not assigned on every path"};
        }
    }
    return std::nullopt;
}

Suggestion validate(const MethodModel& model, const Cfg& cfg, const LivenessResult& live, Suggestion s)
{
    LineRange span{std::min(s.raw_range.first, s.raw_range.last), std::max(s.raw_range.first, s.raw_range.last)};
    if (intersect(span, model.body_span).empty()) {
        return reject(std::move(s), SuggestionState::invalid, RejectionCategory::out_of_bounds,
                      "lines " + lines_text(span) + " lie outside the body (" + lines_text(model.body_span) + ")");
    }
    if (s.raw_range.first > s.raw_range.last) {
        return reject(std::move(s), SuggestionState::invalid, RejectionCategory::inverted_range,
                      "line_start " + std::to_string(s.raw_range.first) + " is after line_end "
                          + std::to_string(s.raw_range.last));
    }
    if (!s.normalized_range || !s.fragment) {
        return reject(std::move(s), SuggestionState::invalid, RejectionCategory::unalignable,
                      "no whole-statement sequence below the method body encloses lines " + lines_text(span));
    }
    if (!is_java_identifier(s.proposed_name)) {
        return reject(std::move(s), SuggestionState::invalid, RejectionCategory::name_invalid,
                      "'" + s.proposed_name + "' is not a legal Java method name");
    }
    for (const auto& m : model.type_methods) {
        if (m.name == s.proposed_name) {
            return reject(std::move(s), SuggestionState::invalid, RejectionCategory::name_invalid,
                          "'" + m.name + "' is already declared at line " + std::to_string(m.lines.first));
        }
    }
    if (!s.fragment->empty()) {
        if (auto why = check_fragment(model, cfg, live, *s.fragment)) {
            return reject(std::move(s), SuggestionState::invalid, why->category, why->detail);
        }
    }
    s.state = SuggestionState::valid;
    return s;
}

Suggestion filter_useful(const MethodModel& model, Suggestion s, const FilterOptions& options)
{
    if (!s.fragment || s.fragment->empty()) {
        return reject(std::move(s), SuggestionState::filtered, RejectionCategory::empty_fragment,
                      "lines hold no statements");
    }
    auto body = model.code_lines();
    auto frag = model.code_lines(*s.normalized_range);
    if (frag == body) {
        return reject(std::move(s), SuggestionState::filtered, RejectionCategory::whole_body,
                      "the fragment is the entire method body");
    }
    if (options.near_whole_body && !body.empty()
        && static_cast<double>(frag.size()) >= *options.near_whole_body * static_cast<double>(body.size())) {
        return reject(std::move(s), SuggestionState::filtered, RejectionCategory::whole_body,
                      "the fragment covers nearly the entire method body");
    }
    s.state = SuggestionState::useful;
    return s;
}

}  // namespace xtract
