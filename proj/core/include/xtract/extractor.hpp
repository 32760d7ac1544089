#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "xtract/dataflow.hpp"
#include "xtract/ranking.hpp"
#include "xtract/source_model.hpp"

namespace xtract {

struct TypedName {
    std::string name;
    std::string type;

    friend bool operator==(const TypedName&, const TypedName&) = default;
};

struct ExtractPlan {
    std::vector<StmtId> fragment;
    LineRange lines;
    std::string new_name;
    /// Ordered by first use in the fragment. A read-then-written variable is
    /// both a parameter and the return variable.
    std::vector<TypedName> parameters;
    std::optional<TypedName> return_variable;
    bool return_declared_inside = false;
    /// Every path through the fragment returns or throws.
    bool all_paths_return = false;
    /// Declared outside, written inside, and neither passed in nor returned:
    /// redeclared at the top of the new method.
    std::vector<TypedName> locals_to_declare;
    std::string modifiers;        // "private" or "private static"
    std::string type_parameters;  // copied from the host
    std::string return_type;
    std::string exceptions_clause;
    std::string host_return_type;
    std::string unit_digest;

    /// "private int name(int a, String b) throws IOException"
    [[nodiscard]] std::string signature() const;
    /// The statement that replaces the fragment, without indentation.
    [[nodiscard]] std::string call_text() const;
};

/// Throws Error(plan_conflict) when the name is taken by a method of the same
/// arity or a parameter type cannot be written down.
[[nodiscard]] ExtractPlan plan(const MethodModel& model, const Cfg& cfg, const LivenessResult& live,
                               const std::vector<StmtId>& fragment, const LineRange& lines, const std::string& name);
[[nodiscard]] ExtractPlan plan(const MethodModel& model, const Cfg& cfg, const LivenessResult& live,
                               const RankedGroup& group);

struct TextEdit {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::string replacement;
};

struct EditScript {
    std::vector<TextEdit> edits;  // sorted, disjoint
    std::string diff;
};

struct ApplyResult {
    std::string new_text;
    EditScript script;
    LineRange call_line;
    LineRange new_method_lines;
};

/// Throws Error(stale_unit) when the unit differs from the one planned against
/// and Error(render_error) if the result does not parse.
[[nodiscard]] ApplyResult apply(const SourceUnit& unit, const MethodModel& model, const ExtractPlan& plan);

[[nodiscard]] std::string apply_edits(std::string_view text, const std::vector<TextEdit>& edits);

/// Unified diff (3 lines of context) of applying `edits` to `text`.
[[nodiscard]] std::string unified_diff(std::string_view text, const std::vector<TextEdit>& edits,
                                       const std::string& path, int context = 3);

}  // namespace xtract
