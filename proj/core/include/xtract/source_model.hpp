#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "xtract/line_range.hpp"

namespace xtract {

namespace detail {
struct UnitData;
}

/// A parsed Java compilation unit.
///
/// Cheap to copy: the text, line index and syntax tree are shared and never
/// mutated after parse_unit returns, so a unit may be read from any number of
/// threads.
class SourceUnit {
public:
    SourceUnit() = default;

    [[nodiscard]] const std::string& path() const;
    [[nodiscard]] const std::string& text() const;

    /// Byte offset of the start of each line; index 0 is line 1.
    [[nodiscard]] const std::vector<std::size_t>& line_index() const;
    [[nodiscard]] int line_count() const;
    [[nodiscard]] std::size_t line_start(int line) const;
    /// End of the line including its newline (or end of text).
    [[nodiscard]] std::size_t line_end(int line) const;
    /// Line content without the trailing newline.
    [[nodiscard]] std::string_view line_text(int line) const;
    [[nodiscard]] int line_of_byte(std::size_t offset) const;

    /// True when the line carries at least one non-comment token.
    [[nodiscard]] bool is_code_line(int line) const;

    /// Extent of the non-comment tokens touching a line, as byte offsets.
    /// Returns nullopt for blank and comment-only lines.
    struct TokenBounds {
        std::size_t first_begin;
        std::size_t last_end;
    };
    [[nodiscard]] std::optional<TokenBounds> token_bounds(int line) const;

    /// SHA-256 of the text, lowercase hex.
    [[nodiscard]] const std::string& digest() const;

    [[nodiscard]] const detail::UnitData& data() const { return *data_; }
    [[nodiscard]] bool valid() const { return data_ != nullptr; }

private:
    friend SourceUnit parse_unit(std::string text, std::string path);
    std::shared_ptr<const detail::UnitData> data_;
};

/// Parses Java source. Throws ParseError when the grammar rejects the input
/// (including invalid UTF-8).
[[nodiscard]] SourceUnit parse_unit(std::string text, std::string path);

/// Reads a file as UTF-8 and parses it. Throws Error(io_error) when unreadable.
[[nodiscard]] SourceUnit load_unit(const std::filesystem::path& path);

using StmtId = int;

enum class StmtKind {
    declaration,
    expression,
    if_,
    loop,
    switch_,
    try_,
    return_,
    break_,
    continue_,
    throw_,
    block,
    other,
};

[[nodiscard]] std::string_view to_string(StmtKind kind);

enum class LoopKind { none, for_, foreach, while_, do_ };

enum class BodyRole {
    block,
    then_branch,
    else_branch,
    loop_body,
    try_block,
    catch_block,
    finally_block,
    case_group,
    case_rule,
};

struct SourceSpan {
    LineRange lines;
    int start_column = 0;  // 0-based byte column of the first token
    int end_column = 0;    // 0-based byte column just past the last token
    std::size_t start_byte = 0;
    std::size_t end_byte = 0;
};

/// Local-variable facts of one CFG step, in evaluation order: `uses` holds
/// only upward-exposed reads (a read after a definite write in the same step
/// is not recorded). `may_defs` are writes that happen on some paths only
/// (inside ?:, the right operand of && or ||, switch-expression arms).
struct FlowFacts {
    std::set<std::string> defs;
    std::set<std::string> may_defs;
    std::set<std::string> uses;

    [[nodiscard]] bool empty() const { return defs.empty() && may_defs.empty() && uses.empty(); }
    friend bool operator==(const FlowFacts&, const FlowFacts&) = default;
};

enum class JumpKind { break_, continue_, return_, throw_ };

[[nodiscard]] std::string_view to_string(JumpKind kind);

struct Jump {
    JumpKind kind = JumpKind::return_;
    std::optional<std::string> label;
    /// Loop/switch/labeled statement for break and continue.
    std::optional<StmtId> target;
    /// return and throw leave the method.
    bool to_exit = false;
    /// Labeled jump whose label is not declared by an enclosing statement.
    bool unresolved = false;
};

/// One ordered list of child statements: a block, a branch, a catch body,
/// a switch group. Statements of one Body are siblings.
struct Body {
    BodyRole role = BodyRole::block;
    std::vector<StmtId> statements;
    /// catch_block only.
    std::optional<std::string> catch_parameter;
    /// case_group / case_rule: the labels include `default`.
    bool is_default = false;
};

struct Statement {
    StmtId id = -1;
    SourceSpan span;
    StmtKind kind = StmtKind::other;
    LoopKind loop = LoopKind::none;
    std::optional<StmtId> parent;
    /// Index into the parent's bodies; -1 for top-level statements.
    int body_index = -1;
    /// All direct child statements, in source order.
    std::vector<StmtId> children;
    std::vector<Body> bodies;

    /// Facts of the statement's own evaluation. For compound statements this
    /// is the header only: the condition of if/while/do, the selector of a
    /// switch, the init and first condition of a for, the iterable of a
    /// foreach, the resources of a try.
    FlowFacts facts;
    /// Per-iteration step of for (update + condition) and foreach (variable).
    FlowFacts step;

    /// Names whose scope continues after this statement (local declarations
    /// and flow-scoped pattern bindings).
    std::vector<std::string> declares;
    /// Names scoped to this statement (for-init, foreach variable, resources,
    /// catch parameters).
    std::vector<std::string> scoped_declares;

    std::optional<Jump> jump;
    std::vector<std::string> labels;
    bool has_default = false;  // switch only
    /// this(...) or super(...): pinned as the first statement of a constructor.
    bool constructor_call = false;

    /// Union of all writes (definite and conditional) of facts and step.
    [[nodiscard]] std::set<std::string> defs() const;
    [[nodiscard]] std::set<std::string> uses() const;
};

struct Variable {
    std::string name;
    /// Declared type text, with declarator dimensions and varargs folded in
    /// (`int a[]` -> `int[]`, `String... xs` -> `String[]`).
    std::string type;
    bool parameter = false;
    std::optional<StmtId> declared_by;
    /// Byte range in which the name resolves to this variable.
    std::size_t scope_begin = 0;
    std::size_t scope_end = 0;
};

struct MethodSummary {
    std::string name;
    int arity = 0;
    LineRange lines;
};

/// Statement-level model of one method body.
struct MethodModel {
    SourceUnit owner;
    std::string name;
    bool is_constructor = false;
    bool is_static = false;
    std::string return_type;     // "void" for constructors
    std::string type_parameters; // "<T>" or empty
    std::string throws_clause;   // "throws IOException" or empty

    LineRange declaration_span;  // whole declaration including annotations
    LineRange signature_span;    // declaration start .. line of the body's '{'
    LineRange body_span;         // statement lines, without brace-only lines
    std::size_t declaration_begin = 0;
    std::size_t declaration_end = 0;
    std::size_t body_open = 0;   // byte of '{'
    std::size_t body_close = 0;  // byte of '}'
    std::string indent;          // leading whitespace of the declaration line

    std::vector<Variable> parameters;
    std::vector<Variable> locals;
    std::vector<Statement> statements;  // indexed by StmtId, pre-order
    std::vector<StmtId> top_level;

    /// Methods declared directly in the enclosing type, including this one.
    std::vector<MethodSummary> type_methods;

    [[nodiscard]] const Statement& statement(StmtId id) const { return statements.at(static_cast<std::size_t>(id)); }
    [[nodiscard]] std::size_t size() const { return statements.size(); }

    /// The sibling list containing `id` (its parent's body or top_level).
    [[nodiscard]] const std::vector<StmtId>& siblings(StmtId id) const;
    [[nodiscard]] bool is_ancestor_or_self(StmtId ancestor, StmtId id) const;
    /// `id` and all statements nested in it, pre-order.
    [[nodiscard]] std::vector<StmtId> subtree(StmtId id) const;

    /// Resolves a local or parameter name at a byte offset (innermost local
    /// first, then parameters).
    [[nodiscard]] const Variable* find_variable(std::string_view name, std::size_t at_byte) const;
    [[nodiscard]] bool is_parameter(std::string_view name) const;
    /// Every parameter and local name.
    [[nodiscard]] std::set<std::string> variable_names() const;

    /// Statement-bearing lines of the body.
    [[nodiscard]] std::vector<int> code_lines() const;
    [[nodiscard]] std::vector<int> code_lines(const LineRange& range) const;
};

/// `name`, or a 1-based line number.
struct MethodLocator {
    std::variant<std::string, int> value;

    static MethodLocator parse(std::string_view text);
    [[nodiscard]] std::string to_string() const;
};

/// Throws Error(method_not_found) or Error(ambiguous_method).
[[nodiscard]] MethodModel locate_method(const SourceUnit& unit, const MethodLocator& locator);

/// All method and constructor declarations with bodies, in source order.
[[nodiscard]] std::vector<MethodSummary> list_methods(const SourceUnit& unit);

/// A run of consecutive siblings that can be cut out as whole lines.
struct AlignedRun {
    std::vector<StmtId> statements;
    LineRange lines;  // first statement's first line .. last statement's last line

    friend bool operator==(const AlignedRun&, const AlignedRun&) = default;
};

struct NotAligned {
    /// Smallest aligned run enclosing the requested lines, when one exists.
    std::optional<AlignedRun> enclosing;
};

using RangeSelection = std::variant<AlignedRun, NotAligned>;

/// Maps a line range onto statements. Returns the sibling run whose lines are
/// exactly the statement-bearing content of `range` ∩ body_span, an empty run
/// when that intersection holds no statements, or NotAligned. Throws
/// Error(empty_range) when the range misses the body entirely.
[[nodiscard]] RangeSelection statements_in_range(const MethodModel& model, const LineRange& range);

/// True when no token outside the run shares a line with it.
[[nodiscard]] bool is_aligned(const MethodModel& model, const std::vector<StmtId>& run);

/// Grows a sibling run until it is aligned, climbing to enclosing statements
/// when a parent header shares a line. nullopt when even the top level cannot
/// be aligned.
[[nodiscard]] std::optional<AlignedRun> align_outward(const MethodModel& model, std::vector<StmtId> run);

[[nodiscard]] LineRange run_lines(const MethodModel& model, const std::vector<StmtId>& run);

}  // namespace xtract
