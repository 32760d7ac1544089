#include "xtract/extractor.hpp"

#include <algorithm>
#include <map>

#include "xtract/candidates.hpp"
#include "xtract/error.hpp"

namespace xtract {

namespace {

bool ident_char(char c)
{
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$' || static_cast<unsigned char>(c) >= 0x80;
}

std::size_t first_word(std::string_view text, std::string_view word)
{
    for (auto pos = text.find(word); pos != std::string_view::npos; pos = text.find(word, pos + 1)) {
        bool left = pos == 0 || !ident_char(text[pos - 1]);
        bool right = pos + word.size() >= text.size() || !ident_char(text[pos + word.size()]);
        if (left && right) return pos;
    }
    return std::string_view::npos;
}

std::string leading_ws(std::string_view line)
{
    std::size_t n = 0;
    while (n < line.size() && (line[n] == ' ' || line[n] == '\t')) ++n;
    return std::string(line.substr(0, n));
}

std::string_view strip_eol(std::string_view line)
{
    while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.remove_suffix(1);
    return line;
}

std::string join_params(const std::vector<TypedName>& params, bool typed)
{
    std::string out;
    for (const auto& p : params) {
        if (!out.empty()) out += ", ";
        out += typed ? p.type + " " + p.name : p.name;
    }
    return out;
}

// Names declared anywhere inside the fragment, including loop and catch variables.
std::set<std::string> declared_inside(const MethodModel& model, const std::vector<StmtId>& fragment)
{
    std::set<std::string> out;
    for (StmtId top : fragment) {
        for (StmtId id : model.subtree(top)) {
            const Statement& s = model.statement(id);
            out.insert(s.declares.begin(), s.declares.end());
            out.insert(s.scoped_declares.begin(), s.scoped_declares.end());
        }
    }
    return out;
}

TypedName typed(const MethodModel& model, const std::string& name, std::size_t at_byte)
{
    const Variable* v = model.find_variable(name, at_byte);
    if (!v) throw Error(ErrorCode::plan_conflict, "cannot resolve the declaration of '" + name + "'");
    if (v->type == "var") {
        throw Error(ErrorCode::plan_conflict, "'" + name + "' is declared with var; its type cannot be copied");
    }
    return {name, v->type};
}

}  // namespace

std::string ExtractPlan::signature() const
{
    std::string out = modifiers;
    if (!type_parameters.empty()) out += " " + type_parameters;
    out += " " + return_type + " " + new_name + "(" + join_params(parameters, true) + ")";
    if (!exceptions_clause.empty()) out += " " + exceptions_clause;
    return out;
}

std::string ExtractPlan::call_text() const
{
    std::string call = new_name + "(" + join_params(parameters, false) + ")";
    if (all_paths_return) return host_return_type == "void" ? call + "; return;" : "return " + call + ";";
    if (return_variable) {
        if (return_declared_inside) return return_variable->type + " " + return_variable->name + " = " + call + ";";
        return return_variable->name + " = " + call + ";";
    }
    return call + ";";
}

ExtractPlan plan(const MethodModel& model, const Cfg& cfg, const LivenessResult& live,
                 const std::vector<StmtId>& fragment, const LineRange& lines, const std::string& name)
{
    if (fragment.empty()) throw Error(ErrorCode::plan_conflict, "nothing to extract");
    FragmentIo io = fragment_io(model, cfg, live, fragment);
    if (io.outputs.size() > 1) throw Error(ErrorCode::plan_conflict, "fragment has more than one output");
    if (!is_java_identifier(name)) throw Error(ErrorCode::plan_conflict, "'" + name + "' is not a legal method name");

    ExtractPlan p;
    p.fragment = fragment;
    p.lines = lines;
    p.new_name = name;
    p.modifiers = model.is_static ? "private static" : "private";
    p.type_parameters = model.type_parameters;
    p.exceptions_clause = model.throws_clause;
    p.host_return_type = model.return_type;
    p.unit_digest = model.owner.digest();
    // In a void method, a fragment whose normal exit is the end of the body
    // needs no explicit return after the call.
    p.all_paths_return = exits_abruptly(model, cfg, fragment)
                         && !(model.return_type == "void" && cfg.follow_node[static_cast<std::size_t>(fragment.back())] == cfg.exit);

    const std::size_t begin = model.statement(fragment.front()).span.start_byte;
    const std::size_t end = model.statement(fragment.back()).span.end_byte;
    const std::string_view text = std::string_view(model.owner.text()).substr(begin, end - begin);
    const std::set<std::string> inner = declared_inside(model, fragment);

    std::set<std::string> params = io.inputs;
    if (!io.outputs.empty()) {
        const std::string& out = *io.outputs.begin();
        p.return_declared_inside = inner.count(out) > 0;
        if (p.return_declared_inside) {
            auto decl = std::find_if(model.locals.begin(), model.locals.end(), [&](const Variable& v) {
                return v.name == out && v.declared_by
                       && std::find(fragment.begin(), fragment.end(), *v.declared_by) != fragment.end();
            });
            if (decl == model.locals.end()) throw Error(ErrorCode::plan_conflict, "cannot resolve '" + out + "'");
            if (decl->type == "var") {
                throw Error(ErrorCode::plan_conflict, "'" + out + "' is declared with var; its type cannot be copied");
            }
            p.return_variable = TypedName{out, decl->type};
        } else {
            p.return_variable = typed(model, out, begin);
            // Without a definite assignment the incoming value must flow through.
            const auto& before = live.live_before(cfg, fragment.front());
            if (!definitely_assigned(model, cfg, fragment).count(out) && before.count(out)) params.insert(out);
        }
    }

    std::vector<std::pair<std::size_t, TypedName>> ordered;
    for (const auto& n : params) ordered.emplace_back(first_word(text, n), typed(model, n, begin));
    std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
        return std::tie(a.first, a.second.name) < std::tie(b.first, b.second.name);
    });
    for (auto& [pos, tn] : ordered) p.parameters.push_back(std::move(tn));

    std::set<std::string> written;
    for (NodeId n : fragment_nodes(model, cfg, fragment)) {
        const FlowFacts& f = cfg.nodes[static_cast<std::size_t>(n)].facts;
        written.insert(f.defs.begin(), f.defs.end());
        written.insert(f.may_defs.begin(), f.may_defs.end());
    }
    for (const auto& w : written) {
        if (inner.count(w) || params.count(w)) continue;
        p.locals_to_declare.push_back(typed(model, w, begin));
    }

    if (p.return_variable) p.return_type = p.return_variable->type;
    else if (p.all_paths_return) p.return_type = model.return_type;
    else p.return_type = "void";

    for (const auto& m : model.type_methods) {
        if (m.name == name && m.arity == static_cast<int>(p.parameters.size())) {
            throw Error(ErrorCode::plan_conflict, "a method " + name + " with " + std::to_string(m.arity)
                                                      + " parameters already exists at line "
                                                      + std::to_string(m.lines.first));
        }
    }
    return p;
}

ExtractPlan plan(const MethodModel& model, const Cfg& cfg, const LivenessResult& live, const RankedGroup& group)
{
    return plan(model, cfg, live, group.fragment, group.canonical_range, group.representative_name);
}

std::string apply_edits(std::string_view text, const std::vector<TextEdit>& edits)
{
    std::string out;
    std::size_t at = 0;
    for (const auto& e : edits) {
        out.append(text.substr(at, e.begin - at));
        out += e.replacement;
        at = e.end;
    }
    out.append(text.substr(at));
    return out;
}

ApplyResult apply(const SourceUnit& unit, const MethodModel& model, const ExtractPlan& plan)
{
    if (unit.digest() != plan.unit_digest || model.owner.digest() != plan.unit_digest) {
        throw Error(ErrorCode::stale_unit, unit.path() + " changed since the extraction was planned");
    }
    const std::string_view text = unit.text();

    // Indentation: the call keeps the fragment's, the new method's body is one
    // level inside the host's.
    const std::string call_indent = leading_ws(unit.line_text(plan.lines.first));
    std::string step = "    ";
    if (!model.top_level.empty()) {
        std::string top = leading_ws(unit.line_text(model.statement(model.top_level.front()).span.lines.first));
        if (top.size() > model.indent.size() && top.compare(0, model.indent.size(), model.indent) == 0) {
            step = top.substr(model.indent.size());
        }
    }
    const std::string body_indent = model.indent + step;

    std::string body;
    for (int line = plan.lines.first; line <= plan.lines.last; ++line) {
        std::string_view l = strip_eol(unit.line_text(line));
        if (l.find_first_not_of(" \t") == std::string_view::npos) body += "\n";
        else if (l.substr(0, call_indent.size()) == call_indent) body += body_indent + std::string(l.substr(call_indent.size())) + "\n";
        else body += std::string(l) + "\n";
    }

    std::string method = model.indent + plan.signature() + " {\n";
    for (const auto& v : plan.locals_to_declare) method += body_indent + v.type + " " + v.name + ";\n";
    method += body;
    if (plan.return_variable) method += body_indent + "return " + plan.return_variable->name + ";\n";
    method += model.indent + "}\n";

    TextEdit call{unit.line_start(plan.lines.first), unit.line_end(plan.lines.last),
                  call_indent + plan.call_text() + "\n"};
    if (unit.line_end(plan.lines.last) == text.size() && (text.empty() || text.back() != '\n')) {
        call.replacement.pop_back();
    }

    const int close_line = unit.line_of_byte(model.body_close);
    std::string_view after = strip_eol(text.substr(model.body_close + 1, unit.line_end(close_line) - model.body_close - 1));
    auto rest = after.find_first_not_of(" \t");
    TextEdit insert;
    std::size_t method_offset = 0;  // of the header within the replacement
    if (rest == std::string_view::npos || after.substr(rest, 2) == "//") {
        insert.begin = insert.end = unit.line_end(close_line);
        bool newline_missing = insert.begin == text.size() && (text.empty() || text.back() != '\n');
        insert.replacement = (newline_missing ? "\n\n" : "\n") + method;
        method_offset = newline_missing ? 2 : 1;
    } else {
        insert.begin = insert.end = model.body_close + 1;
        insert.replacement = "\n\n" + method;
        method_offset = 2;
    }

    ApplyResult result;
    result.script.edits = {call, insert};
    result.new_text = apply_edits(text, result.script.edits);
    SourceUnit reparsed;
    try {
        reparsed = parse_unit(result.new_text, unit.path());
    } catch (const ParseError& e) {
        throw Error(ErrorCode::render_error, "extracted source does not parse at line " + std::to_string(e.line())
                                                 + ": " + e.what());
    }
    std::size_t shift = call.replacement.size() - (call.end - call.begin);
    std::size_t header = insert.begin + shift + method_offset;
    result.call_line = {plan.lines.first, plan.lines.first};
    result.new_method_lines = {reparsed.line_of_byte(header),
                               reparsed.line_of_byte(header + method.size() - 1)};
    result.script.diff = unified_diff(text, result.script.edits, unit.path());
    return result;
}

namespace {

struct LineChange {
    int old_first = 0;                // 1-based first replaced line (or insertion point)
    int old_count = 0;
    std::vector<std::string> added;   // with line endings
};

std::vector<std::string> split_lines(std::string_view text)
{
    std::vector<std::string> out;
    std::size_t at = 0;
    while (at < text.size()) {
        auto nl = text.find('\n', at);
        std::size_t end = nl == std::string_view::npos ? text.size() : nl + 1;
        out.emplace_back(text.substr(at, end - at));
        at = end;
    }
    return out;
}

void emit(std::string& out, char tag, const std::string& line)
{
    out += tag;
    out += line;
    if (line.empty() || line.back() != '\n') out += "\n\\ No newline at end of file\n";
}

}  // namespace

std::string unified_diff(std::string_view text, const std::vector<TextEdit>& edits, const std::string& path,
                         int context)
{
    const auto old_lines = split_lines(text);
    std::vector<std::size_t> starts;
    {
        std::size_t at = 0;
        for (const auto& l : old_lines) {
            starts.push_back(at);
            at += l.size();
        }
        starts.push_back(at);
    }
    auto line_of = [&](std::size_t byte) {
        return static_cast<int>(std::upper_bound(starts.begin(), starts.end() - 1, byte) - starts.begin()) - 1;
    };

    // Widen every edit to whole lines; pure line-start insertions stay insertions.
    std::vector<LineChange> changes;
    for (const auto& e : edits) {
        int first = line_of(e.begin);
        std::string merged;
        int count = 0;
        bool at_line_start = e.begin == starts[static_cast<std::size_t>(std::max(first, 0))] || old_lines.empty();
        bool whole = e.replacement.empty() || e.replacement.back() == '\n';
        if (e.begin == e.end && at_line_start && whole) {
            if (e.begin == text.size()) first = static_cast<int>(old_lines.size());
            merged = e.replacement;
        } else {
            if (e.begin == text.size() && !old_lines.empty()) first = static_cast<int>(old_lines.size()) - 1;
            std::size_t last_byte = e.end > e.begin ? e.end - 1 : e.begin;
            int last = std::max(line_of(std::min(last_byte, text.size() - 1)), first);
            std::size_t lbegin = starts[static_cast<std::size_t>(first)];
            auto merge = [&] {
                std::size_t lend = starts[static_cast<std::size_t>(last) + 1];
                return std::string(text.substr(lbegin, e.begin - lbegin)) + e.replacement
                       + std::string(text.substr(e.end, lend - e.end));
            };
            merged = merge();
            // A partial last line pulls in the line it joins.
            while (!merged.empty() && merged.back() != '\n' && last + 1 < static_cast<int>(old_lines.size())) {
                ++last;
                merged = merge();
            }
            count = last - first + 1;
        }
        if (!changes.empty() && changes.back().old_first + changes.back().old_count > first + 1) {
            throw Error(ErrorCode::render_error, "overlapping edits");
        }
        changes.push_back({first + 1, count, split_lines(merged)});
    }

    std::string out = "--- a/" + path + "\n+++ b/" + path + "\n";
    const int n_old = static_cast<int>(old_lines.size());
    int delta = 0;  // new - old line offset before the current hunk
    std::size_t i = 0;
    while (i < changes.size()) {
        std::size_t j = i;
        while (j + 1 < changes.size()
               && changes[j + 1].old_first - (changes[j].old_first + changes[j].old_count) <= 2 * context) {
            ++j;
        }
        int hunk_first = std::max(1, changes[i].old_first - context);
        int hunk_last = std::min(n_old, changes[j].old_first + changes[j].old_count - 1 + context);
        std::string body;
        int old_count = 0;
        int new_count = 0;
        int hunk_delta = delta;
        int line = hunk_first;
        for (std::size_t k = i; k <= j; ++k) {
            for (; line < changes[k].old_first; ++line, ++old_count, ++new_count) {
                emit(body, ' ', old_lines[static_cast<std::size_t>(line - 1)]);
            }
            for (int c = 0; c < changes[k].old_count; ++c, ++line, ++old_count) {
                emit(body, '-', old_lines[static_cast<std::size_t>(line - 1)]);
            }
            for (const auto& a : changes[k].added) {
                emit(body, '+', a);
                ++new_count;
            }
            delta += static_cast<int>(changes[k].added.size()) - changes[k].old_count;
        }
        for (; line <= hunk_last; ++line, ++old_count, ++new_count) {
            emit(body, ' ', old_lines[static_cast<std::size_t>(line - 1)]);
        }
        int old_start = old_count == 0 ? hunk_first - 1 : hunk_first;
        int new_start = new_count == 0 ? hunk_first - 1 + hunk_delta : hunk_first + hunk_delta;
        out += "@@ -" + std::to_string(old_start) + "," + std::to_string(old_count) + " +" + std::to_string(new_start)
               + "," + std::to_string(new_count) + " @@\n" + body;
        i = j + 1;
    }
    return out;
}

}  // namespace xtract
