#include <algorithm>
#include <charconv>
#include <functional>

#include "syntax.hpp"
#include "xtract/error.hpp"
#include "xtract/source_model.hpp"

namespace xtract {

std::string_view to_string(StmtKind kind)
{
    switch (kind) {
    case StmtKind::declaration: return "declaration";
    case StmtKind::expression: return "expression";
    case StmtKind::if_: return "if";
    case StmtKind::loop: return "loop";
    case StmtKind::switch_: return "switch";
    case StmtKind::try_: return "try";
    case StmtKind::return_: return "return";
    case StmtKind::break_: return "break";
    case StmtKind::continue_: return "continue";
    case StmtKind::throw_: return "throw";
    case StmtKind::block: return "block";
    case StmtKind::other: return "other";
    }
    return "other";
}

std::string_view to_string(JumpKind kind)
{
    switch (kind) {
    case JumpKind::break_: return "break";
    case JumpKind::continue_: return "continue";
    case JumpKind::return_: return "return";
    case JumpKind::throw_: return "throw";
    }
    return "return";
}

std::set<std::string> Statement::defs() const
{
    std::set<std::string> out = facts.defs;
    out.insert(facts.may_defs.begin(), facts.may_defs.end());
    out.insert(step.defs.begin(), step.defs.end());
    out.insert(step.may_defs.begin(), step.may_defs.end());
    return out;
}

std::set<std::string> Statement::uses() const
{
    std::set<std::string> out = facts.uses;
    out.insert(step.uses.begin(), step.uses.end());
    return out;
}

namespace {

using detail::field;
using detail::field_children;
using detail::is;
using detail::is_comment;
using detail::named_children;

bool same(TSNode a, TSNode b) { return !ts_node_is_null(a) && !ts_node_is_null(b) && ts_node_eq(a, b); }

bool is_type_node(TSNode n)
{
    std::string_view t = ts_node_type(n);
    if (t.size() > 5 && t.substr(t.size() - 5) == "_type") return true;
    return t == "type_identifier" || t == "scoped_type_identifier" || t == "generic_type" || t == "type_arguments"
           || t == "type_parameters" || t == "dimensions" || t == "modifiers" || t == "annotation"
           || t == "marker_annotation" || t == "type_list" || t == "throws";
}

std::string join_lines_trimmed(std::string_view text)
{
    // Collapse internal whitespace runs so multi-line types render on one line.
    std::string out;
    bool space = false;
    for (char c : text) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            space = !out.empty();
            continue;
        }
        if (space) out.push_back(' ');
        space = false;
        out.push_back(c);
    }
    return out;
}

struct Frame {
    std::set<std::string> names;
    std::size_t end = 0;
    bool nested = false;  // lambda, class body or switch-expression arm
};

class ModelBuilder {
public:
    ModelBuilder(const SourceUnit& unit, TSNode method) : unit_(unit), src_(unit.text()), method_(method) {}

    MethodModel build()
    {
        model_.owner = unit_;
        read_signature();
        TSNode body = field(method_, "body");
        model_.body_open = ts_node_start_byte(body);
        model_.body_close = ts_node_end_byte(body) - 1;

        frames_.push_back(Frame{{}, ts_node_end_byte(method_), false});
        read_parameters();
        frames_.push_back(Frame{{}, ts_node_end_byte(body), false});
        for (TSNode child : statement_children(body)) {
            model_.top_level.push_back(build_statement(child, std::nullopt, -1));
        }
        frames_.pop_back();
        frames_.pop_back();

        compute_body_span(body);
        read_type_methods();
        return std::move(model_);
    }

private:
    const SourceUnit& unit_;
    const std::string& src_;
    TSNode method_;
    MethodModel model_;
    std::vector<Frame> frames_;
    StmtId current_ = -1;

    std::string text(TSNode n) const { return std::string(detail::text_of(src_, n)); }

    // ---- signature -------------------------------------------------------

    void read_signature()
    {
        model_.name = text(field(method_, "name"));
        model_.is_constructor = !is(method_, "method_declaration");
        TSNode type = field(method_, "type");
        model_.return_type = ts_node_is_null(type) ? "void" : join_lines_trimmed(text(type));
        TSNode dims = field(method_, "dimensions");
        if (!ts_node_is_null(dims)) model_.return_type += join_lines_trimmed(text(dims));
        TSNode tparams = field(method_, "type_parameters");
        if (!ts_node_is_null(tparams)) model_.type_parameters = join_lines_trimmed(text(tparams));
        for (TSNode c : named_children(method_)) {
            if (is(c, "throws")) model_.throws_clause = join_lines_trimmed(text(c));
            if (is(c, "modifiers")) {
                uint32_t n = ts_node_child_count(c);
                for (uint32_t i = 0; i < n; ++i) {
                    if (is(ts_node_child(c, i), "static")) model_.is_static = true;
                }
            }
        }
        auto start = ts_node_start_point(method_);
        auto end = ts_node_end_point(method_);
        model_.declaration_begin = ts_node_start_byte(method_);
        model_.declaration_end = ts_node_end_byte(method_);
        model_.declaration_span = LineRange{detail::line_of(start), detail::line_of(end)};
        TSNode body = field(method_, "body");
        model_.signature_span = LineRange{detail::line_of(start), detail::line_of(ts_node_start_point(body))};
        auto line = unit_.line_text(detail::line_of(start));
        auto ws = line.find_first_not_of(" \t");
        model_.indent = std::string(line.substr(0, ws == std::string_view::npos ? line.size() : ws));
    }

    void add_parameter(TSNode type, TSNode name_node, TSNode dims, bool varargs)
    {
        Variable v;
        v.name = text(name_node);
        v.type = join_lines_trimmed(text(type));
        if (!ts_node_is_null(dims)) v.type += join_lines_trimmed(text(dims));
        if (varargs) v.type += "[]";
        v.parameter = true;
        v.scope_begin = model_.body_open;
        v.scope_end = model_.body_close + 1;
        frames_.back().names.insert(v.name);
        model_.parameters.push_back(std::move(v));
    }

    void read_parameter_list(TSNode params)
    {
        for (TSNode p : named_children(params)) {
            if (is(p, "formal_parameter")) {
                add_parameter(field(p, "type"), field(p, "name"), field(p, "dimensions"), false);
            } else if (is(p, "spread_parameter")) {
                TSNode type{};
                TSNode decl{};
                for (TSNode c : named_children(p)) {
                    if (is(c, "variable_declarator")) decl = c;
                    else if (!is(c, "modifiers") && ts_node_is_null(type)) type = c;
                }
                if (!ts_node_is_null(decl) && !ts_node_is_null(type)) {
                    add_parameter(type, field(decl, "name"), field(decl, "dimensions"), true);
                }
            }
        }
    }

    void read_parameters()
    {
        TSNode params = field(method_, "parameters");
        if (!ts_node_is_null(params)) {
            read_parameter_list(params);
            return;
        }
        if (is(method_, "compact_constructor_declaration")) {
            // Record components are the implicit parameters.
            for (TSNode p = ts_node_parent(method_); !ts_node_is_null(p); p = ts_node_parent(p)) {
                if (is(p, "record_declaration")) {
                    TSNode rp = field(p, "parameters");
                    if (!ts_node_is_null(rp)) read_parameter_list(rp);
                    break;
                }
            }
        }
    }

    void compute_body_span(TSNode body)
    {
        int open_line = detail::line_of(ts_node_start_point(body));
        int close_line = detail::line_of(ts_node_end_point(body));
        LineRange span{open_line + 1, close_line - 1};
        if (!model_.top_level.empty()) {
            span.first = std::min(span.first, model_.statement(model_.top_level.front()).span.lines.first);
            span.last = std::max(span.last, model_.statement(model_.top_level.back()).span.lines.last);
        }
        model_.body_span = span;
    }

    void read_type_methods()
    {
        TSNode parent = ts_node_parent(method_);
        if (ts_node_is_null(parent)) return;
        for (TSNode c : named_children(parent)) {
            if (!is(c, "method_declaration")) continue;
            MethodSummary m;
            m.name = text(field(c, "name"));
            TSNode params = field(c, "parameters");
            if (!ts_node_is_null(params)) {
                for (TSNode p : named_children(params)) {
                    if (is(p, "formal_parameter") || is(p, "spread_parameter")) ++m.arity;
                }
            }
            m.lines = LineRange{detail::line_of(ts_node_start_point(c)), detail::line_of(ts_node_end_point(c))};
            model_.type_methods.push_back(std::move(m));
        }
    }

    // ---- scopes ----------------------------------------------------------

    // True when `name` resolves to a local or parameter of this method rather
    // than something declared inside a nested lambda or class, or a field.
    bool is_local(const std::string& name) const
    {
        for (auto it = frames_.rbegin(); it != frames_.rend(); ++it) {
            if (it->names.count(name)) return !it->nested;
        }
        return false;
    }

    bool in_nested() const
    {
        return std::any_of(frames_.begin(), frames_.end(), [](const Frame& f) { return f.nested; });
    }

    void push_frame(std::size_t end, bool nested = false) { frames_.push_back(Frame{{}, end, nested}); }
    void pop_frame() { frames_.pop_back(); }

    // Declares a method-level local in the innermost frame.
    void declare_local(TSNode name_node, std::string type, bool scoped)
    {
        std::string name = text(name_node);
        if (in_nested()) {
            frames_.back().names.insert(name);
            return;
        }
        if (frames_.back().names.count(name)) return;
        frames_.back().names.insert(name);
        Variable v;
        v.name = name;
        v.type = std::move(type);
        v.declared_by = current_;
        v.scope_begin = ts_node_start_byte(name_node);
        v.scope_end = frames_.back().end;
        model_.locals.push_back(v);
        if (current_ >= 0) {
            auto& s = model_.statements[static_cast<std::size_t>(current_)];
            auto& list = scoped ? s.scoped_declares : s.declares;
            if (std::find(list.begin(), list.end(), name) == list.end()) list.push_back(name);
        }
    }

    void declare_nested(TSNode name_node) { frames_.back().names.insert(text(name_node)); }

    // ---- expressions -----------------------------------------------------

    static void use(FlowFacts& f, const std::string& name)
    {
        if (!f.defs.count(name)) f.uses.insert(name);
    }

    static void def(FlowFacts& f, const std::string& name, bool conditional)
    {
        if (conditional) f.may_defs.insert(name);
        else f.defs.insert(name);
    }

    void walk_children(TSNode n, FlowFacts& f, bool cond, TSNode skip = TSNode{})
    {
        uint32_t count = ts_node_named_child_count(n);
        for (uint32_t i = 0; i < count; ++i) {
            TSNode c = ts_node_named_child(n, i);
            if (same(c, skip)) continue;
            walk(c, f, cond);
        }
    }

    void walk_lambda(TSNode n, FlowFacts& f)
    {
        push_frame(ts_node_end_byte(n), true);
        TSNode params = field(n, "parameters");
        if (!ts_node_is_null(params)) {
            if (is(params, "identifier")) {
                declare_nested(params);
            } else {
                for (TSNode p : named_children(params)) {
                    if (is(p, "identifier")) declare_nested(p);
                    else if (is(p, "formal_parameter")) declare_nested(field(p, "name"));
                    else if (is(p, "spread_parameter")) {
                        for (TSNode c : named_children(p)) {
                            if (is(c, "variable_declarator")) declare_nested(field(c, "name"));
                        }
                    }
                }
            }
        }
        TSNode body = field(n, "body");
        if (!ts_node_is_null(body)) walk(body, f, true);
        pop_frame();
    }

    void walk_nested_region(TSNode n, FlowFacts& f)
    {
        push_frame(ts_node_end_byte(n), true);
        walk_children(n, f, true);
        pop_frame();
    }

    void walk(TSNode n, FlowFacts& f, bool cond)
    {
        if (ts_node_is_null(n) || !ts_node_is_named(n) || is_comment(n) || is_type_node(n)) return;
        std::string_view t = ts_node_type(n);

        if (t == "identifier") {
            std::string name = text(n);
            if (is_local(name)) use(f, name);
            return;
        }
        if (t == "assignment_expression") {
            TSNode left = field(n, "left");
            TSNode right = field(n, "right");
            TSNode op = field(n, "operator");
            bool compound = !ts_node_is_null(op) && detail::text_of(src_, op) != "=";
            if (is(left, "identifier") && is_local(text(left))) {
                std::string name = text(left);
                if (compound) use(f, name);
                walk(right, f, cond);
                def(f, name, cond);
            } else {
                walk(left, f, cond);
                walk(right, f, cond);
            }
            return;
        }
        if (t == "update_expression") {
            for (TSNode c : named_children(n)) {
                if (is(c, "identifier") && is_local(text(c))) {
                    std::string name = text(c);
                    use(f, name);
                    def(f, name, cond);
                } else {
                    walk(c, f, cond);
                }
            }
            return;
        }
        if (t == "binary_expression") {
            TSNode op = field(n, "operator");
            auto ops = ts_node_is_null(op) ? std::string_view{} : detail::text_of(src_, op);
            walk(field(n, "left"), f, cond);
            walk(field(n, "right"), f, cond || ops == "&&" || ops == "||");
            return;
        }
        if (t == "ternary_expression") {
            walk(field(n, "condition"), f, cond);
            walk(field(n, "consequence"), f, true);
            walk(field(n, "alternative"), f, true);
            return;
        }
        if (t == "instanceof_expression") {
            walk(field(n, "left"), f, cond);
            TSNode right = field(n, "right");
            if (!ts_node_is_null(right) && !is_type_node(right)) walk(right, f, cond);
            TSNode name = field(n, "name");
            if (!ts_node_is_null(name)) {
                declare_local(name, join_lines_trimmed(text(right)), false);
                if (!in_nested()) def(f, text(name), cond);
            }
            return;
        }
        if (t == "lambda_expression") {
            walk_lambda(n, f);
            return;
        }
        if (t == "class_body" || t == "class_declaration" || t == "record_declaration" || t == "enum_declaration"
            || t == "interface_declaration") {
            walk_nested_region(n, f);
            return;
        }
        if (t == "switch_expression") {
            walk(field(n, "condition"), f, cond);
            TSNode body = field(n, "body");
            if (!ts_node_is_null(body)) walk_nested_region(body, f);
            return;
        }
        if (t == "method_invocation") {
            walk(field(n, "object"), f, cond);
            walk(field(n, "arguments"), f, cond);
            return;
        }
        if (t == "field_access") {
            walk(field(n, "object"), f, cond);
            return;
        }
        if (t == "method_reference") {
            uint32_t count = ts_node_named_child_count(n);
            if (count > 0) walk(ts_node_named_child(n, 0), f, cond);
            return;
        }
        if (t == "variable_declarator") {
            // Only reached inside nested regions; statement-level declarations
            // are handled by declaration().
            walk(field(n, "value"), f, cond);
            declare_nested(field(n, "name"));
            return;
        }
        if (t == "formal_parameter" || t == "catch_formal_parameter") {
            declare_nested(field(n, "name"));
            return;
        }
        if (t == "enhanced_for_statement" || t == "resource") {
            walk(field(n, "value"), f, cond);
            TSNode name = field(n, "name");
            if (!ts_node_is_null(name)) declare_nested(name);
            else if (t == "resource") walk_children(n, f, cond);
            walk(field(n, "body"), f, cond);
            return;
        }
        if (t == "method_declaration" || t == "constructor_declaration") {
            push_frame(ts_node_end_byte(n), true);
            walk(field(n, "parameters"), f, true);
            walk(field(n, "body"), f, true);
            pop_frame();
            return;
        }
        if (t == "labeled_statement") {
            walk_children(n, f, cond, ts_node_named_child(n, 0));
            return;
        }
        if (t == "break_statement" || t == "continue_statement") return;
        if (t == "block") {
            push_frame(ts_node_end_byte(n), in_nested());
            walk_children(n, f, cond);
            pop_frame();
            return;
        }
        walk_children(n, f, cond);
    }

    // ---- statements ------------------------------------------------------

    std::vector<TSNode> statement_children(TSNode block)
    {
        std::vector<TSNode> out;
        for (TSNode c : named_children(block)) {
            if (!is_comment(c)) out.push_back(c);
        }
        return out;
    }

    Statement& stmt(StmtId id) { return model_.statements[static_cast<std::size_t>(id)]; }

    StmtId new_statement(TSNode outer, std::optional<StmtId> parent, int body_index)
    {
        Statement s;
        s.id = static_cast<StmtId>(model_.statements.size());
        s.parent = parent;
        s.body_index = body_index;
        auto sp = ts_node_start_point(outer);
        auto ep = ts_node_end_point(outer);
        s.span.lines = LineRange{detail::line_of(sp), detail::line_of(ep)};
        s.span.start_column = static_cast<int>(sp.column);
        s.span.end_column = static_cast<int>(ep.column);
        s.span.start_byte = ts_node_start_byte(outer);
        s.span.end_byte = ts_node_end_byte(outer);
        model_.statements.push_back(std::move(s));
        if (parent) stmt(*parent).children.push_back(model_.statements.back().id);
        return model_.statements.back().id;
    }

    // Builds one Body from either a block or a single statement.
    void build_body(StmtId owner, TSNode node, BodyRole role)
    {
        int index = static_cast<int>(stmt(owner).bodies.size());
        stmt(owner).bodies.push_back(Body{role, {}, std::nullopt, false});
        push_frame(ts_node_end_byte(node));
        if (is(node, "block")) {
            for (TSNode c : statement_children(node)) {
                StmtId child = build_statement(c, owner, index);
                stmt(owner).bodies[static_cast<std::size_t>(index)].statements.push_back(child);
            }
        } else if (!ts_node_is_null(node)) {
            StmtId child = build_statement(node, owner, index);
            stmt(owner).bodies[static_cast<std::size_t>(index)].statements.push_back(child);
        }
        pop_frame();
    }

    std::string declared_type(TSNode type, TSNode declarator)
    {
        std::string out = join_lines_trimmed(text(type));
        TSNode dims = field(declarator, "dimensions");
        if (!ts_node_is_null(dims)) out += join_lines_trimmed(text(dims));
        return out;
    }

    void declaration(TSNode n, FlowFacts& f, bool scoped)
    {
        TSNode type = field(n, "type");
        for (TSNode d : field_children(n, "declarator")) {
            TSNode value = field(d, "value");
            walk(value, f, false);
            TSNode name = field(d, "name");
            declare_local(name, declared_type(type, d), scoped);
            if (!ts_node_is_null(value)) def(f, text(name), false);
        }
    }

    void resolve_jump(StmtId id)
    {
        Statement& s = stmt(id);
        Jump& j = *s.jump;
        for (auto p = s.parent; p; p = stmt(*p).parent) {
            const Statement& a = stmt(*p);
            if (j.label) {
                if (std::find(a.labels.begin(), a.labels.end(), *j.label) != a.labels.end()) {
                    j.target = *p;
                    return;
                }
            } else if (a.kind == StmtKind::loop || (j.kind == JumpKind::break_ && a.kind == StmtKind::switch_)) {
                j.target = *p;
                return;
            }
        }
        j.unresolved = true;
    }

    StmtId build_statement(TSNode outer, std::optional<StmtId> parent, int body_index)
    {
        StmtId id = new_statement(outer, parent, body_index);
        StmtId saved = current_;
        current_ = id;

        TSNode n = outer;
        while (is(n, "labeled_statement")) {
            TSNode label = ts_node_named_child(n, 0);
            stmt(id).labels.push_back(text(label));
            TSNode inner{};
            for (TSNode c : named_children(n)) {
                if (!same(c, label) && !is_comment(c)) inner = c;
            }
            if (ts_node_is_null(inner)) break;
            n = inner;
        }
        std::string_view t = ts_node_type(n);

        if (t == "local_variable_declaration") {
            stmt(id).kind = StmtKind::declaration;
            FlowFacts f;
            declaration(n, f, false);
            stmt(id).facts = std::move(f);
        } else if (t == "expression_statement" || t == "explicit_constructor_invocation") {
            stmt(id).kind = StmtKind::expression;
            stmt(id).constructor_call = t == "explicit_constructor_invocation";
            FlowFacts f;
            walk_children(n, f, false);
            stmt(id).facts = std::move(f);
        } else if (t == "if_statement") {
            stmt(id).kind = StmtKind::if_;
            FlowFacts f;
            walk(field(n, "condition"), f, false);
            stmt(id).facts = std::move(f);
            build_body(id, field(n, "consequence"), BodyRole::then_branch);
            TSNode alt = field(n, "alternative");
            if (!ts_node_is_null(alt)) build_body(id, alt, BodyRole::else_branch);
        } else if (t == "while_statement") {
            stmt(id).kind = StmtKind::loop;
            stmt(id).loop = LoopKind::while_;
            FlowFacts f;
            walk(field(n, "condition"), f, false);
            stmt(id).facts = std::move(f);
            build_body(id, field(n, "body"), BodyRole::loop_body);
        } else if (t == "do_statement") {
            stmt(id).kind = StmtKind::loop;
            stmt(id).loop = LoopKind::do_;
            build_body(id, field(n, "body"), BodyRole::loop_body);
            FlowFacts f;
            walk(field(n, "condition"), f, false);
            stmt(id).facts = std::move(f);
        } else if (t == "for_statement") {
            stmt(id).kind = StmtKind::loop;
            stmt(id).loop = LoopKind::for_;
            push_frame(ts_node_end_byte(n));
            FlowFacts init;
            for (TSNode c : field_children(n, "init")) {
                if (is(c, "local_variable_declaration")) declaration(c, init, true);
                else walk(c, init, false);
            }
            walk(field(n, "condition"), init, false);
            FlowFacts step;
            for (TSNode c : field_children(n, "update")) walk(c, step, false);
            walk(field(n, "condition"), step, false);
            stmt(id).facts = std::move(init);
            stmt(id).step = std::move(step);
            build_body(id, field(n, "body"), BodyRole::loop_body);
            pop_frame();
        } else if (t == "enhanced_for_statement") {
            stmt(id).kind = StmtKind::loop;
            stmt(id).loop = LoopKind::foreach;
            FlowFacts f;
            walk(field(n, "value"), f, false);
            stmt(id).facts = std::move(f);
            push_frame(ts_node_end_byte(n));
            TSNode name = field(n, "name");
            std::string type = join_lines_trimmed(text(field(n, "type")));
            TSNode dims = field(n, "dimensions");
            if (!ts_node_is_null(dims)) type += join_lines_trimmed(text(dims));
            declare_local(name, type, true);
            stmt(id).step.defs.insert(text(name));
            build_body(id, field(n, "body"), BodyRole::loop_body);
            pop_frame();
        } else if (t == "switch_expression" || t == "switch_statement") {
            build_switch(id, n);
        } else if (t == "try_statement" || t == "try_with_resources_statement") {
            build_try(id, n);
        } else if (t == "return_statement" || t == "throw_statement") {
            bool ret = t == "return_statement";
            stmt(id).kind = ret ? StmtKind::return_ : StmtKind::throw_;
            FlowFacts f;
            walk_children(n, f, false);
            stmt(id).facts = std::move(f);
            stmt(id).jump = Jump{ret ? JumpKind::return_ : JumpKind::throw_, std::nullopt, std::nullopt, true, false};
        } else if (t == "break_statement" || t == "continue_statement") {
            bool brk = t == "break_statement";
            stmt(id).kind = brk ? StmtKind::break_ : StmtKind::continue_;
            Jump j{brk ? JumpKind::break_ : JumpKind::continue_, std::nullopt, std::nullopt, false, false};
            for (TSNode c : named_children(n)) {
                if (is(c, "identifier")) j.label = text(c);
            }
            stmt(id).jump = j;
            resolve_jump(id);
        } else if (t == "block") {
            stmt(id).kind = StmtKind::block;
            build_body(id, n, BodyRole::block);
        } else if (t == "synchronized_statement") {
            stmt(id).kind = StmtKind::block;
            FlowFacts f;
            TSNode body = field(n, "body");
            walk_children(n, f, false, body);
            stmt(id).facts = std::move(f);
            build_body(id, body, BodyRole::block);
        } else {
            // assert, yield, local classes and anything the model does not
            // break down: a single opaque step.
            stmt(id).kind = StmtKind::other;
            FlowFacts f;
            walk(n, f, false);
            stmt(id).facts = std::move(f);
        }

        current_ = saved;
        return id;
    }

    void build_switch(StmtId id, TSNode n)
    {
        stmt(id).kind = StmtKind::switch_;
        FlowFacts f;
        walk(field(n, "condition"), f, false);
        TSNode block = field(n, "body");
        push_frame(ts_node_end_byte(block));
        for (TSNode group : named_children(block)) {
            bool rule = is(group, "switch_rule");
            if (!rule && !is(group, "switch_block_statement_group")) continue;
            Body body{rule ? BodyRole::case_rule : BodyRole::case_group, {}, std::nullopt, false};
            std::vector<TSNode> stmts;
            for (TSNode c : named_children(group)) {
                if (is(c, "switch_label")) {
                    uint32_t k = ts_node_child_count(c);
                    for (uint32_t i = 0; i < k; ++i) {
                        if (is(ts_node_child(c, i), "default")) body.is_default = true;
                    }
                    walk_children(c, f, false);
                } else if (!is_comment(c)) {
                    stmts.push_back(c);
                }
            }
            if (body.is_default) stmt(id).has_default = true;
            int index = static_cast<int>(stmt(id).bodies.size());
            stmt(id).bodies.push_back(std::move(body));
            if (rule) push_frame(ts_node_end_byte(group));
            for (TSNode c : stmts) {
                if (rule && is(c, "block")) {
                    for (TSNode inner : statement_children(c)) {
                        StmtId child = build_statement(inner, id, index);
                        stmt(id).bodies[static_cast<std::size_t>(index)].statements.push_back(child);
                    }
                } else {
                    StmtId child = build_statement(c, id, index);
                    stmt(id).bodies[static_cast<std::size_t>(index)].statements.push_back(child);
                }
            }
            if (rule) pop_frame();
        }
        pop_frame();
        stmt(id).facts = std::move(f);
    }

    void build_try(StmtId id, TSNode n)
    {
        stmt(id).kind = StmtKind::try_;
        push_frame(ts_node_end_byte(n));
        FlowFacts f;
        TSNode resources = field(n, "resources");
        if (!ts_node_is_null(resources)) {
            for (TSNode r : named_children(resources)) {
                if (!is(r, "resource")) continue;
                TSNode name = field(r, "name");
                if (ts_node_is_null(name)) {
                    walk_children(r, f, false);
                    continue;
                }
                walk(field(r, "value"), f, false);
                std::string type = join_lines_trimmed(text(field(r, "type")));
                declare_local(name, type, true);
                def(f, text(name), false);
            }
        }
        stmt(id).facts = std::move(f);
        build_body(id, field(n, "body"), BodyRole::try_block);
        for (TSNode c : named_children(n)) {
            if (is(c, "catch_clause")) {
                TSNode param{};
                TSNode body{};
                for (TSNode cc : named_children(c)) {
                    if (is(cc, "catch_formal_parameter")) param = cc;
                    else if (is(cc, "block")) body = cc;
                }
                if (ts_node_is_null(body)) body = field(c, "body");
                push_frame(ts_node_end_byte(c));
                std::optional<std::string> pname;
                if (!ts_node_is_null(param)) {
                    TSNode name = field(param, "name");
                    TSNode ctype = field(param, "catch_type");  // may be null
                    std::string type;
                    if (!ts_node_is_null(ctype)) type = join_lines_trimmed(text(ctype));
                    else {
                        for (TSNode pc : named_children(param)) {
                            if (is(pc, "catch_type")) type = join_lines_trimmed(text(pc));
                        }
                    }
                    declare_local(name, type, true);
                    pname = text(name);
                }
                build_body(id, body, BodyRole::catch_block);
                stmt(id).bodies.back().catch_parameter = pname;
                pop_frame();
            } else if (is(c, "finally_clause")) {
                for (TSNode cc : named_children(c)) {
                    if (is(cc, "block")) build_body(id, cc, BodyRole::finally_block);
                }
            }
        }
        pop_frame();
    }
};

int arity_of(TSNode method)
{
    TSNode params = field(method, "parameters");
    int arity = 0;
    if (ts_node_is_null(params)) return 0;
    for (TSNode p : named_children(params)) {
        if (is(p, "formal_parameter") || is(p, "spread_parameter")) ++arity;
    }
    return arity;
}

LineRange lines_of(TSNode n)
{
    return LineRange{detail::line_of(ts_node_start_point(n)), detail::line_of(ts_node_end_point(n))};
}

}  // namespace

// ---- MethodModel ------------------------------------------------------------

const std::vector<StmtId>& MethodModel::siblings(StmtId id) const
{
    const Statement& s = statement(id);
    if (!s.parent) return top_level;
    return statement(*s.parent).bodies.at(static_cast<std::size_t>(s.body_index)).statements;
}

bool MethodModel::is_ancestor_or_self(StmtId ancestor, StmtId id) const
{
    for (std::optional<StmtId> cur = id; cur; cur = statement(*cur).parent) {
        if (*cur == ancestor) return true;
    }
    return false;
}

std::vector<StmtId> MethodModel::subtree(StmtId id) const
{
    // Ids are dense pre-order, so a subtree is a contiguous id range.
    std::vector<StmtId> out{id};
    for (StmtId k = id + 1; k < static_cast<StmtId>(statements.size()) && is_ancestor_or_self(id, k); ++k) {
        out.push_back(k);
    }
    return out;
}

const Variable* MethodModel::find_variable(std::string_view name, std::size_t at_byte) const
{
    const Variable* best = nullptr;
    for (const auto& v : locals) {
        if (v.name == name && v.scope_begin <= at_byte && at_byte < v.scope_end) {
            if (!best || v.scope_begin > best->scope_begin) best = &v;
        }
    }
    if (best) return best;
    for (const auto& v : parameters) {
        if (v.name == name) return &v;
    }
    return nullptr;
}

bool MethodModel::is_parameter(std::string_view name) const
{
    return std::any_of(parameters.begin(), parameters.end(), [&](const Variable& v) { return v.name == name; });
}

std::set<std::string> MethodModel::variable_names() const
{
    std::set<std::string> out;
    for (const auto& v : parameters) out.insert(v.name);
    for (const auto& v : locals) out.insert(v.name);
    return out;
}

std::vector<int> MethodModel::code_lines() const { return code_lines(body_span); }

std::vector<int> MethodModel::code_lines(const LineRange& range) const
{
    std::vector<int> out;
    LineRange r = intersect(range, body_span);
    for (int line = r.first; line <= r.last; ++line) {
        if (owner.is_code_line(line)) out.push_back(line);
    }
    return out;
}

// ---- locating -----------------------------------------------------------------

MethodLocator MethodLocator::parse(std::string_view text)
{
    int line = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), line);
    if (!text.empty() && ec == std::errc{} && ptr == text.data() + text.size() && line > 0) {
        return MethodLocator{line};
    }
    return MethodLocator{std::string(text)};
}

std::string MethodLocator::to_string() const
{
    if (const auto* line = std::get_if<int>(&value)) return "line " + std::to_string(*line);
    return std::get<std::string>(value);
}

std::vector<MethodSummary> list_methods(const SourceUnit& unit)
{
    std::vector<MethodSummary> out;
    TSNode root = ts_tree_root_node(unit.data().tree.get());
    for (TSNode m : detail::method_nodes(root)) {
        out.push_back(MethodSummary{std::string(detail::text_of(unit.text(), field(m, "name"))), arity_of(m),
                                    lines_of(m)});
    }
    return out;
}

MethodModel locate_method(const SourceUnit& unit, const MethodLocator& locator)
{
    TSNode root = ts_tree_root_node(unit.data().tree.get());
    std::vector<TSNode> methods = detail::method_nodes(root);
    std::optional<TSNode> chosen;

    if (const auto* line = std::get_if<int>(&locator.value)) {
        for (TSNode m : methods) {
            if (!lines_of(m).contains(*line)) continue;
            // Nested declarations come later in pre-order and are narrower.
            if (!chosen || ts_node_start_byte(m) >= ts_node_start_byte(*chosen)) chosen = m;
        }
        if (!chosen) {
            throw Error(ErrorCode::method_not_found, "no method contains line " + std::to_string(*line));
        }
    } else {
        const auto& name = std::get<std::string>(locator.value);
        std::vector<TSNode> matches;
        for (TSNode m : methods) {
            if (detail::text_of(unit.text(), field(m, "name")) == name) matches.push_back(m);
        }
        if (matches.empty()) throw Error(ErrorCode::method_not_found, "no method named '" + name + "'");
        if (matches.size() > 1) {
            std::string lines;
            for (TSNode m : matches) {
                if (!lines.empty()) lines += ", ";
                lines += std::to_string(lines_of(m).first);
            }
            throw Error(ErrorCode::ambiguous_method,
                        "method name '" + name + "' is ambiguous (declared at lines " + lines + "); use a line number");
        }
        chosen = matches.front();
    }
    return ModelBuilder(unit, *chosen).build();
}

// ---- alignment ----------------------------------------------------------------

LineRange run_lines(const MethodModel& model, const std::vector<StmtId>& run)
{
    if (run.empty()) return LineRange{};
    return LineRange{model.statement(run.front()).span.lines.first, model.statement(run.back()).span.lines.last};
}

bool is_aligned(const MethodModel& model, const std::vector<StmtId>& run)
{
    if (run.empty()) return true;
    std::size_t begin = model.statement(run.front()).span.start_byte;
    std::size_t end = model.statement(run.back()).span.end_byte;
    LineRange lines = run_lines(model, run);
    for (int line : {lines.first, lines.last}) {
        auto tb = model.owner.token_bounds(line);
        if (tb && (tb->first_begin < begin || tb->last_end > end)) return false;
    }
    return true;
}

std::optional<AlignedRun> align_outward(const MethodModel& model, std::vector<StmtId> run)
{
    if (run.empty()) return AlignedRun{};
    for (;;) {
        if (is_aligned(model, run)) return AlignedRun{run, run_lines(model, run)};
        const auto& sibs = model.siblings(run.front());
        auto i0 = static_cast<std::size_t>(std::find(sibs.begin(), sibs.end(), run.front()) - sibs.begin());
        auto i1 = static_cast<std::size_t>(std::find(sibs.begin(), sibs.end(), run.back()) - sibs.begin());
        std::size_t begin = model.statement(run.front()).span.start_byte;
        std::size_t end = model.statement(run.back()).span.end_byte;
        LineRange lines = run_lines(model, run);
        auto head = model.owner.token_bounds(lines.first);
        auto tail = model.owner.token_bounds(lines.last);

        bool climb = false;
        if (head && head->first_begin < begin) {
            if (i0 > 0 && head->first_begin >= model.statement(sibs[i0 - 1]).span.start_byte) {
                run.insert(run.begin(), sibs[i0 - 1]);
                continue;
            }
            climb = true;
        } else if (tail && tail->last_end > end) {
            if (i1 + 1 < sibs.size() && tail->last_end <= model.statement(sibs[i1 + 1]).span.end_byte) {
                run.push_back(sibs[i1 + 1]);
                continue;
            }
            climb = true;
        }
        if (climb) {
            auto parent = model.statement(run.front()).parent;
            if (!parent) return std::nullopt;
            run = {*parent};
        }
    }
}

namespace {

// Smallest run of consecutive siblings covering the bytes [a, b).
std::vector<StmtId> covering_run(const MethodModel& model, const std::vector<StmtId>& list, std::size_t a,
                                 std::size_t b)
{
    std::vector<StmtId> run;
    for (StmtId id : list) {
        const auto& sp = model.statement(id).span;
        if (sp.start_byte < b && sp.end_byte > a) run.push_back(id);
    }
    if (run.size() != 1) return run;
    const Statement& s = model.statement(run.front());
    for (const Body& body : s.bodies) {
        if (body.statements.empty()) continue;
        std::size_t lo = model.statement(body.statements.front()).span.start_byte;
        std::size_t hi = model.statement(body.statements.back()).span.end_byte;
        if (a >= lo && b <= hi) {
            auto inner = covering_run(model, body.statements, a, b);
            if (!inner.empty()) return inner;
        }
    }
    return run;
}

}  // namespace

RangeSelection statements_in_range(const MethodModel& model, const LineRange& range)
{
    LineRange r = intersect(range, model.body_span);
    if (r.empty()) {
        throw Error(ErrorCode::empty_range, "lines " + to_string(range) + " do not overlap the body of "
                                                + model.name + " (" + to_string(model.body_span) + ")");
    }
    std::size_t a = std::string::npos;
    std::size_t b = 0;
    for (int line = r.first; line <= r.last; ++line) {
        if (auto tb = model.owner.token_bounds(line)) {
            a = std::min(a, tb->first_begin);
            b = std::max(b, tb->last_end);
        }
    }
    if (a == std::string::npos) return AlignedRun{};
    // Brace lines shared with the signature contribute tokens outside the body.
    a = std::max(a, model.body_open + 1);
    b = std::min(b, model.body_close);
    if (a >= b) return AlignedRun{};

    auto run = covering_run(model, model.top_level, a, b);
    if (run.empty()) return AlignedRun{};
    LineRange lines = run_lines(model, run);
    if (r.contains(lines) && is_aligned(model, run)) return AlignedRun{run, lines};
    return NotAligned{align_outward(model, run)};
}

}  // namespace xtract
