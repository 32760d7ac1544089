#include "oracles.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <random>
#include <sstream>

namespace xtract::testing {

namespace {

void walk_paths(const Cfg& cfg, NodeId n, std::vector<char>& on_path, std::set<std::string> killed,
                std::set<std::string>& live)
{
    const auto& facts = cfg.nodes[static_cast<std::size_t>(n)].facts;
    for (const auto& u : facts.uses) {
        if (!killed.count(u)) live.insert(u);
    }
    killed.insert(facts.defs.begin(), facts.defs.end());
    on_path[static_cast<std::size_t>(n)] = 1;
    for (NodeId s : cfg.successors[static_cast<std::size_t>(n)]) {
        if (!on_path[static_cast<std::size_t>(s)]) walk_paths(cfg, s, on_path, killed, live);
    }
    on_path[static_cast<std::size_t>(n)] = 0;
}

std::optional<StmtId> resolve_target(const MethodModel& model, const Statement& jump)
{
    for (auto p = jump.parent; p; p = model.statement(*p).parent) {
        const Statement& a = model.statement(*p);
        if (jump.jump->label) {
            if (std::count(a.labels.begin(), a.labels.end(), *jump.jump->label)) return *p;
        } else if (a.kind == StmtKind::loop) {
            return *p;
        } else if (jump.kind == StmtKind::break_ && a.kind == StmtKind::switch_) {
            return *p;
        }
    }
    return std::nullopt;
}

// Normal completion per the language's reachability rules, with every loop
// condition treated as non-constant.
class Completion {
public:
    explicit Completion(const MethodModel& model) : model_(model) {}

    bool list(const std::vector<StmtId>& stmts) const
    {
        return std::all_of(stmts.begin(), stmts.end(), [&](StmtId s) { return statement(s); });
    }

    bool statement(StmtId id) const
    {
        const Statement& s = model_.statement(id);
        if (broken_out_of(id)) return true;
        switch (s.kind) {
        case StmtKind::return_:
        case StmtKind::throw_:
        case StmtKind::break_:
        case StmtKind::continue_:
            return false;
        case StmtKind::if_: {
            bool then_ok = s.bodies.empty() || list(s.bodies[0].statements);
            bool else_ok = s.bodies.size() < 2 || list(s.bodies[1].statements);
            return then_ok || else_ok;
        }
        case StmtKind::loop:
            return true;
        case StmtKind::switch_: {
            if (!s.has_default || s.bodies.empty()) return true;
            for (const Body& b : s.bodies) {
                if (b.role == BodyRole::case_rule && list(b.statements)) return true;
            }
            const Body& last = s.bodies.back();
            return last.role == BodyRole::case_group && list(last.statements);
        }
        case StmtKind::try_: {
            bool body_ok = false;
            bool finally_ok = true;
            for (const Body& b : s.bodies) {
                if (b.role == BodyRole::try_block || b.role == BodyRole::catch_block) {
                    body_ok = body_ok || list(b.statements);
                } else if (b.role == BodyRole::finally_block) {
                    finally_ok = list(b.statements);
                }
            }
            return body_ok && finally_ok;
        }
        case StmtKind::block:
            return s.bodies.empty() || list(s.bodies[0].statements);
        default:
            return true;
        }
    }

private:
    const MethodModel& model_;

    bool broken_out_of(StmtId id) const
    {
        for (StmtId k : model_.subtree(id)) {
            const Statement& s = model_.statement(k);
            if (s.kind == StmtKind::break_ && resolve_target(model_, s) == id) return true;
        }
        return false;
    }
};

bool all_paths_assign(const Cfg& cfg, const std::set<NodeId>& inside, NodeId n, std::vector<char>& on_path,
                      bool assigned, const std::string& name)
{
    on_path[static_cast<std::size_t>(n)] = 1;
    bool ok = true;
    for (const auto& e : cfg.edges) {
        if (e.from != n || !ok) continue;
        bool after = assigned
                     || (e.kind == EdgeKind::normal && cfg.nodes[static_cast<std::size_t>(n)].facts.defs.count(name));
        if (!inside.count(e.to)) {
            if (e.kind == EdgeKind::normal && e.to != cfg.exit && !after) ok = false;
            continue;
        }
        if (!on_path[static_cast<std::size_t>(e.to)]) {
            ok = all_paths_assign(cfg, inside, e.to, on_path, after, name);
        }
    }
    on_path[static_cast<std::size_t>(n)] = 0;
    return ok;
}

}  // namespace

std::vector<std::set<std::string>> path_live_in(const Cfg& cfg)
{
    std::vector<std::set<std::string>> out(cfg.nodes.size());
    std::vector<char> on_path(cfg.nodes.size(), 0);
    for (std::size_t n = 0; n < cfg.nodes.size(); ++n) {
        walk_paths(cfg, static_cast<NodeId>(n), on_path, {}, out[n]);
    }
    return out;
}

std::vector<std::vector<StmtId>> all_sibling_runs(const MethodModel& model)
{
    std::vector<const std::vector<StmtId>*> lists{&model.top_level};
    for (const auto& s : model.statements) {
        for (const auto& b : s.bodies) lists.push_back(&b.statements);
    }
    std::vector<std::vector<StmtId>> runs;
    for (const auto* list : lists) {
        for (std::size_t i = 0; i < list->size(); ++i) {
            for (std::size_t j = i; j < list->size(); ++j) {
                runs.emplace_back(list->begin() + static_cast<long>(i), list->begin() + static_cast<long>(j) + 1);
            }
        }
    }
    return runs;
}

bool text_aligned(const MethodModel& model, const std::vector<StmtId>& run)
{
    const std::string& text = model.owner.text();
    std::size_t b0 = model.statement(run.front()).span.start_byte;
    std::size_t b1 = model.statement(run.back()).span.end_byte;
    LineRange lines = run_lines(model, run);
    for (int line = lines.first; line <= lines.last; ++line) {
        std::size_t a = model.owner.line_start(line);
        std::size_t e = a + model.owner.line_text(line).size();
        bool in_block_comment = false;
        for (std::size_t i = a; i < e; ++i) {
            if (i >= b0 && i < b1) continue;
            if (in_block_comment) {
                if (text.compare(i, 2, "*/") == 0) {
                    in_block_comment = false;
                    ++i;
                }
                continue;
            }
            char c = text[i];
            if (c == ' ' || c == '\t' || c == '\r') continue;
            if (text.compare(i, 2, "//") == 0) break;
            if (text.compare(i, 2, "/*") == 0) {
                in_block_comment = true;
                ++i;
                continue;
            }
            return false;
        }
    }
    return true;
}

FragmentIo oracle_fragment_io(const MethodModel& model, const Cfg& cfg, const std::vector<StmtId>& fragment)
{
    return oracle_fragment_io(model, cfg, path_live_in(cfg), fragment);
}

FragmentIo oracle_fragment_io(const MethodModel& model, const Cfg& cfg, const std::vector<std::set<std::string>>& live,
                              const std::vector<StmtId>& fragment)
{
    std::set<std::string> used, written, declared;
    for (StmtId top : fragment) {
        for (StmtId k : model.subtree(top)) {
            const Statement& s = model.statement(k);
            for (const auto* f : {&s.facts, &s.step}) {
                used.insert(f->uses.begin(), f->uses.end());
                written.insert(f->defs.begin(), f->defs.end());
                written.insert(f->may_defs.begin(), f->may_defs.end());
            }
            declared.insert(s.declares.begin(), s.declares.end());
            declared.insert(s.scoped_declares.begin(), s.scoped_declares.end());
        }
    }
    FragmentIo io;
    NodeId in_node = cfg.entry_node[static_cast<std::size_t>(fragment.front())];
    for (const auto& v : live[static_cast<std::size_t>(in_node)]) {
        if (used.count(v) && !declared.count(v)) io.inputs.insert(v);
    }
    NodeId out_node = cfg.follow_node[static_cast<std::size_t>(fragment.back())];
    for (const auto& v : live[static_cast<std::size_t>(out_node)]) {
        if (written.count(v) || declared.count(v)) io.outputs.insert(v);
    }

    // A declaration moved into the new method disappears from the host, so
    // any later mention in its scope also makes it an output.
    std::set<std::string> top_declared;
    for (StmtId top : fragment) {
        const auto& d = model.statement(top).declares;
        top_declared.insert(d.begin(), d.end());
    }
    std::vector<StmtId> later;
    const auto& sibs = model.siblings(fragment.front());
    auto it = std::find(sibs.begin(), sibs.end(), fragment.back());
    later.insert(later.end(), it + 1, sibs.end());
    const Statement& first = model.statement(fragment.front());
    if (first.parent) {
        const Statement& p = model.statement(*first.parent);
        auto bi = static_cast<std::size_t>(first.body_index);
        if (p.kind == StmtKind::switch_ && p.bodies[bi].role == BodyRole::case_group) {
            for (std::size_t b = bi + 1; b < p.bodies.size(); ++b) {
                later.insert(later.end(), p.bodies[b].statements.begin(), p.bodies[b].statements.end());
            }
        }
    }
    for (StmtId l : later) {
        for (StmtId k : model.subtree(l)) {
            auto names = model.statement(k).uses();
            auto defs = model.statement(k).defs();
            names.insert(defs.begin(), defs.end());
            for (const auto& v : names) {
                if (top_declared.count(v)) io.outputs.insert(v);
            }
        }
    }
    return io;
}

OracleVerdict oracle_check(const MethodModel& model, const Cfg& cfg, const std::vector<StmtId>& fragment)
{
    return oracle_check(model, cfg, path_live_in(cfg), fragment);
}

OracleVerdict oracle_check(const MethodModel& model, const Cfg& cfg, const std::vector<std::set<std::string>>& live,
                           const std::vector<StmtId>& fragment)
{
    std::set<StmtId> inside;
    for (StmtId top : fragment) {
        for (StmtId k : model.subtree(top)) inside.insert(k);
    }
    bool has_return = false;
    for (StmtId k : inside) {
        const Statement& s = model.statement(k);
        if (s.kind == StmtKind::return_) has_return = true;
        if (s.kind == StmtKind::break_ || s.kind == StmtKind::continue_) {
            auto target = resolve_target(model, s);
            bool continue_ok = s.kind != StmtKind::continue_ || !target
                               || model.statement(*target).kind == StmtKind::loop;
            if (!target || !inside.count(*target) || !continue_ok) {
                return {false, RejectionCategory::jump_crosses_boundary};
            }
        }
    }

    bool completes = Completion(model).list(fragment);
    if (has_return && completes) return {false, RejectionCategory::conditional_return};

    FragmentIo io = oracle_fragment_io(model, cfg, live, fragment);
    if (io.outputs.size() > 1) return {false, RejectionCategory::multiple_outputs};
    if (io.outputs.size() == 1 && !completes) return {false, RejectionCategory::multiple_outputs};
    if (io.outputs.size() == 1) {
        const std::string& v = *io.outputs.begin();
        bool declared_inside = false;
        for (StmtId top : fragment) {
            const auto& d = model.statement(top).declares;
            if (std::count(d.begin(), d.end(), v)) declared_inside = true;
        }
        if (declared_inside) {
            std::set<NodeId> nodes = fragment_nodes(model, cfg, fragment);
            std::vector<char> on_path(cfg.nodes.size(), 0);
            NodeId start = cfg.entry_node[static_cast<std::size_t>(fragment.front())];
            if (!all_paths_assign(cfg, nodes, start, on_path, false, v)) {
                return {false, RejectionCategory::multiple_outputs};
            }
        }
    }
    return {true, std::nullopt};
}

std::string generate_long_method(int lines, unsigned seed)
{
    std::mt19937 rng(seed);
    std::ostringstream out;
    out << "package bench;\n\nimport java.util.List;\n\npublic class Long {\n    private int field;\n\n";
    out << "    int longMethod(int n, int[] data, List<String> names) {\n";
    out << "        int acc = 0;\n        int count = 0;\n        String label = \"\";\n";
    int written = 4;
    int k = 0;
    while (written < lines - 2) {
        switch (rng() % 6) {
        case 0:
            out << "        int v" << k << " = acc + " << (rng() % 100) << ";\n";
            out << "        acc += v" << k << " * n;\n";
            written += 2;
            break;
        case 1:
            out << "        for (int i" << k << " = 0; i" << k << " < data.length; i" << k << "++) {\n";
            out << "            if (data[i" << k << "] > " << (rng() % 50) << ") {\n";
            out << "                count++;\n";
            out << "                continue;\n";
            out << "            }\n";
            out << "            acc -= data[i" << k << "];\n";
            out << "        }\n";
            written += 7;
            break;
        case 2:
            out << "        if (acc > " << (rng() % 1000) << ") {\n";
            out << "            label = names.get(" << (rng() % 3) << ");\n";
            out << "        } else {\n";
            out << "            field += count;\n";
            out << "        }\n";
            written += 5;
            break;
        case 3:
            out << "        try {\n";
            out << "            acc = Integer.parseInt(label) + acc;\n";
            out << "        } catch (NumberFormatException e" << k << ") {\n";
            out << "            count += 2;\n";
            out << "        }\n";
            written += 5;
            break;
        case 4:
            out << "        while (count > " << (rng() % 20) << ") {\n";
            out << "            count /= 2;\n";
            out << "        }\n";
            written += 3;
            break;
        default:
            out << "        switch (n % 3) {\n";
            out << "            case 0:\n";
            out << "                acc++;\n";
            out << "                break;\n";
            out << "            default:\n";
            out << "                acc--;\n";
            out << "        }\n";
            written += 7;
            break;
        }
        ++k;
    }
    out << "        return acc + count + label.length();\n    }\n}\n";
    return out.str();
}

}  // namespace xtract::testing
