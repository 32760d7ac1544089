#include "xtract/dataflow.hpp"

#include <algorithm>
#include <deque>
#include <map>

#include <boost/dynamic_bitset.hpp>

#include "xtract/error.hpp"

namespace xtract {

bool Cfg::has_edge(NodeId from, NodeId to) const
{
    const auto& s = successors.at(static_cast<std::size_t>(from));
    return std::find(s.begin(), s.end(), to) != s.end();
}

std::optional<EdgeKind> Cfg::edge_kind(NodeId from, NodeId to) const
{
    for (const auto& e : edges) {
        if (e.from == from && e.to == to) return e.kind;
    }
    return std::nullopt;
}

namespace {

class CfgBuilder {
public:
    explicit CfgBuilder(const MethodModel& model) : model_(model) {}

    Cfg build()
    {
        auto n = model_.statements.size();
        cfg_.stmt_node.assign(n, -1);
        cfg_.entry_node.assign(n, -1);
        cfg_.follow_node.assign(n, -1);
        cfg_.step_node.assign(n, -1);
        continue_node_.assign(n, -1);

        CfgNode entry{NodeKind::entry, std::nullopt, -1, {}};
        for (const auto& p : model_.parameters) entry.facts.defs.insert(p.name);
        cfg_.entry = add_node(std::move(entry));
        cfg_.exit = add_node(CfgNode{NodeKind::exit, std::nullopt, -1, {}});

        // Pre-order creation keeps node numbering deterministic and readable.
        for (const auto& s : model_.statements) {
            cfg_.stmt_node[static_cast<std::size_t>(s.id)] = add_node(CfgNode{NodeKind::statement, s.id, -1, s.facts});
            if (s.loop == LoopKind::for_ || s.loop == LoopKind::foreach) {
                cfg_.step_node[static_cast<std::size_t>(s.id)] = add_node(CfgNode{NodeKind::step, s.id, -1, s.step});
            }
            for (std::size_t b = 0; b < s.bodies.size(); ++b) {
                if (s.bodies[b].role == BodyRole::catch_block) {
                    CfgNode c{NodeKind::catch_entry, s.id, static_cast<int>(b), {}};
                    if (s.bodies[b].catch_parameter) c.facts.defs.insert(*s.bodies[b].catch_parameter);
                    catch_node_[{s.id, static_cast<int>(b)}] = add_node(std::move(c));
                }
            }
        }

        NodeId first = wire_list(model_.top_level, cfg_.exit);
        add_edge(cfg_.entry, first);

        finish();
        return std::move(cfg_);
    }

private:
    const MethodModel& model_;
    Cfg cfg_;
    std::vector<NodeId> continue_node_;
    std::map<std::pair<StmtId, int>, NodeId> catch_node_;
    std::set<CfgEdge> edge_set_;

    NodeId add_node(CfgNode node)
    {
        cfg_.nodes.push_back(std::move(node));
        return static_cast<NodeId>(cfg_.nodes.size() - 1);
    }

    void add_edge(NodeId from, NodeId to, EdgeKind kind = EdgeKind::normal)
    {
        // A normal edge supersedes an exceptional one between the same nodes.
        CfgEdge other{from, to, kind == EdgeKind::normal ? EdgeKind::exceptional : EdgeKind::normal};
        if (edge_set_.count(other)) {
            if (kind == EdgeKind::exceptional) return;
            edge_set_.erase(other);
        }
        edge_set_.insert(CfgEdge{from, to, kind});
    }

    NodeId node_of(StmtId id) const { return cfg_.stmt_node[static_cast<std::size_t>(id)]; }

    // Wires a statement list so that normal completion continues at `follow`.
    // Returns the node where the list is entered.
    NodeId wire_list(const std::vector<StmtId>& list, NodeId follow)
    {
        NodeId next = follow;
        for (auto it = list.rbegin(); it != list.rend(); ++it) {
            next = wire(*it, next);
        }
        return next;
    }

    NodeId wire(StmtId id, NodeId follow)
    {
        const Statement& s = model_.statement(id);
        auto idx = static_cast<std::size_t>(id);
        NodeId self = node_of(id);
        cfg_.follow_node[idx] = follow;
        NodeId entry = self;

        auto body_entry = [&](std::size_t b, NodeId f) { return wire_list(s.bodies[b].statements, f); };

        if (s.jump) {
            wire_jump(s, self);
        } else {
            switch (s.kind) {
            case StmtKind::if_: {
                NodeId then_entry = s.bodies.empty() ? follow : body_entry(0, follow);
                add_edge(self, then_entry);
                NodeId else_entry = s.bodies.size() > 1 ? body_entry(1, follow) : follow;
                add_edge(self, else_entry);
                break;
            }
            case StmtKind::loop:
                entry = wire_loop(s, self, follow);
                break;
            case StmtKind::switch_:
                wire_switch(s, self, follow);
                break;
            case StmtKind::try_:
                wire_try(s, self, follow);
                break;
            case StmtKind::block: {
                add_edge(self, s.bodies.empty() ? follow : body_entry(0, follow));
                break;
            }
            default:
                add_edge(self, follow);
                break;
            }
        }
        cfg_.entry_node[idx] = entry;
        return entry;
    }

    void wire_jump(const Statement& s, NodeId self)
    {
        const Jump& j = *s.jump;
        if (j.to_exit) {
            add_edge(self, cfg_.exit);
            return;
        }
        if (j.unresolved || !j.target) {
            cfg_.unsupported.push_back(s.id);
            add_edge(self, cfg_.exit);
            return;
        }
        auto t = static_cast<std::size_t>(*j.target);
        if (j.kind == JumpKind::break_) {
            add_edge(self, cfg_.follow_node[t]);
        } else if (continue_node_[t] >= 0) {
            add_edge(self, continue_node_[t]);
        } else {
            // continue naming a label that is not a loop
            cfg_.unsupported.push_back(s.id);
            add_edge(self, cfg_.exit);
        }
    }

    NodeId wire_loop(const Statement& s, NodeId self, NodeId follow)
    {
        auto idx = static_cast<std::size_t>(s.id);
        const std::vector<StmtId> none;
        const auto& body = s.bodies.empty() ? none : s.bodies.front().statements;
        switch (s.loop) {
        case LoopKind::while_: {
            continue_node_[idx] = self;
            add_edge(self, wire_list(body, self));
            add_edge(self, follow);
            return self;
        }
        case LoopKind::do_: {
            continue_node_[idx] = self;
            NodeId first = wire_list(body, self);
            add_edge(self, first);
            add_edge(self, follow);
            return first;
        }
        case LoopKind::for_: {
            NodeId step = cfg_.step_node[idx];
            continue_node_[idx] = step;
            NodeId first = wire_list(body, step);
            add_edge(self, first);
            add_edge(self, follow);
            add_edge(step, first);
            add_edge(step, follow);
            return self;
        }
        case LoopKind::foreach: {
            NodeId step = cfg_.step_node[idx];
            continue_node_[idx] = step;
            NodeId first = wire_list(body, step);
            add_edge(self, step);
            add_edge(step, first == step ? follow : first);
            add_edge(step, follow);
            return self;
        }
        case LoopKind::none:
            break;
        }
        add_edge(self, follow);
        return self;
    }

    void wire_switch(const Statement& s, NodeId self, NodeId follow)
    {
        // Groups fall through to the next group; rules complete the switch.
        NodeId next = follow;
        std::vector<NodeId> entries(s.bodies.size(), follow);
        for (std::size_t b = s.bodies.size(); b-- > 0;) {
            const Body& body = s.bodies[b];
            NodeId f = body.role == BodyRole::case_group ? next : follow;
            entries[b] = wire_list(body.statements, f);
            if (body.role == BodyRole::case_group) next = entries[b];
        }
        for (NodeId e : entries) add_edge(self, e);
        if (!s.has_default) add_edge(self, follow);
    }

    void wire_try(const Statement& s, NodeId self, NodeId follow)
    {
        std::optional<std::size_t> fin;
        for (std::size_t b = 0; b < s.bodies.size(); ++b) {
            if (s.bodies[b].role == BodyRole::finally_block) fin = b;
        }
        NodeId after = fin ? wire_list(s.bodies[*fin].statements, follow) : follow;
        bool has_finally = after != follow;

        std::vector<NodeId> catches;
        bool try_wired = false;
        for (std::size_t b = 0; b < s.bodies.size(); ++b) {
            const Body& body = s.bodies[b];
            if (body.role == BodyRole::try_block) {
                add_edge(self, wire_list(body.statements, after));
                try_wired = true;
            } else if (body.role == BodyRole::catch_block) {
                NodeId c = catch_node_.at({s.id, static_cast<int>(b)});
                catches.push_back(c);
                add_edge(c, wire_list(body.statements, after));
            }
        }
        if (!try_wired) add_edge(self, after);

        // Conservative exceptional flow: anything in the try (resources
        // included) may transfer to every catch; anything in try or catch may
        // transfer to finally.
        std::vector<NodeId> try_nodes{self};
        std::vector<NodeId> catch_nodes;
        for (std::size_t b = 0; b < s.bodies.size(); ++b) {
            const Body& body = s.bodies[b];
            if (body.role == BodyRole::finally_block) continue;
            auto& bucket = body.role == BodyRole::try_block ? try_nodes : catch_nodes;
            if (body.role == BodyRole::catch_block) bucket.push_back(catch_node_.at({s.id, static_cast<int>(b)}));
            for (StmtId top : body.statements) {
                for (StmtId k : model_.subtree(top)) collect_nodes(k, bucket);
            }
        }
        for (NodeId n : try_nodes) {
            for (NodeId c : catches) add_edge(n, c, EdgeKind::exceptional);
        }
        if (!has_finally) return;

        bool entered_normally = false;
        for (const auto* group : {&try_nodes, &catch_nodes}) {
            for (NodeId n : *group) {
                if (edge_set_.count(CfgEdge{n, after, EdgeKind::normal})) entered_normally = true;
            }
        }
        for (NodeId n : try_nodes) add_edge(n, after, EdgeKind::exceptional);
        for (NodeId n : catch_nodes) add_edge(n, after, EdgeKind::exceptional);

        // Finally resumes whatever entered it: the pending exception or jump
        // leaves the method (conservatively, via exit); normal completion
        // continues only when try or a catch could complete normally.
        std::vector<NodeId> fin_nodes;
        for (StmtId top : s.bodies[*fin].statements) {
            for (StmtId k : model_.subtree(top)) collect_nodes(k, fin_nodes);
        }
        std::set<NodeId> inside(fin_nodes.begin(), fin_nodes.end());
        for (const auto& e : std::vector<CfgEdge>(edge_set_.begin(), edge_set_.end())) {
            if (!inside.count(e.from) || e.to != follow || e.kind != EdgeKind::normal) continue;
            add_edge(e.from, cfg_.exit);
            if (!entered_normally) edge_set_.erase(e);
        }
    }

    void collect_nodes(StmtId id, std::vector<NodeId>& out) const
    {
        auto idx = static_cast<std::size_t>(id);
        out.push_back(cfg_.stmt_node[idx]);
        if (cfg_.step_node[idx] >= 0) out.push_back(cfg_.step_node[idx]);
    }

    void finish()
    {
        auto n = cfg_.nodes.size();
        cfg_.edges.assign(edge_set_.begin(), edge_set_.end());
        cfg_.successors.assign(n, {});
        cfg_.predecessors.assign(n, {});
        for (const auto& e : cfg_.edges) {
            cfg_.successors[static_cast<std::size_t>(e.from)].push_back(e.to);
            cfg_.predecessors[static_cast<std::size_t>(e.to)].push_back(e.from);
        }
        find_back_edges();
        std::sort(cfg_.unsupported.begin(), cfg_.unsupported.end());
        cfg_.unsupported.erase(std::unique(cfg_.unsupported.begin(), cfg_.unsupported.end()), cfg_.unsupported.end());
    }

    void find_back_edges()
    {
        enum Color : char { white, grey, black };
        std::vector<Color> color(cfg_.nodes.size(), white);
        // Iterative DFS: (node, next successor index).
        std::vector<std::pair<NodeId, std::size_t>> stack{{cfg_.entry, 0}};
        color[static_cast<std::size_t>(cfg_.entry)] = grey;
        while (!stack.empty()) {
            auto& [node, next] = stack.back();
            const auto& succ = cfg_.successors[static_cast<std::size_t>(node)];
            if (next == succ.size()) {
                color[static_cast<std::size_t>(node)] = black;
                stack.pop_back();
                continue;
            }
            NodeId to = succ[next++];
            auto ti = static_cast<std::size_t>(to);
            if (color[ti] == grey) {
                if (cfg_.edge_kind(node, to) == EdgeKind::normal) cfg_.loop_back_edges.insert({node, to});
            } else if (color[ti] == white) {
                color[ti] = grey;
                stack.emplace_back(to, 0);
            }
        }
    }
};

}  // namespace

Cfg build_cfg(const MethodModel& model) { return CfgBuilder(model).build(); }

const std::set<std::string>& LivenessResult::live_before(const Cfg& cfg, StmtId id) const
{
    return node_live_in.at(static_cast<std::size_t>(cfg.entry_node.at(static_cast<std::size_t>(id))));
}

const std::set<std::string>& LivenessResult::live_after(const Cfg& cfg, StmtId id) const
{
    return node_live_in.at(static_cast<std::size_t>(cfg.follow_node.at(static_cast<std::size_t>(id))));
}

LivenessResult liveness(const Cfg& cfg, const MethodModel& model)
{
    // Dense bit vectors over the method's names keep the fixed point cheap on
    // long methods.
    std::vector<std::string> names;
    {
        std::set<std::string> all = model.variable_names();
        for (const auto& node : cfg.nodes) {
            all.insert(node.facts.uses.begin(), node.facts.uses.end());
            all.insert(node.facts.defs.begin(), node.facts.defs.end());
            all.insert(node.facts.may_defs.begin(), node.facts.may_defs.end());
        }
        names.assign(all.begin(), all.end());
    }
    auto index_of = [&](const std::string& name) {
        return static_cast<std::size_t>(std::lower_bound(names.begin(), names.end(), name) - names.begin());
    };
    using Bits = boost::dynamic_bitset<>;
    const auto n = cfg.nodes.size();
    std::vector<Bits> use(n, Bits(names.size())), kill(n, Bits(names.size()));
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& u : cfg.nodes[i].facts.uses) use[i].set(index_of(u));
        for (const auto& d : cfg.nodes[i].facts.defs) kill[i].set(index_of(d));
    }

    std::vector<Bits> in(n, Bits(names.size())), out(n, Bits(names.size()));
    std::deque<NodeId> work;
    std::vector<bool> queued(n, true);
    for (std::size_t i = n; i-- > 0;) work.push_back(static_cast<NodeId>(i));
    while (!work.empty()) {
        NodeId v = work.front();
        work.pop_front();
        auto vi = static_cast<std::size_t>(v);
        queued[vi] = false;
        Bits o(names.size());
        for (NodeId s : cfg.successors[vi]) o |= in[static_cast<std::size_t>(s)];
        Bits i = use[vi] | (o - kill[vi]);
        out[vi] = std::move(o);
        if (i != in[vi]) {
            in[vi] = std::move(i);
            for (NodeId p : cfg.predecessors[vi]) {
                auto pi = static_cast<std::size_t>(p);
                if (!queued[pi]) {
                    queued[pi] = true;
                    work.push_back(p);
                }
            }
        }
    }

    auto to_set = [&](const Bits& b) {
        std::set<std::string> s;
        for (auto k = b.find_first(); k != Bits::npos; k = b.find_next(k)) s.insert(names[k]);
        return s;
    };
    LivenessResult r;
    r.node_live_in.reserve(n);
    r.node_live_out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        r.node_live_in.push_back(to_set(in[i]));
        r.node_live_out.push_back(to_set(out[i]));
    }
    for (const auto& s : model.statements) {
        auto node = static_cast<std::size_t>(cfg.stmt_node[static_cast<std::size_t>(s.id)]);
        r.live_in.push_back(r.node_live_in[node]);
        r.live_out.push_back(r.node_live_out[node]);
    }
    return r;
}

bool is_sibling_run(const MethodModel& model, const std::vector<StmtId>& fragment)
{
    if (fragment.empty()) return false;
    for (StmtId id : fragment) {
        if (id < 0 || static_cast<std::size_t>(id) >= model.size()) return false;
    }
    const auto& sibs = model.siblings(fragment.front());
    auto it = std::find(sibs.begin(), sibs.end(), fragment.front());
    for (StmtId id : fragment) {
        if (it == sibs.end() || *it != id) return false;
        ++it;
    }
    return true;
}

std::set<NodeId> fragment_nodes(const MethodModel& model, const Cfg& cfg, const std::vector<StmtId>& fragment)
{
    std::set<NodeId> out;
    for (StmtId top : fragment) {
        for (StmtId k : model.subtree(top)) {
            auto idx = static_cast<std::size_t>(k);
            out.insert(cfg.stmt_node[idx]);
            if (cfg.step_node[idx] >= 0) out.insert(cfg.step_node[idx]);
        }
    }
    for (std::size_t i = 0; i < cfg.nodes.size(); ++i) {
        const auto& node = cfg.nodes[i];
        if (node.kind == NodeKind::catch_entry && node.stmt && out.count(cfg.stmt_node[static_cast<std::size_t>(*node.stmt)])) {
            out.insert(static_cast<NodeId>(i));
        }
    }
    return out;
}

bool exits_abruptly(const MethodModel& model, const Cfg& cfg, const std::vector<StmtId>& fragment)
{
    if (fragment.empty()) return false;
    auto inside = fragment_nodes(model, cfg, fragment);
    std::vector<NodeId> stack{cfg.entry_node[static_cast<std::size_t>(fragment.front())]};
    if (!inside.count(stack.front())) return false;
    std::set<NodeId> seen{stack.front()};
    while (!stack.empty()) {
        NodeId v = stack.back();
        stack.pop_back();
        for (const auto& e : cfg.edges) {
            if (e.from != v) continue;
            if (!inside.count(e.to)) {
                if (e.kind == EdgeKind::normal && e.to != cfg.exit) return false;
                continue;
            }
            if (seen.insert(e.to).second) stack.push_back(e.to);
        }
    }
    return true;
}

namespace {

void referenced_names(const MethodModel& model, StmtId top, std::set<std::string>& out)
{
    for (StmtId k : model.subtree(top)) {
        const Statement& s = model.statement(k);
        for (const auto* set : {&s.facts.uses, &s.facts.defs, &s.facts.may_defs, &s.step.uses, &s.step.defs,
                                &s.step.may_defs}) {
            out.insert(set->begin(), set->end());
        }
    }
}

}  // namespace

std::set<std::string> declarations_used_after(const MethodModel& model, const std::vector<StmtId>& fragment)
{
    std::set<std::string> declared;
    for (StmtId id : fragment) {
        const auto& d = model.statement(id).declares;
        declared.insert(d.begin(), d.end());
    }
    if (declared.empty()) return {};

    std::set<std::string> later;
    const auto& sibs = model.siblings(fragment.front());
    auto it = std::find(sibs.begin(), sibs.end(), fragment.back());
    if (it != sibs.end()) {
        for (++it; it != sibs.end(); ++it) referenced_names(model, *it, later);
    }
    // Case groups of one switch share a scope.
    const Statement& first = model.statement(fragment.front());
    if (first.parent) {
        const Statement& p = model.statement(*first.parent);
        if (p.kind == StmtKind::switch_ && p.bodies[static_cast<std::size_t>(first.body_index)].role == BodyRole::case_group) {
            for (std::size_t b = static_cast<std::size_t>(first.body_index) + 1; b < p.bodies.size(); ++b) {
                for (StmtId s : p.bodies[b].statements) referenced_names(model, s, later);
            }
        }
    }
    std::set<std::string> out;
    for (const auto& name : declared) {
        if (later.count(name)) out.insert(name);
    }
    return out;
}

FragmentIo fragment_io(const MethodModel& model, const Cfg& cfg, const LivenessResult& live,
                       const std::vector<StmtId>& fragment)
{
    if (!is_sibling_run(model, fragment)) {
        throw Error(ErrorCode::not_aligned, "fragment is not a run of consecutive sibling statements");
    }
    std::set<std::string> used;
    std::set<std::string> written;
    std::set<std::string> declared;
    for (StmtId top : fragment) {
        for (StmtId k : model.subtree(top)) {
            const Statement& s = model.statement(k);
            auto u = s.uses();
            used.insert(u.begin(), u.end());
            auto d = s.defs();
            written.insert(d.begin(), d.end());
            declared.insert(s.declares.begin(), s.declares.end());
            declared.insert(s.scoped_declares.begin(), s.scoped_declares.end());
        }
    }

    FragmentIo io;
    for (const auto& name : live.live_before(cfg, fragment.front())) {
        if (used.count(name) && !declared.count(name)) io.inputs.insert(name);
    }
    const auto& after = live.live_after(cfg, fragment.back());
    for (const auto& name : after) {
        if (written.count(name) || declared.count(name)) io.outputs.insert(name);
    }
    auto escaping = declarations_used_after(model, fragment);
    io.outputs.insert(escaping.begin(), escaping.end());
    return io;
}

std::set<std::string> definitely_assigned(const MethodModel& model, const Cfg& cfg, const std::vector<StmtId>& fragment)
{
    if (fragment.empty()) return {};
    auto inside = fragment_nodes(model, cfg, fragment);
    NodeId start = cfg.entry_node[static_cast<std::size_t>(fragment.front())];

    std::set<std::string> universe;
    for (NodeId v : inside) {
        const auto& f = cfg.nodes[static_cast<std::size_t>(v)].facts;
        universe.insert(f.defs.begin(), f.defs.end());
    }
    // Forward must-analysis restricted to the fragment; sets start at the
    // universe (top) and shrink to the fixed point.
    std::map<NodeId, std::set<std::string>> in;
    for (NodeId v : inside) in[v] = universe;
    in[start].clear();

    auto out_of = [&](NodeId v, EdgeKind kind) {
        std::set<std::string> s = in[v];
        if (kind == EdgeKind::normal) {
            const auto& d = cfg.nodes[static_cast<std::size_t>(v)].facts.defs;
            s.insert(d.begin(), d.end());
        }
        return s;
    };

    bool changed = true;
    while (changed) {
        changed = false;
        for (NodeId v : inside) {
            if (v == start) continue;
            std::optional<std::set<std::string>> meet;
            for (const auto& e : cfg.edges) {
                if (e.to != v || !inside.count(e.from)) continue;
                auto o = out_of(e.from, e.kind);
                if (!meet) {
                    meet = std::move(o);
                } else {
                    std::set<std::string> x;
                    std::set_intersection(meet->begin(), meet->end(), o.begin(), o.end(), std::inserter(x, x.end()));
                    meet = std::move(x);
                }
            }
            if (meet && *meet != in[v]) {
                in[v] = std::move(*meet);
                changed = true;
            }
        }
    }

    std::optional<std::set<std::string>> result;
    for (const auto& e : cfg.edges) {
        if (!inside.count(e.from) || inside.count(e.to) || e.to == cfg.exit || e.kind != EdgeKind::normal) continue;
        auto o = out_of(e.from, e.kind);
        if (!result) {
            result = std::move(o);
        } else {
            std::set<std::string> x;
            std::set_intersection(result->begin(), result->end(), o.begin(), o.end(), std::inserter(x, x.end()));
            result = std::move(x);
        }
    }
    return result ? *result : universe;
}

}  // namespace xtract
