#pragma once

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "xtract/source_model.hpp"

namespace xtract {

using NodeId = int;

enum class NodeKind {
    entry,
    exit,
    statement,
    step,         // per-iteration update of a for / variable binding of a foreach
    catch_entry,  // binds the catch parameter
};

enum class EdgeKind { normal, exceptional };

struct CfgNode {
    NodeKind kind = NodeKind::statement;
    std::optional<StmtId> stmt;  // owning statement for statement/step/catch nodes
    int body_index = -1;         // catch_entry: index of the catch body
    FlowFacts facts;
};

struct CfgEdge {
    NodeId from = 0;
    NodeId to = 0;
    EdgeKind kind = EdgeKind::normal;

    friend bool operator==(const CfgEdge&, const CfgEdge&) = default;
    friend auto operator<=>(const CfgEdge&, const CfgEdge&) = default;
};

/// Statement-level control-flow graph of one method.
struct Cfg {
    std::vector<CfgNode> nodes;
    std::vector<CfgEdge> edges;
    std::vector<std::vector<NodeId>> successors;
    std::vector<std::vector<NodeId>> predecessors;
    /// Retreating edges of a depth-first walk from entry.
    std::set<std::pair<NodeId, NodeId>> loop_back_edges;
    NodeId entry = 0;
    NodeId exit = 1;

    std::vector<NodeId> stmt_node;   // StmtId -> its node
    std::vector<NodeId> entry_node;  // StmtId -> node where control enters it
    std::vector<NodeId> follow_node; // StmtId -> node reached on normal completion
    std::vector<NodeId> step_node;   // StmtId -> step node or -1

    /// Jumps whose label is not declared by an enclosing statement.
    std::vector<StmtId> unsupported;

    [[nodiscard]] bool has_edge(NodeId from, NodeId to) const;
    [[nodiscard]] std::optional<EdgeKind> edge_kind(NodeId from, NodeId to) const;
};

[[nodiscard]] Cfg build_cfg(const MethodModel& model);

struct LivenessResult {
    std::vector<std::set<std::string>> node_live_in;
    std::vector<std::set<std::string>> node_live_out;
    /// Keyed by StmtId: the sets at the statement's own node.
    std::vector<std::set<std::string>> live_in;
    std::vector<std::set<std::string>> live_out;

    /// Live where control enters the statement (differs from live_in for do loops).
    [[nodiscard]] const std::set<std::string>& live_before(const Cfg& cfg, StmtId id) const;
    /// Live where control goes when the statement completes normally.
    [[nodiscard]] const std::set<std::string>& live_after(const Cfg& cfg, StmtId id) const;
};

[[nodiscard]] LivenessResult liveness(const Cfg& cfg, const MethodModel& model);

struct FragmentIo {
    std::set<std::string> inputs;
    std::set<std::string> outputs;
};

/// Throws Error(not_aligned) unless `fragment` is a run of consecutive siblings.
[[nodiscard]] FragmentIo fragment_io(const MethodModel& model, const Cfg& cfg, const LivenessResult& live,
                                     const std::vector<StmtId>& fragment);

/// True when `fragment` is a non-empty run of consecutive siblings.
[[nodiscard]] bool is_sibling_run(const MethodModel& model, const std::vector<StmtId>& fragment);

/// Every node belonging to the fragment's statements, including step and
/// catch nodes.
[[nodiscard]] std::set<NodeId> fragment_nodes(const MethodModel& model, const Cfg& cfg,
                                              const std::vector<StmtId>& fragment);

/// True when no normal-flow path leaves the fragment other than to exit: every
/// execution of the fragment returns or throws.
[[nodiscard]] bool exits_abruptly(const MethodModel& model, const Cfg& cfg, const std::vector<StmtId>& fragment);

/// Names declared by the fragment's top-level statements that are referenced
/// after it within their scope (later siblings, later case groups).
[[nodiscard]] std::set<std::string> declarations_used_after(const MethodModel& model,
                                                            const std::vector<StmtId>& fragment);

/// Names surely assigned on every normal path through the fragment.
[[nodiscard]] std::set<std::string> definitely_assigned(const MethodModel& model, const Cfg& cfg,
                                                        const std::vector<StmtId>& fragment);

}  // namespace xtract
