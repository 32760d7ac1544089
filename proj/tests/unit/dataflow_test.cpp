#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "xtract/dataflow.hpp"
#include "xtract/error.hpp"

namespace xtract {
namespace {

using testing::fixture_method;
using testing::load_fixture;

constexpr const char* kFixtures = "java/Fixtures.java";

std::set<std::string> S(std::initializer_list<const char*> names) { return {names.begin(), names.end()}; }

std::vector<MethodModel> all_fixture_methods()
{
    auto unit = load_fixture(kFixtures);
    std::vector<MethodModel> out;
    for (const auto& m : list_methods(unit)) out.push_back(locate_method(unit, MethodLocator{m.lines.first}));
    return out;
}

// Edges of readAll written out by hand from the try/catch/finally semantics.
TEST(Cfg, ReadAllEdges)
{
    auto m = fixture_method(kFixtures, "readAll");
    auto cfg = build_cfg(m);
    auto st = [&](StmtId id) { return cfg.stmt_node[static_cast<std::size_t>(id)]; };
    NodeId catch_entry = -1;
    for (std::size_t i = 0; i < cfg.nodes.size(); ++i) {
        if (cfg.nodes[i].kind == NodeKind::catch_entry) catch_entry = static_cast<NodeId>(i);
    }
    ASSERT_NE(catch_entry, -1);
    EXPECT_EQ(cfg.nodes[static_cast<std::size_t>(catch_entry)].facts.defs, S({"e"}));

    const auto N = EdgeKind::normal;
    const auto X = EdgeKind::exceptional;
    std::set<CfgEdge> expected{
        {cfg.entry, st(0), N},
        {st(0), st(1), N},
        // try header and try block throw into the catch and the finally
        {st(1), st(2), N},
        {st(1), catch_entry, X},
        {st(1), st(6), X},
        {st(2), st(3), N},
        {st(2), st(6), N},
        {st(2), catch_entry, X},
        {st(3), st(2), N},
        {st(3), catch_entry, X},
        {st(3), st(6), X},
        {catch_entry, st(4), N},
        {catch_entry, st(6), X},
        {st(4), st(5), N},
        {st(4), st(6), X},
        {st(5), st(6), N},
        // finally rethrows or falls through to the return
        {st(6), cfg.exit, N},
        {st(6), st(7), N},
        {st(7), cfg.exit, N},
    };
    std::set<CfgEdge> actual(cfg.edges.begin(), cfg.edges.end());
    EXPECT_EQ(actual, expected);
    EXPECT_EQ(cfg.loop_back_edges, (std::set<std::pair<NodeId, NodeId>>{{st(3), st(2)}}));
}

TEST(Cfg, ForLoopUsesStepNode)
{
    auto m = fixture_method(kFixtures, "sumArray");
    auto cfg = build_cfg(m);
    NodeId loop = cfg.stmt_node[1];
    NodeId step = cfg.step_node[1];
    NodeId body = cfg.stmt_node[2];
    ASSERT_GE(step, 0);
    EXPECT_TRUE(cfg.has_edge(loop, body));
    EXPECT_TRUE(cfg.has_edge(loop, cfg.stmt_node[3]));
    EXPECT_TRUE(cfg.has_edge(body, step));
    EXPECT_TRUE(cfg.has_edge(step, body));
    EXPECT_TRUE(cfg.has_edge(step, cfg.stmt_node[3]));
    EXPECT_TRUE(cfg.loop_back_edges.count({body, step}) || cfg.loop_back_edges.count({step, body}));
}

TEST(Cfg, DoLoopEntersBodyFirst)
{
    auto m = fixture_method(kFixtures, "doLoop");
    auto cfg = build_cfg(m);
    EXPECT_EQ(cfg.entry_node[1], cfg.stmt_node[2]);
    EXPECT_TRUE(cfg.has_edge(cfg.stmt_node[0], cfg.stmt_node[2]));
    EXPECT_TRUE(cfg.has_edge(cfg.stmt_node[2], cfg.stmt_node[1]));
    EXPECT_TRUE(cfg.has_edge(cfg.stmt_node[1], cfg.stmt_node[2]));
    EXPECT_TRUE(cfg.has_edge(cfg.stmt_node[1], cfg.stmt_node[3]));
}

TEST(Cfg, ContinueGoesToStepAndBreakToFollow)
{
    auto m = fixture_method(kFixtures, "labeledLoops");
    auto cfg = build_cfg(m);
    // statements: 0 hits, 1 outer foreach, 2 inner foreach, 3 if, 4 continue, 5 if, 6 break, 7 hits++, 8 return
    EXPECT_TRUE(cfg.has_edge(cfg.stmt_node[4], cfg.step_node[1]));
    EXPECT_TRUE(cfg.has_edge(cfg.stmt_node[6], cfg.stmt_node[8]));
    EXPECT_TRUE(cfg.unsupported.empty());
}

TEST(Cfg, SwitchGroupsFallThroughAndRulesDoNot)
{
    auto groups = fixture_method(kFixtures, "dayName");
    auto g = build_cfg(groups);
    // 1 switch; 2,3 case 1; 4,5 case 2; 6 default; 7 append
    EXPECT_TRUE(g.has_edge(g.stmt_node[1], g.stmt_node[2]));
    EXPECT_TRUE(g.has_edge(g.stmt_node[1], g.stmt_node[4]));
    EXPECT_TRUE(g.has_edge(g.stmt_node[1], g.stmt_node[6]));
    EXPECT_FALSE(g.has_edge(g.stmt_node[1], g.stmt_node[7])) << "default present";
    EXPECT_TRUE(g.has_edge(g.stmt_node[3], g.stmt_node[7]));
    EXPECT_TRUE(g.has_edge(g.stmt_node[6], g.stmt_node[7]));

    auto rules = fixture_method(kFixtures, "switchRules");
    auto r = build_cfg(rules);
    // 1 switch; 2 rule 1; 3,4 block rule; 5 default; 6 append
    for (StmtId last : {2, 4, 5}) EXPECT_TRUE(r.has_edge(r.stmt_node[last], r.stmt_node[6])) << last;
    EXPECT_FALSE(r.has_edge(r.stmt_node[2], r.stmt_node[3]));
}

TEST(Cfg, UnknownLabelIsUnsupported)
{
    auto unit = parse_unit("class A {\n  void f() {\n    while (true) {\n      break missing;\n    }\n  }\n}\n", "A.java");
    auto m = locate_method(unit, MethodLocator{std::string("f")});
    auto cfg = build_cfg(m);
    EXPECT_EQ(cfg.unsupported, std::vector<StmtId>{1});
    EXPECT_TRUE(cfg.has_edge(cfg.stmt_node[1], cfg.exit));
}

TEST(Cfg, EveryNodeReachableFromEntry)
{
    for (const auto& m : all_fixture_methods()) {
        auto cfg = build_cfg(m);
        std::vector<char> seen(cfg.nodes.size());
        std::vector<NodeId> stack{cfg.entry};
        while (!stack.empty()) {
            NodeId n = stack.back();
            stack.pop_back();
            if (seen[static_cast<std::size_t>(n)]) continue;
            seen[static_cast<std::size_t>(n)] = 1;
            for (NodeId s : cfg.successors[static_cast<std::size_t>(n)]) stack.push_back(s);
        }
        for (std::size_t i = 0; i < seen.size(); ++i) {
            if (cfg.nodes[i].kind == NodeKind::exit) continue;
            EXPECT_TRUE(seen[i]) << m.name << " node " << i;
        }
    }
}

TEST(Liveness, HandValues)
{
    auto m = fixture_method(kFixtures, "sumArray");
    auto live = liveness(build_cfg(m), m);
    EXPECT_EQ(live.live_in[0], S({"xs"}));
    EXPECT_EQ(live.live_out[0], S({"s", "xs"}));
    EXPECT_EQ(live.live_in[1], S({"s", "xs"}));
    EXPECT_EQ(live.live_in[4], S({"s"}));
    EXPECT_TRUE(live.live_out[4].empty());

    auto c = fixture_method(kFixtures, "conditionalAssign");
    auto c_cfg = build_cfg(c);
    auto lc = liveness(c_cfg, c);
    EXPECT_EQ(lc.live_in[1], S({"flag"}));
    EXPECT_TRUE(lc.live_out[1].empty()) << "both arms assign v before reading it";
    EXPECT_EQ(lc.live_after(c_cfg, 1), S({"v"}));

    // a conditional write does not kill
    auto t = fixture_method(kFixtures, "ternaryAndShortCircuit");
    auto lt = liveness(build_cfg(t), t);
    EXPECT_TRUE(lt.live_in[2].count("seen"));
}

TEST(Liveness, DoLoopLiveBeforeIsTheBodyEntry)
{
    auto m = fixture_method(kFixtures, "doLoop");
    auto cfg = build_cfg(m);
    auto live = liveness(cfg, m);
    EXPECT_EQ(live.live_before(cfg, 1), S({"k", "limit"}));
    EXPECT_EQ(live.live_after(cfg, 1), S({"k"}));
}

TEST(Liveness, SatisfiesDataflowEquations)
{
    auto unit = parse_unit(testing::generate_long_method(400), "Long.java");
    auto methods = all_fixture_methods();
    methods.push_back(locate_method(unit, MethodLocator{std::string("longMethod")}));
    for (const auto& m : methods) {
        auto cfg = build_cfg(m);
        auto live = liveness(cfg, m);
        for (std::size_t n = 0; n < cfg.nodes.size(); ++n) {
            std::set<std::string> out;
            for (NodeId s : cfg.successors[n]) {
                const auto& in = live.node_live_in[static_cast<std::size_t>(s)];
                out.insert(in.begin(), in.end());
            }
            EXPECT_EQ(live.node_live_out[n], out) << m.name << " node " << n;
            const auto& f = cfg.nodes[n].facts;
            std::set<std::string> in = f.uses;
            for (const auto& v : out) {
                if (!f.defs.count(v)) in.insert(v);
            }
            EXPECT_EQ(live.node_live_in[n], in) << m.name << " node " << n;
        }
    }
}

TEST(Liveness, AgreesWithPathEnumeration)
{
    for (const auto& m : all_fixture_methods()) {
        auto cfg = build_cfg(m);
        auto live = liveness(cfg, m);
        auto oracle = testing::path_live_in(cfg);
        for (std::size_t n = 0; n < cfg.nodes.size(); ++n) {
            EXPECT_EQ(live.node_live_in[n], oracle[n]) << m.name << " node " << n;
        }
    }
}

TEST(FragmentIo, HandValues)
{
    auto sum = fixture_method(kFixtures, "sumArray");
    auto sum_cfg = build_cfg(sum);
    auto sum_live = liveness(sum_cfg, sum);
    auto io = fragment_io(sum, sum_cfg, sum_live, {1});
    EXPECT_EQ(io.inputs, S({"s", "xs"}));
    EXPECT_EQ(io.outputs, S({"s"}));

    auto two = fixture_method(kFixtures, "twoOutputs");
    auto two_cfg = build_cfg(two);
    auto two_io = fragment_io(two, two_cfg, liveness(two_cfg, two), {0, 1});
    EXPECT_EQ(two_io.inputs, S({"a"}));
    EXPECT_EQ(two_io.outputs, S({"lo", "hi"}));

    auto day = fixture_method(kFixtures, "dayName");
    auto day_cfg = build_cfg(day);
    auto day_io = fragment_io(day, day_cfg, liveness(day_cfg, day), {1});
    EXPECT_EQ(day_io.inputs, S({"d"}));
    EXPECT_EQ(day_io.outputs, S({"name"}));

    auto loop = fixture_method(kFixtures, "countdown");
    auto loop_cfg = build_cfg(loop);
    auto loop_io = fragment_io(loop, loop_cfg, liveness(loop_cfg, loop), {2, 3});
    EXPECT_EQ(loop_io.inputs, S({"i"}));
    EXPECT_EQ(loop_io.outputs, S({"i"}));
}

TEST(FragmentIo, DeclarationUsedByLaterCaseGroupIsAnOutput)
{
    auto unit = parse_unit(
        "class A {\n  void f(int k) {\n    switch (k) {\n      case 1:\n        int x;\n        x = 2;\n"
        "        g(x);\n        break;\n      default:\n        x = 3;\n        g(x);\n    }\n  }\n"
        "  void g(int v) { }\n}\n",
        "A.java");
    auto m = locate_method(unit, MethodLocator{std::string("f")});
    auto cfg = build_cfg(m);
    EXPECT_EQ(declarations_used_after(m, {1}), S({"x"}));
    auto io = fragment_io(m, cfg, liveness(cfg, m), {1});
    EXPECT_EQ(io.outputs, S({"x"}));
}

TEST(FragmentIo, NonSiblingRunIsRejected)
{
    auto m = fixture_method(kFixtures, "sumArray");
    auto cfg = build_cfg(m);
    auto live = liveness(cfg, m);
    EXPECT_FALSE(is_sibling_run(m, {1, 2}));
    EXPECT_FALSE(is_sibling_run(m, {0, 3}));
    EXPECT_TRUE(is_sibling_run(m, {0, 1}));
    try {
        (void)fragment_io(m, cfg, live, {1, 2});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::not_aligned);
    }
}

TEST(FragmentIo, AgreesWithOracleOnEverySiblingRun)
{
    int checked = 0;
    for (const auto& m : all_fixture_methods()) {
        auto cfg = build_cfg(m);
        auto live = liveness(cfg, m);
        for (const auto& run : testing::all_sibling_runs(m)) {
            auto io = fragment_io(m, cfg, live, run);
            auto expected = testing::oracle_fragment_io(m, cfg, run);
            EXPECT_EQ(io.inputs, expected.inputs) << m.name << " from stmt " << run.front();
            EXPECT_EQ(io.outputs, expected.outputs) << m.name << " from stmt " << run.front();
            ++checked;
        }
    }
    EXPECT_GT(checked, 100);
}

TEST(Completion, ExitsAbruptly)
{
    auto classify = fixture_method(kFixtures, "classify");
    EXPECT_TRUE(exits_abruptly(classify, build_cfg(classify), {0}));
    auto early = fixture_method(kFixtures, "earlyExit");
    EXPECT_FALSE(exits_abruptly(early, build_cfg(early), {0}));
    auto fin = fixture_method(kFixtures, "tryFinallyReturn");
    EXPECT_TRUE(exits_abruptly(fin, build_cfg(fin), {1}));
    auto caught = fixture_method(kFixtures, "tryReturn");
    EXPECT_FALSE(exits_abruptly(caught, build_cfg(caught), {0}));
}

TEST(Completion, DefinitelyAssigned)
{
    auto both = fixture_method(kFixtures, "conditionalAssign");
    EXPECT_TRUE(definitely_assigned(both, build_cfg(both), {1}).count("v"));
    auto maybe = fixture_method(kFixtures, "maybeAssign");
    EXPECT_FALSE(definitely_assigned(maybe, build_cfg(maybe), {1}).count("v"));
    auto ternary = fixture_method(kFixtures, "ternaryAndShortCircuit");
    auto da = definitely_assigned(ternary, build_cfg(ternary), {2});
    EXPECT_TRUE(da.count("ok"));
    EXPECT_FALSE(da.count("seen"));
}

}  // namespace
}  // namespace xtract
