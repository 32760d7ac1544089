#include <gtest/gtest.h>

#include <algorithm>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "xtract/error.hpp"
#include "xtract/source_model.hpp"

namespace xtract {
namespace {

using testing::fixture_method;
using testing::load_fixture;

constexpr const char* kFixtures = "java/Fixtures.java";

std::set<std::string> S(std::initializer_list<const char*> names) { return {names.begin(), names.end()}; }

std::vector<LineRange> top_lines(const MethodModel& m)
{
    std::vector<LineRange> out;
    for (StmtId id : m.top_level) out.push_back(m.statement(id).span.lines);
    return out;
}

TEST(ParseUnit, SingleLineUnit)
{
    auto unit = parse_unit("class A { }", "A.java");
    EXPECT_EQ(unit.line_count(), 1);
    EXPECT_EQ(unit.line_index(), std::vector<std::size_t>{0});
}

TEST(ParseUnit, TrailingNewlineDoesNotStartALine)
{
    auto unit = parse_unit("class A {\n}\n", "A.java");
    EXPECT_EQ(unit.line_count(), 2);
    EXPECT_EQ(unit.line_text(2), "}");
    EXPECT_EQ(parse_unit("", "E.java").line_count(), 1);
}

TEST(ParseUnit, LineIndexStrictlyIncreasing)
{
    auto unit = load_fixture(kFixtures);
    const auto& idx = unit.line_index();
    EXPECT_TRUE(std::is_sorted(idx.begin(), idx.end()));
    EXPECT_EQ(std::adjacent_find(idx.begin(), idx.end()), idx.end());
}

TEST(ParseUnit, UnbalancedBracesRaiseParseErrorWithPosition)
{
    try {
        (void)parse_unit("class A {\n  void f() {\n    int x = 1;\n", "A.java");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.code(), ErrorCode::parse_error);
        EXPECT_GE(e.line(), 1);
        EXPECT_GE(e.column(), 1);
    }
}

TEST(ParseUnit, SyntaxErrorLine)
{
    try {
        (void)parse_unit("class A {\n  void f() {\n    int x = ;\n  }\n}\n", "A.java");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3);
    }
}

TEST(ParseUnit, InvalidUtf8IsRejected)
{
    std::string text = "class A {\n  // \xC3\x28\n}\n";
    try {
        (void)parse_unit(text, "A.java");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2);
        EXPECT_EQ(e.column(), 6);
    }
}

TEST(ParseUnit, CommentAndBlankLinesAreNotCodeLines)
{
    auto unit = parse_unit("class A {\n\n  // note\n  /* a\n   b */\n  int x;\n}\n", "A.java");
    EXPECT_TRUE(unit.is_code_line(1));
    EXPECT_FALSE(unit.is_code_line(2));
    EXPECT_FALSE(unit.is_code_line(3));
    EXPECT_FALSE(unit.is_code_line(4));
    EXPECT_FALSE(unit.is_code_line(5));
    EXPECT_TRUE(unit.is_code_line(6));
}

TEST(ParseUnit, RenderRoundTripIsStructurallyIdentical)
{
    auto unit = load_fixture(kFixtures);
    auto again = parse_unit(unit.text(), unit.path());
    for (const auto& m : list_methods(unit)) {
        auto a = locate_method(unit, MethodLocator{m.lines.first});
        auto b = locate_method(again, MethodLocator{m.lines.first});
        ASSERT_EQ(a.statements.size(), b.statements.size()) << m.name;
        for (std::size_t i = 0; i < a.statements.size(); ++i) {
            EXPECT_EQ(a.statements[i].span.lines, b.statements[i].span.lines);
            EXPECT_EQ(a.statements[i].kind, b.statements[i].kind);
            EXPECT_EQ(a.statements[i].facts, b.statements[i].facts);
        }
    }
}

TEST(LocateMethod, ByNameAndByLine)
{
    auto unit = load_fixture(kFixtures);
    auto by_name = locate_method(unit, MethodLocator::parse("sumArray"));
    EXPECT_EQ(by_name.name, "sumArray");
    auto by_line = locate_method(unit, MethodLocator::parse("22"));
    EXPECT_EQ(by_line.name, "sumArray");
}

TEST(LocateMethod, InnermostMethodWins)
{
    auto unit = load_fixture(kFixtures);
    EXPECT_EQ(locate_method(unit, MethodLocator{251}).name, "run");
    EXPECT_EQ(locate_method(unit, MethodLocator{255}).name, "anonymousShadow");
}

TEST(LocateMethod, LineOutsideAnyMethodIsNotFound)
{
    auto unit = load_fixture(kFixtures);
    try {
        (void)locate_method(unit, MethodLocator{8});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::method_not_found);
    }
    try {
        (void)locate_method(unit, MethodLocator{std::string("nope")});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::method_not_found);
    }
}

TEST(LocateMethod, OverloadsByNameAreAmbiguous)
{
    auto unit = parse_unit("class A {\n  void f(int x) { }\n  void f(String s) { }\n}\n", "A.java");
    try {
        (void)locate_method(unit, MethodLocator{std::string("f")});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ambiguous_method);
    }
    EXPECT_EQ(locate_method(unit, MethodLocator{3}).parameters.at(0).type, "String");
}

TEST(LocateMethod, ListsEveryMethodWithBody)
{
    auto methods = list_methods(load_fixture(kFixtures));
    EXPECT_EQ(methods.size(), 25u);
    EXPECT_EQ(methods.front().name, "straightLine");
    EXPECT_EQ(methods.front().arity, 2);
    EXPECT_EQ(methods.front().lines, (LineRange{11, 17}));
}

TEST(MethodModel, SignatureFacts)
{
    auto m = fixture_method(kFixtures, "readAll");
    EXPECT_EQ(m.return_type, "int");
    EXPECT_EQ(m.throws_clause, "throws IOException");
    EXPECT_FALSE(m.is_static);
    EXPECT_EQ(m.indent, "    ");
    ASSERT_EQ(m.parameters.size(), 1u);
    EXPECT_EQ(m.parameters[0].type, "java.io.Reader");
    EXPECT_TRUE(fixture_method(kFixtures, "staticHelper").is_static);
    EXPECT_EQ(fixture_method(kFixtures, "sumArray").parameters.at(0).type, "int[]");
}

TEST(MethodModel, VarargsAndArrayDeclaratorTypes)
{
    auto unit = parse_unit("class A {\n  void f(String... xs) {\n    int a[] = null;\n  }\n}\n", "A.java");
    auto m = locate_method(unit, MethodLocator{std::string("f")});
    EXPECT_EQ(m.parameters.at(0).type, "String[]");
    EXPECT_EQ(m.locals.at(0).type, "int[]");
}

TEST(MethodModel, SpansOfSumArray)
{
    auto m = fixture_method(kFixtures, "sumArray");
    EXPECT_EQ(m.declaration_span, (LineRange{19, 26}));
    EXPECT_EQ(m.signature_span, (LineRange{19, 19}));
    EXPECT_EQ(m.body_span, (LineRange{20, 25}));
    EXPECT_EQ(top_lines(m), (std::vector<LineRange>{{20, 20}, {21, 23}, {24, 24}, {25, 25}}));
    EXPECT_EQ(m.statement(1).kind, StmtKind::loop);
    EXPECT_EQ(m.statement(1).loop, LoopKind::for_);
    EXPECT_EQ(m.statement(2).parent, std::optional<StmtId>{1});
    EXPECT_EQ(m.statement(2).span.lines, (LineRange{22, 22}));
}

TEST(MethodModel, DefUseOfSumArray)
{
    auto m = fixture_method(kFixtures, "sumArray");
    EXPECT_EQ(m.statement(0).facts.defs, S({"s"}));
    EXPECT_TRUE(m.statement(0).facts.uses.empty());
    const auto& loop = m.statement(1);
    EXPECT_EQ(loop.facts.defs, S({"i"}));
    EXPECT_EQ(loop.facts.uses, S({"xs"}));
    EXPECT_EQ(loop.step.defs, S({"i"}));
    EXPECT_EQ(loop.step.uses, S({"i", "xs"}));
    EXPECT_EQ(loop.scoped_declares, std::vector<std::string>{"i"});
    EXPECT_EQ(m.statement(2).facts.defs, S({"s"}));
    EXPECT_EQ(m.statement(2).facts.uses, S({"s", "xs", "i"}));
    EXPECT_TRUE(m.statement(3).facts.empty()) << "log is a field";
    EXPECT_EQ(m.statement(4).facts.uses, S({"s"}));
}

TEST(MethodModel, ShortCircuitAndTernaryWritesAreConditional)
{
    auto m = fixture_method(kFixtures, "ternaryAndShortCircuit");
    EXPECT_EQ(m.statement(0).facts.defs, S({"m"}));
    EXPECT_EQ(m.statement(0).facts.uses, S({"a", "b"}));
    EXPECT_EQ(m.statement(2).facts.defs, S({"ok"}));
    EXPECT_EQ(m.statement(2).facts.may_defs, S({"seen"}));
    EXPECT_EQ(m.statement(2).facts.uses, S({"m"}));
}

TEST(MethodModel, CompoundAssignmentReadsFirst)
{
    auto m = fixture_method(kFixtures, "tryFinallyReturn");
    const auto& st = m.statement(2);  // r *= 2;
    EXPECT_EQ(st.facts.uses, S({"r"}));
    EXPECT_EQ(st.facts.defs, S({"r"}));
}

TEST(MethodModel, LambdaCapturesCountAsUses)
{
    auto m = fixture_method(kFixtures, "lambdaCapture");
    EXPECT_EQ(m.statement(1).facts.uses, S({"items", "prefix"}));
    EXPECT_TRUE(m.statement(1).facts.defs.empty());
}

TEST(MethodModel, NamesDeclaredInAnonymousBodiesShadowLocals)
{
    auto m = fixture_method(kFixtures, "anonymousShadow");
    EXPECT_EQ(m.statement(1).facts.defs, S({"r"}));
    EXPECT_TRUE(m.statement(1).facts.uses.empty());
    EXPECT_EQ(m.statement(2).facts.uses, S({"base"}));
}

TEST(MethodModel, PatternBindingIsDeclaredByTheCondition)
{
    auto m = fixture_method(kFixtures, "patternBinding");
    const auto& cond = m.statement(0);
    EXPECT_EQ(cond.declares, std::vector<std::string>{"str"});
    EXPECT_EQ(cond.facts.defs, S({"str"}));
    EXPECT_EQ(cond.facts.uses, S({"o"}));
    EXPECT_EQ(m.statement(2).facts.uses, S({"str"}));
}

TEST(MethodModel, BreakResolvesToEnclosingLoop)
{
    auto m = fixture_method(kFixtures, "findFirst");
    const auto& brk = m.statement(4);
    ASSERT_EQ(brk.kind, StmtKind::break_);
    ASSERT_TRUE(brk.jump);
    EXPECT_EQ(brk.jump->target, std::optional<StmtId>{1});
    EXPECT_FALSE(brk.jump->unresolved);
}

TEST(MethodModel, LabeledJumpsResolveToLabeledStatement)
{
    auto m = fixture_method(kFixtures, "labeledLoops");
    const auto& outer = m.statement(1);
    EXPECT_EQ(outer.labels, std::vector<std::string>{"outer"});
    EXPECT_EQ(outer.loop, LoopKind::foreach);
    EXPECT_EQ(outer.span.lines, (LineRange{107, 118}));
    int resolved = 0;
    for (const auto& s : m.statements) {
        if (s.jump && s.jump->label) {
            EXPECT_EQ(s.jump->target, std::optional<StmtId>{1});
            ++resolved;
        }
    }
    EXPECT_EQ(resolved, 2);
}

TEST(MethodModel, LabelOutsideMethodIsUnresolved)
{
    auto unit = parse_unit("class A {\n  void f() {\n    while (true) {\n      break missing;\n    }\n  }\n}\n", "A.java");
    auto m = locate_method(unit, MethodLocator{std::string("f")});
    EXPECT_TRUE(m.statement(1).jump->unresolved);
}

TEST(MethodModel, SwitchGroupsAndRules)
{
    auto groups = fixture_method(kFixtures, "dayName");
    const auto& sw = groups.statement(1);
    ASSERT_EQ(sw.kind, StmtKind::switch_);
    ASSERT_EQ(sw.bodies.size(), 3u);
    EXPECT_TRUE(sw.has_default);
    EXPECT_TRUE(sw.bodies[2].is_default);
    EXPECT_EQ(sw.bodies[0].role, BodyRole::case_group);
    EXPECT_EQ(sw.bodies[0].statements.size(), 2u);
    EXPECT_EQ(sw.facts.uses, S({"d"}));

    auto rules = fixture_method(kFixtures, "switchRules");
    const auto& sr = rules.statement(1);
    ASSERT_EQ(sr.bodies.size(), 3u);
    EXPECT_EQ(sr.bodies[1].role, BodyRole::case_rule);
    EXPECT_EQ(sr.bodies[1].statements.size(), 2u);
}

TEST(MethodModel, TryBodies)
{
    auto m = fixture_method(kFixtures, "readAll");
    const auto& t = m.statement(1);
    ASSERT_EQ(t.kind, StmtKind::try_);
    ASSERT_EQ(t.bodies.size(), 3u);
    EXPECT_EQ(t.bodies[0].role, BodyRole::try_block);
    EXPECT_EQ(t.bodies[1].role, BodyRole::catch_block);
    EXPECT_EQ(t.bodies[1].catch_parameter, std::optional<std::string>{"e"});
    EXPECT_EQ(t.bodies[2].role, BodyRole::finally_block);
    EXPECT_EQ(t.scoped_declares, std::vector<std::string>{"e"});
}

TEST(MethodModel, DoLoopConditionIsTheHeader)
{
    auto m = fixture_method(kFixtures, "doLoop");
    EXPECT_EQ(m.statement(1).loop, LoopKind::do_);
    EXPECT_EQ(m.statement(1).facts.uses, S({"k", "limit"}));
}

TEST(MethodModel, ExplicitConstructorCallIsFlagged)
{
    auto unit = parse_unit("class A {\n  A(int x) {\n    this(x, 1);\n    go();\n  }\n  A(int x, int y) { }\n}\n", "A.java");
    auto m = locate_method(unit, MethodLocator{2});
    EXPECT_TRUE(m.is_constructor);
    EXPECT_EQ(m.return_type, "void");
    EXPECT_TRUE(m.statement(0).constructor_call);
    EXPECT_FALSE(m.statement(1).constructor_call);
    EXPECT_EQ(m.statement(0).facts.uses, S({"x"}));
}

// Span invariants hold for every fixture method.
TEST(MethodModel, SpanInvariants)
{
    auto unit = load_fixture(kFixtures);
    for (const auto& summary : list_methods(unit)) {
        auto m = locate_method(unit, MethodLocator{summary.lines.first});
        auto names = m.variable_names();
        for (const auto& s : m.statements) {
            EXPECT_TRUE(m.body_span.contains(s.span.lines)) << m.name << " stmt " << s.id;
            for (const auto& v : s.defs()) EXPECT_TRUE(names.count(v)) << m.name << " " << v;
            for (const auto& v : s.uses()) EXPECT_TRUE(names.count(v)) << m.name << " " << v;
            if (s.parent) {
                const auto& p = m.statement(*s.parent);
                EXPECT_LE(p.span.start_byte, s.span.start_byte);
                EXPECT_GE(p.span.end_byte, s.span.end_byte);
            }
            for (const auto& b : s.bodies) {
                for (std::size_t i = 1; i < b.statements.size(); ++i) {
                    EXPECT_LE(m.statement(b.statements[i - 1]).span.end_byte,
                              m.statement(b.statements[i]).span.start_byte);
                }
            }
        }
        // Statement-bearing lines of the body are covered by top-level spans.
        for (int line : m.code_lines()) {
            bool covered = std::any_of(m.top_level.begin(), m.top_level.end(),
                                       [&](StmtId id) { return m.statement(id).span.lines.contains(line); });
            EXPECT_TRUE(covered) << m.name << " line " << line;
        }
    }
}

TEST(StatementsInRange, FullBodyIsAllTopLevel)
{
    auto m = fixture_method(kFixtures, "sumArray");
    auto sel = statements_in_range(m, m.body_span);
    ASSERT_TRUE(std::holds_alternative<AlignedRun>(sel));
    EXPECT_EQ(std::get<AlignedRun>(sel).statements, m.top_level);
}

TEST(StatementsInRange, ExactStatements)
{
    auto m = fixture_method(kFixtures, "straightLine");
    auto sel = statements_in_range(m, LineRange{13, 15});
    ASSERT_TRUE(std::holds_alternative<AlignedRun>(sel));
    EXPECT_EQ(std::get<AlignedRun>(sel).statements, (std::vector<StmtId>{1, 2, 3}));
    EXPECT_EQ(std::get<AlignedRun>(sel).lines, (LineRange{13, 15}));
}

TEST(StatementsInRange, NestedRun)
{
    auto m = fixture_method(kFixtures, "readAll");
    auto sel = statements_in_range(m, LineRange{83, 84});
    ASSERT_TRUE(std::holds_alternative<AlignedRun>(sel));
    const auto& run = std::get<AlignedRun>(sel);
    ASSERT_EQ(run.statements.size(), 2u);
    EXPECT_EQ(m.statement(run.statements[0]).span.lines, (LineRange{83, 83}));
}

TEST(StatementsInRange, MidCompoundStatementIsNotAligned)
{
    auto m = fixture_method(kFixtures, "sumArray");
    auto sel = statements_in_range(m, LineRange{22, 24});
    ASSERT_TRUE(std::holds_alternative<NotAligned>(sel));
    const auto& enclosing = std::get<NotAligned>(sel).enclosing;
    ASSERT_TRUE(enclosing);
    EXPECT_EQ(enclosing->lines, (LineRange{21, 24}));
    EXPECT_EQ(enclosing->statements, (std::vector<StmtId>{1, 3}));
}

TEST(StatementsInRange, StartingInsideIfCarriesTheIfSpan)
{
    auto m = fixture_method(kFixtures, "earlyExit");
    auto sel = statements_in_range(m, LineRange{59, 60});
    ASSERT_TRUE(std::holds_alternative<NotAligned>(sel));
    ASSERT_TRUE(std::get<NotAligned>(sel).enclosing);
    EXPECT_EQ(std::get<NotAligned>(sel).enclosing->lines, (LineRange{58, 60}));
}

TEST(StatementsInRange, RangeOutsideBodyIsEmptyRange)
{
    auto m = fixture_method(kFixtures, "sumArray");
    try {
        (void)statements_in_range(m, LineRange{1, 5});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::empty_range);
    }
}

TEST(StatementsInRange, BlankLinesYieldEmptyRun)
{
    auto unit = parse_unit("class A {\n  void f() {\n    a();\n\n    // c\n    b();\n  }\n}\n", "A.java");
    auto m = locate_method(unit, MethodLocator{std::string("f")});
    auto sel = statements_in_range(m, LineRange{4, 5});
    ASSERT_TRUE(std::holds_alternative<AlignedRun>(sel));
    EXPECT_TRUE(std::get<AlignedRun>(sel).statements.empty());
}

TEST(StatementsInRange, SharedLineStatementsAreNotAligned)
{
    auto unit = parse_unit("class A {\n  void f() {\n    a(); b();\n    c();\n  }\n}\n", "A.java");
    auto m = locate_method(unit, MethodLocator{std::string("f")});
    EXPECT_FALSE(is_aligned(m, {0}));
    EXPECT_TRUE(is_aligned(m, {0, 1}));
    auto grown = align_outward(m, {1});
    ASSERT_TRUE(grown);
    EXPECT_EQ(grown->statements, (std::vector<StmtId>{0, 1}));
}

TEST(StatementsInRange, OneLineMethodCannotAlign)
{
    auto unit = parse_unit("class A {\n  void f() { a(); b(); }\n}\n", "A.java");
    auto m = locate_method(unit, MethodLocator{std::string("f")});
    EXPECT_EQ(m.body_span, (LineRange{2, 2}));
    auto sel = statements_in_range(m, LineRange{2, 2});
    ASSERT_TRUE(std::holds_alternative<NotAligned>(sel));
    EXPECT_FALSE(std::get<NotAligned>(sel).enclosing);
}

TEST(Alignment, AgreesWithTextScanOnEveryFixtureRun)
{
    auto unit = load_fixture(kFixtures);
    int checked = 0;
    for (const auto& summary : list_methods(unit)) {
        auto m = locate_method(unit, MethodLocator{summary.lines.first});
        for (const auto& run : testing::all_sibling_runs(m)) {
            EXPECT_EQ(is_aligned(m, run), testing::text_aligned(m, run)) << m.name;
            ++checked;
        }
    }
    EXPECT_GT(checked, 100);
}

}  // namespace
}  // namespace xtract
