#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "xtract/candidates.hpp"

namespace xtract {
namespace {

using testing::fixture_method;
using testing::load_fixture;

constexpr const char* kFixtures = "java/Fixtures.java";

Suggestion raw(int first, int last, std::string name = "extracted")
{
    Suggestion s;
    s.proposed_name = std::move(name);
    s.raw_range = LineRange{first, last};
    return s;
}

struct Checked {
    Suggestion normalized;
    Suggestion validated;
    Suggestion filtered;
};

Checked run(const MethodModel& m, Suggestion s, const FilterOptions& options = {})
{
    MethodAnalysis a(m);
    Checked c;
    c.normalized = normalize(m, std::move(s));
    c.validated = validate(m, a.cfg, a.live, c.normalized);
    c.filtered = c.validated.state == SuggestionState::valid ? filter_useful(m, c.validated, options) : c.validated;
    return c;
}

std::optional<RejectionCategory> category_of(const MethodModel& m, Suggestion s)
{
    auto r = run(m, std::move(s)).filtered;
    if (!r.reason) return std::nullopt;
    return r.reason->category;
}

TEST(Categories, NamesRoundTrip)
{
    for (auto c : {RejectionCategory::out_of_bounds, RejectionCategory::inverted_range, RejectionCategory::unalignable,
                   RejectionCategory::jump_crosses_boundary, RejectionCategory::multiple_outputs,
                   RejectionCategory::conditional_return, RejectionCategory::whole_body,
                   RejectionCategory::empty_fragment, RejectionCategory::name_invalid}) {
        EXPECT_EQ(parse_rejection_category(to_string(c)), c);
    }
    EXPECT_FALSE(parse_rejection_category("bogus"));
}

TEST(Identifier, JavaRules)
{
    EXPECT_TRUE(is_java_identifier("computeTotal"));
    EXPECT_TRUE(is_java_identifier("_x1"));
    EXPECT_TRUE(is_java_identifier("$tmp"));
    EXPECT_FALSE(is_java_identifier(""));
    EXPECT_FALSE(is_java_identifier("_"));
    EXPECT_FALSE(is_java_identifier("1abc"));
    EXPECT_FALSE(is_java_identifier("has space"));
    EXPECT_FALSE(is_java_identifier("class"));
    EXPECT_FALSE(is_java_identifier("null"));
    EXPECT_FALSE(is_java_identifier("a-b"));
}

TEST(Normalize, SnapsOutwardToEnclosingRun)
{
    auto m = fixture_method(kFixtures, "sumArray");
    auto n = normalize(m, raw(22, 24));
    EXPECT_EQ(n.state, SuggestionState::normalized);
    EXPECT_EQ(n.normalized_range, (LineRange{21, 24}));
    EXPECT_EQ(n.fragment, (std::vector<StmtId>{1, 3}));
    EXPECT_EQ(n.raw_range, (LineRange{22, 24}));
}

TEST(Normalize, ClampsToBody)
{
    auto m = fixture_method(kFixtures, "straightLine");
    auto n = normalize(m, raw(5, 13));
    EXPECT_EQ(n.normalized_range, (LineRange{12, 13}));
}

TEST(Normalize, IsIdempotent)
{
    auto unit = load_fixture(kFixtures);
    for (const auto& summary : list_methods(unit)) {
        auto m = locate_method(unit, MethodLocator{summary.lines.first});
        for (int a = m.body_span.first; a <= m.body_span.last; ++a) {
            for (int b = a; b <= m.body_span.last; ++b) {
                auto once = normalize(m, raw(a, b));
                if (!once.normalized_range) continue;
                auto twice = normalize(m, raw(once.normalized_range->first, once.normalized_range->last));
                EXPECT_EQ(twice.normalized_range, once.normalized_range) << m.name << " " << a << "-" << b;
                EXPECT_EQ(twice.fragment, once.fragment) << m.name << " " << a << "-" << b;
                EXPECT_TRUE(once.normalized_range->contains(LineRange{a, b})) << m.name << " " << a << "-" << b;
            }
        }
    }
}

TEST(Validate, AcceptsPlainRuns)
{
    auto m = fixture_method(kFixtures, "straightLine");
    auto r = run(m, raw(13, 15));
    EXPECT_EQ(r.filtered.state, SuggestionState::useful);
    EXPECT_FALSE(r.filtered.reason);

    EXPECT_EQ(run(fixture_method(kFixtures, "findFirst"), raw(37, 42)).filtered.state, SuggestionState::useful);
    EXPECT_EQ(run(fixture_method(kFixtures, "sumArray"), raw(22, 22)).filtered.state, SuggestionState::useful);
    EXPECT_EQ(run(fixture_method(kFixtures, "conditionalAssign"), raw(158, 162)).filtered.state,
              SuggestionState::useful);
    EXPECT_EQ(run(fixture_method(kFixtures, "maybeAssign"), raw(167, 170)).filtered.state, SuggestionState::useful);
    EXPECT_EQ(run(fixture_method(kFixtures, "tryFinallyReturn"), raw(228, 233)).filtered.state,
              SuggestionState::useful);
    EXPECT_EQ(run(fixture_method(kFixtures, "labeledLoops"), raw(107, 118)).filtered.state, SuggestionState::useful);
}

TEST(Validate, OutOfBoundsBeatsInverted)
{
    auto m = fixture_method(kFixtures, "sumArray");
    EXPECT_EQ(category_of(m, raw(1, 5)), RejectionCategory::out_of_bounds);
    EXPECT_EQ(category_of(m, raw(5, 1)), RejectionCategory::out_of_bounds);
    EXPECT_EQ(category_of(m, raw(24, 21)), RejectionCategory::inverted_range);
}

TEST(Validate, Unalignable)
{
    auto unit = parse_unit("class A {\n  void f() { a(); b(); }\n  void a() { }\n  void b() { }\n}\n", "A.java");
    auto m = locate_method(unit, MethodLocator{std::string("f")});
    EXPECT_EQ(category_of(m, raw(2, 2)), RejectionCategory::unalignable);
}

TEST(Validate, ConstructorCallIsUnalignable)
{
    auto unit = parse_unit("class A {\n  A(int x) {\n    this(x, 1);\n    go();\n  }\n  A(int x, int y) { }\n"
                           "  void go() { }\n}\n",
                           "A.java");
    auto m = locate_method(unit, MethodLocator{2});
    EXPECT_EQ(category_of(m, raw(3, 3)), RejectionCategory::unalignable);
    EXPECT_EQ(category_of(m, raw(4, 4)), std::nullopt);
}

TEST(Validate, NameInvalid)
{
    auto m = fixture_method(kFixtures, "straightLine");
    EXPECT_EQ(category_of(m, raw(13, 15, "class")), RejectionCategory::name_invalid);
    EXPECT_EQ(category_of(m, raw(13, 15, "2fast")), RejectionCategory::name_invalid);
    auto r = run(m, raw(13, 15, "sumArray")).validated;
    ASSERT_TRUE(r.reason);
    EXPECT_EQ(r.reason->category, RejectionCategory::name_invalid);
    EXPECT_NE(r.reason->detail.find("19"), std::string::npos);
}

TEST(Validate, NameCheckPrecedesFragmentChecks)
{
    auto m = fixture_method(kFixtures, "twoOutputs");
    EXPECT_EQ(category_of(m, raw(29, 30, "for")), RejectionCategory::name_invalid);
}

TEST(Validate, JumpCrossesBoundary)
{
    auto m = fixture_method(kFixtures, "findFirst");
    EXPECT_EQ(category_of(m, raw(39, 40)), RejectionCategory::jump_crosses_boundary);
    EXPECT_EQ(category_of(m, raw(38, 41)), RejectionCategory::jump_crosses_boundary);
    auto labeled = fixture_method(kFixtures, "labeledLoops");
    EXPECT_EQ(category_of(labeled, raw(109, 117)), RejectionCategory::jump_crosses_boundary);
    auto skip = fixture_method(kFixtures, "skipNegatives");
    EXPECT_EQ(category_of(skip, raw(49, 51)), RejectionCategory::jump_crosses_boundary);
    auto day = fixture_method(kFixtures, "dayName");
    EXPECT_EQ(category_of(day, raw(126, 127)), RejectionCategory::jump_crosses_boundary);
}

TEST(Validate, ConditionalReturn)
{
    EXPECT_EQ(category_of(fixture_method(kFixtures, "earlyExit"), raw(58, 60)), RejectionCategory::conditional_return);
    EXPECT_EQ(category_of(fixture_method(kFixtures, "tryReturn"), raw(176, 180)),
              RejectionCategory::conditional_return);
    EXPECT_EQ(category_of(fixture_method(kFixtures, "patternBinding"), raw(237, 239)),
              RejectionCategory::conditional_return);
}

TEST(Validate, MultipleOutputs)
{
    auto m = fixture_method(kFixtures, "twoOutputs");
    auto r = run(m, raw(29, 30)).validated;
    ASSERT_TRUE(r.reason);
    EXPECT_EQ(r.reason->category, RejectionCategory::multiple_outputs);
    EXPECT_NE(r.reason->detail.find("hi"), std::string::npos);
    EXPECT_NE(r.reason->detail.find("lo"), std::string::npos);
    EXPECT_EQ(category_of(fixture_method(kFixtures, "straightLine"), raw(12, 13)),
              RejectionCategory::multiple_outputs);
}

TEST(Validate, DeclaredOutputsMustBeAssignedOnEveryPath)
{
    auto unit = parse_unit("class A {\n  int f(boolean c) {\n    int v;\n    if (c) {\n      v = 1;\n    }\n"
                           "    v = 2;\n    return v;\n  }\n}\n",
                           "A.java");
    auto m = locate_method(unit, MethodLocator{std::string("f")});
    // the later `v = 2` still needs the declaration, and the fragment assigns v
    // only when c holds
    EXPECT_EQ(category_of(m, raw(3, 6)), RejectionCategory::multiple_outputs);
    EXPECT_EQ(category_of(m, raw(4, 6)), std::nullopt);

    auto unit2 = parse_unit("class A {\n  int f(boolean c) {\n    int v = 0;\n    int w;\n    if (c) {\n"
                            "      w = 1;\n    }\n    return v;\n  }\n}\n",
                            "A.java");
    auto m2 = locate_method(unit2, MethodLocator{std::string("f")});
    EXPECT_EQ(category_of(m2, raw(3, 7)), std::nullopt);
}

TEST(Filter, WholeBodyAndEmpty)
{
    auto classify = fixture_method(kFixtures, "classify");
    auto r = run(classify, raw(67, 73));
    EXPECT_EQ(r.validated.state, SuggestionState::valid);
    EXPECT_EQ(r.filtered.state, SuggestionState::filtered);
    EXPECT_EQ(r.filtered.reason->category, RejectionCategory::whole_body);

    auto unit = parse_unit("class A {\n  void f() {\n    a();\n\n    // c\n    b();\n  }\n"
                           "  void a() { }\n  void b() { }\n}\n",
                           "A.java");
    auto m = locate_method(unit, MethodLocator{std::string("f")});
    auto e = run(m, raw(4, 5));
    EXPECT_EQ(e.validated.state, SuggestionState::valid);
    EXPECT_EQ(e.filtered.reason->category, RejectionCategory::empty_fragment);
}

TEST(Filter, WholeBodyIgnoresBlankAndCommentLines)
{
    auto unit = parse_unit("class A {\n  void f() {\n    // lead\n    a();\n    b();\n\n  }\n"
                           "  void a() { }\n  void b() { }\n}\n",
                           "A.java");
    auto m = locate_method(unit, MethodLocator{std::string("f")});
    EXPECT_EQ(category_of(m, raw(4, 5)), RejectionCategory::whole_body);
}

TEST(Filter, NearWholeBodyThresholdIsOptIn)
{
    auto m = fixture_method(kFixtures, "sumArray");
    EXPECT_EQ(run(m, raw(20, 24)).filtered.state, SuggestionState::useful);
    auto r = run(m, raw(20, 24), FilterOptions{0.8});
    EXPECT_EQ(r.filtered.reason->category, RejectionCategory::whole_body);
}

// The validator's fragment checks agree with the reference definitions on
// every sibling run in the fixtures and in a generated long method.
TEST(Validate, AgreesWithOracleOnEverySiblingRun)
{
    auto unit = load_fixture(kFixtures);
    std::vector<MethodModel> methods;
    for (const auto& s : list_methods(unit)) methods.push_back(locate_method(unit, MethodLocator{s.lines.first}));
    int checked = 0;
    int accepted = 0;
    for (const auto& m : methods) {
        MethodAnalysis a(m);
        for (const auto& frag : testing::all_sibling_runs(m)) {
            auto why = check_fragment(m, a.cfg, a.live, frag);
            auto verdict = testing::oracle_check(m, a.cfg, frag);
            EXPECT_EQ(!why, verdict.accept) << m.name << " from stmt " << frag.front() << " len " << frag.size();
            if (why && verdict.category) {
                EXPECT_EQ(why->category, *verdict.category)
                    << m.name << " from stmt " << frag.front() << " len " << frag.size() << ": " << why->detail;
            }
            ++checked;
            accepted += !why;
        }
    }
    EXPECT_GT(checked, 100);
    EXPECT_GT(accepted, 20);
    EXPECT_LT(accepted, checked);
}

// Random raw ranges: lifecycle invariants hold for every outcome.
TEST(Lifecycle, InvariantsOnRandomRanges)
{
    auto unit = load_fixture(kFixtures);
    auto methods = list_methods(unit);
    std::mt19937 rng(11);
    std::uniform_int_distribution<int> line(1, unit.line_count());
    for (const auto& summary : methods) {
        auto m = locate_method(unit, MethodLocator{summary.lines.first});
        for (int i = 0; i < 60; ++i) {
            auto r = run(m, raw(line(rng), line(rng)));
            const auto& v = r.validated;
            EXPECT_TRUE(v.state == SuggestionState::valid || v.state == SuggestionState::invalid);
            EXPECT_EQ(v.reason.has_value(), v.state == SuggestionState::invalid);
            const auto& f = r.filtered;
            EXPECT_TRUE(f.terminal());
            EXPECT_EQ(f.reason.has_value(), f.state != SuggestionState::useful);
            if (f.state == SuggestionState::useful) {
                ASSERT_TRUE(f.normalized_range);
                EXPECT_TRUE(m.body_span.contains(*f.normalized_range));
                EXPECT_TRUE(is_aligned(m, *f.fragment));
                EXPECT_FALSE(f.fragment->empty());
            }
            if (f.state == SuggestionState::filtered) {
                auto c = f.reason->category;
                EXPECT_TRUE(c == RejectionCategory::whole_body || c == RejectionCategory::empty_fragment);
            }
        }
    }
}

}  // namespace
}  // namespace xtract
