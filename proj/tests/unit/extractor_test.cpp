#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "extraction_check.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "xtract/candidates.hpp"
#include "xtract/error.hpp"
#include "xtract/extractor.hpp"

namespace xtract {
namespace {

using testing::all_sibling_runs;
using testing::fixture_method;

constexpr const char* kFixtures = "java/Fixtures.java";

struct Planned {
    MethodModel model;
    MethodAnalysis analysis;
    ExtractPlan plan;
};

std::vector<StmtId> aligned(const MethodModel& m, LineRange lines)
{
    auto sel = statements_in_range(m, lines);
    auto* run = std::get_if<AlignedRun>(&sel);
    if (!run || run->lines != lines) throw std::runtime_error("test range is not aligned: " + to_string(lines));
    return run->statements;
}

ExtractPlan plan_lines(const MethodModel& m, LineRange lines, const std::string& name = "extracted")
{
    MethodAnalysis a(m);
    return plan(m, a.cfg, a.live, aligned(m, lines), lines, name);
}

ExtractPlan plan_fixture(const char* method, LineRange lines, const std::string& name = "extracted")
{
    return plan_lines(fixture_method(kFixtures, method), lines, name);
}

std::vector<std::string> names(const std::vector<TypedName>& v)
{
    std::vector<std::string> out;
    for (const auto& t : v) out.push_back(t.name);
    return out;
}

std::string squeeze(std::string_view s)
{
    std::string out;
    for (char c : s) {
        if (!std::isspace(static_cast<unsigned char>(c))) out += c;
    }
    return out;
}

TEST(Plan, VoidWithInputsInFirstUseOrder)
{
    auto p = plan_fixture("straightLine", {14, 15});
    EXPECT_EQ(p.signature(), "private void extracted(int s, int d)");
    EXPECT_EQ(p.call_text(), "extracted(s, d);");
    EXPECT_FALSE(p.return_variable);
    EXPECT_TRUE(p.locals_to_declare.empty());
}

TEST(Plan, OutputDeclaredInside)
{
    auto p = plan_fixture("sumArray", {20, 23});
    EXPECT_EQ(p.signature(), "private int extracted(int[] xs)");
    EXPECT_EQ(p.call_text(), "int s = extracted(xs);");
    EXPECT_TRUE(p.return_declared_inside);
}

TEST(Plan, ReadModifyWriteVariableIsPassedAndReturned)
{
    auto p = plan_fixture("sumArray", {21, 23});
    EXPECT_EQ(p.signature(), "private int extracted(int[] xs, int s)");
    EXPECT_EQ(p.call_text(), "s = extracted(xs, s);");
    EXPECT_FALSE(p.return_declared_inside);
}

TEST(Plan, DefinitelyAssignedOutputIsNotPassed)
{
    auto p = plan_fixture("conditionalAssign", {158, 162});
    EXPECT_EQ(p.signature(), "private int extracted(boolean flag)");
    EXPECT_EQ(p.call_text(), "v = extracted(flag);");
}

TEST(Plan, AllPathsReturn)
{
    auto p = plan_fixture("classify", {67, 73});
    EXPECT_TRUE(p.all_paths_return);
    EXPECT_EQ(p.signature(), "private String extracted(int n)");
    EXPECT_EQ(p.call_text(), "return extracted(n);");
}

TEST(Plan, ModifiersAndThrowsComeFromTheHost)
{
    EXPECT_EQ(plan_fixture("staticHelper", {191, 192}).signature(), "private static int extracted(int a)");
    auto p = plan_fixture("readAll", {77, 87});
    EXPECT_EQ(p.signature(), "private int extracted(java.io.Reader in) throws IOException");
    EXPECT_EQ(p.call_text(), "int n = extracted(in);");
}

TEST(Plan, ZeroParameters)
{
    auto unit = parse_unit("class A {\n    void f() {\n        System.out.println(1);\n        System.out.println(2);\n    }\n}\n",
                           "A.java");
    auto p = plan_lines(locate_method(unit, MethodLocator{std::string("f")}), {3, 4}, "g");
    EXPECT_EQ(p.signature(), "private void g()");
    EXPECT_EQ(p.call_text(), "g();");
}

TEST(Plan, VoidHostWithReturningFragment)
{
    auto unit = parse_unit("class A {\n"
                           "    void f(int a) {\n"
                           "        if (a > 0) {\n"
                           "            if (a > 1) {\n"
                           "                return;\n"
                           "            } else {\n"
                           "                throw new RuntimeException();\n"
                           "            }\n"
                           "        }\n"
                           "        System.out.println(a);\n"
                           "    }\n"
                           "}\n",
                           "A.java");
    auto m = locate_method(unit, MethodLocator{std::string("f")});
    auto p = plan_lines(m, {4, 8}, "g");
    EXPECT_TRUE(p.all_paths_return);
    EXPECT_EQ(p.call_text(), "g(a); return;");
    EXPECT_EQ(p.return_type, "void");
    // at the end of the body the method returns anyway
    EXPECT_EQ(plan_lines(m, {3, 10}, "g").call_text(), "g(a);");
}

TEST(Plan, WrittenButDeadLocalIsRedeclared)
{
    auto unit = parse_unit("class A {\n    void f(int a) {\n        int t;\n        t = a;\n        System.out.println(t);\n"
                           "    }\n}\n",
                           "A.java");
    auto p = plan_lines(locate_method(unit, MethodLocator{std::string("f")}), {4, 5}, "g");
    EXPECT_EQ(names(p.parameters), (std::vector<std::string>{"a"}));
    ASSERT_EQ(p.locals_to_declare.size(), 1u);
    EXPECT_EQ(p.locals_to_declare[0], (TypedName{"t", "int"}));
}

TEST(Plan, PlanConflicts)
{
    try {
        (void)plan_fixture("straightLine", {14, 15}, "straightLine");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::plan_conflict);
        EXPECT_NE(std::string(e.what()).find("line 11"), std::string::npos);
    }
    // a different arity is an overload, not a conflict
    EXPECT_NO_THROW((void)plan_fixture("straightLine", {14, 15}, "sumArray"));
    EXPECT_THROW((void)plan_fixture("twoOutputs", {29, 30}), Error);

    auto unit = parse_unit("class A {\n    void f() {\n        var x = 1;\n        System.out.println(x);\n    }\n}\n", "A.java");
    EXPECT_THROW((void)plan_lines(locate_method(unit, MethodLocator{std::string("f")}), {4, 4}), Error);
}

TEST(Apply, ExactOutput)
{
    const std::string before = "class A {\n"
                               "    int f(int a) {\n"
                               "        int s = a + 1;\n"
                               "        s = s * 2;\n"
                               "        return s;\n"
                               "    }\n"
                               "}\n";
    const std::string after = "class A {\n"
                              "    int f(int a) {\n"
                              "        int s = g(a);\n"
                              "        return s;\n"
                              "    }\n"
                              "\n"
                              "    private int g(int a) {\n"
                              "        int s = a + 1;\n"
                              "        s = s * 2;\n"
                              "        return s;\n"
                              "    }\n"
                              "}\n";
    auto unit = parse_unit(before, "A.java");
    auto m = locate_method(unit, MethodLocator{std::string("f")});
    auto r = apply(unit, m, plan_lines(m, {3, 4}, "g"));
    EXPECT_EQ(r.new_text, after);
    EXPECT_EQ(r.call_line, (LineRange{3, 3}));
    EXPECT_EQ(r.new_method_lines, (LineRange{7, 11}));
    EXPECT_EQ(r.script.diff, "--- a/A.java\n+++ b/A.java\n"
                             "@@ -1,7 +1,12 @@\n"
                             " class A {\n"
                             "     int f(int a) {\n"
                             "-        int s = a + 1;\n"
                             "-        s = s * 2;\n"
                             "+        int s = g(a);\n"
                             "         return s;\n"
                             "     }\n"
                             "+\n"
                             "+    private int g(int a) {\n"
                             "+        int s = a + 1;\n"
                             "+        s = s * 2;\n"
                             "+        return s;\n"
                             "+    }\n"
                             " }\n");
}

TEST(Apply, ClosingBraceSharedWithOtherCode)
{
    auto unit = parse_unit("class A { void f() {\n  System.out.println(1);\n  System.out.println(2); } }", "A.java");
    auto m = locate_method(unit, MethodLocator{std::string("f")});
    auto r = apply(unit, m, plan_lines(m, {2, 2}, "g"));
    auto again = parse_unit(r.new_text, "A.java");
    EXPECT_NO_THROW((void)locate_method(again, MethodLocator{std::string("g")}));
    EXPECT_NE(r.new_text.find("  g();\n"), std::string::npos);
}

TEST(Apply, StaleUnit)
{
    auto unit = testing::load_fixture(kFixtures);
    auto m = locate_method(unit, MethodLocator{std::string("straightLine")});
    auto p = plan_lines(m, {14, 15});
    auto edited = parse_unit(std::string(unit.text()) + "\n// touched\n", unit.path());
    try {
        (void)apply(edited, m, p);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::stale_unit);
    }
}

TEST(ApplyEdits, NoNewlineAtEnd)
{
    std::string text = "a\nb\nc";
    std::vector<TextEdit> edits{{2, 4, "B\n"}, {5, 5, "\nd"}};
    EXPECT_EQ(apply_edits(text, edits), "a\nB\nc\nd");
    EXPECT_EQ(unified_diff(text, edits, "x"), "--- a/x\n+++ b/x\n@@ -1,3 +1,4 @@\n a\n-b\n+B\n-c\n"
                                              "\\ No newline at end of file\n+c\n+d\n"
                                              "\\ No newline at end of file\n");
}

bool have_patch() { return std::system("patch --version > /dev/null 2>&1") == 0; }

struct TempDir {
    std::filesystem::path path;
    TempDir()
    {
        path = std::filesystem::temp_directory_path() / ("xtract-extract-" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path / "a");
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
};

std::string read_file(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// GNU patch, applied to the original file, must reproduce new_text.
void expect_patch_reproduces(const std::string& original, const std::string& diff, const std::string& expected)
{
    TempDir dir;
    std::ofstream(dir.path / "a" / "F.java", std::ios::binary) << original;
    std::ofstream(dir.path / "f.diff", std::ios::binary) << diff;
    std::string cmd = "cd '" + dir.path.string() + "/a' && patch -s -p1 < ../f.diff 2>&1";
    ASSERT_EQ(std::system(cmd.c_str()), 0) << diff;
    EXPECT_EQ(read_file(dir.path / "a" / "F.java"), expected);
}

TEST(UnifiedDiff, AppliesWithPatch)
{
    if (!have_patch()) GTEST_SKIP() << "patch not installed";
    auto unit = parse_unit(std::string(testing::load_fixture(kFixtures).text()), "F.java");
    for (auto [method, lines] : {std::pair{"straightLine", LineRange{14, 15}}, {"sumArray", {21, 23}},
                                 {"readAll", {78, 87}}, {"anonymousShadow", {247, 254}}}) {
        auto m = locate_method(unit, MethodLocator{std::string(method)});
        auto r = apply(unit, m, plan_lines(m, lines));
        expect_patch_reproduces(std::string(unit.text()), r.script.diff, r.new_text);
    }
    std::mt19937 rng(11);
    for (int trial = 0; trial < 40; ++trial) {
        std::string text;
        int n = 1 + static_cast<int>(rng() % 30);
        for (int i = 0; i < n; ++i) text += "line" + std::to_string(i) + "\n";
        if (rng() % 3 == 0) text.pop_back();
        std::vector<TextEdit> edits;
        std::size_t at = 0;
        while (at < text.size()) {
            std::size_t b = at + rng() % 20;
            if (b > text.size()) break;
            std::size_t e = std::min(text.size(), b + rng() % 12);
            std::string rep = rng() % 2 ? "new" + std::to_string(trial) + "\n" : "";
            edits.push_back({b, e, rep});
            at = e + 1 + rng() % 25;
        }
        // keep the widened line ranges disjoint
        std::vector<TextEdit> kept;
        int last_line = -1;
        for (const auto& e : edits) {
            int first = static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(e.begin), '\n'));
            int last = static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(e.end), '\n'));
            if (first > last_line + 1) {
                kept.push_back(e);
                last_line = last;
            }
        }
        auto expected = apply_edits(text, kept);
        if (expected == text) continue;
        expect_patch_reproduces(text, unified_diff(text, kept, "F.java"), expected);
    }
}

// Every valid sibling run of every fixture method: the result parses, the
// fragment text moves unchanged into the new method, the rest of the host is
// untouched, and the new signature covers the fragment's inputs and outputs.
TEST(ExtractionProperties, EveryValidFragment)
{
    auto unit = testing::load_fixture(kFixtures);
    int checked = 0;
    for (const auto& summary : list_methods(unit)) {
        auto m = locate_method(unit, MethodLocator{summary.lines.first});
        MethodAnalysis a(m);
        for (const auto& run : all_sibling_runs(m)) {
            if (!is_aligned(m, run) || check_fragment(m, a.cfg, a.live, run)) continue;
            ++checked;
            for (const auto& v : testing::extraction_violations(unit, m, a, run, "extractedPart")) {
                ADD_FAILURE() << m.name << " " << to_string(run_lines(m, run)) << ": " << v;
            }
        }
    }
    EXPECT_GE(checked, 60);
}

TEST(ExtractionProperties, GeneratedLongMethod)
{
    auto unit = parse_unit(testing::generate_long_method(300, 3), "Long.java");
    auto m = locate_method(unit, MethodLocator{std::string("longMethod")});
    MethodAnalysis a(m);
    std::mt19937 rng(17);
    auto runs = all_sibling_runs(m);
    std::shuffle(runs.begin(), runs.end(), rng);
    int checked = 0;
    for (const auto& run : runs) {
        if (checked == 40) break;
        if (!is_aligned(m, run) || check_fragment(m, a.cfg, a.live, run)) continue;
        auto p = plan(m, a.cfg, a.live, run, run_lines(m, run), "part");
        auto r = apply(unit, m, p);
        EXPECT_NO_THROW((void)locate_method(parse_unit(r.new_text, "Long.java"), MethodLocator{r.new_method_lines.first}));
        ++checked;
    }
    EXPECT_GT(checked, 10);
}

}  // namespace
}  // namespace xtract
