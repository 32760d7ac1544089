#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "scratch.hpp"
#include "xtract/error.hpp"
#include "xtract/pipeline.hpp"

namespace xtract {
namespace {

using testing::demo_dir;
using testing::fixture;
using testing::ListProvider;
using testing::read_file;

std::vector<std::string> demo_completions(const std::string& method)
{
    std::ifstream in(demo_dir() / "completions" / (method + ".json"));
    return nlohmann::json::parse(in).get<std::vector<std::string>>();
}

std::string answer(std::initializer_list<std::tuple<const char*, int, int>> items)
{
    nlohmann::json j = nlohmann::json::array();
    for (const auto& [name, first, last] : items) {
        j.push_back({{"function_name", name}, {"line_start", first}, {"line_end", last}});
    }
    return j.dump();
}

struct Jvm {
    SourceUnit unit = load_unit(demo_dir() / "src/JvmClassWriter.java");
    MethodModel model = locate_method(unit, MethodLocator{std::string("writeJvmClass")});
};

SuggestResult run(const MethodModel& model, std::vector<std::string> texts, std::set<int> failing = {},
                  PipelineOptions options = {})
{
    ListProvider provider(std::move(texts), std::move(failing));
    return suggest(model, provider, ProviderConfig{}, default_prompt_template(), options);
}

TEST(Pipeline, WriteJvmClassTopThree)
{
    Jvm jvm;
    auto r = run(jvm.model, demo_completions("writeJvmClass"));
    ASSERT_EQ(r.ranked.size(), 3u);
    std::set<LineRange> ranges;
    std::set<std::string> names;
    for (const auto& p : r.ranked) {
        ranges.insert(p.group.canonical_range);
        names.insert(p.group.representative_name);
        EXPECT_FALSE(p.plan_error);
    }
    EXPECT_EQ(ranges, (std::set<LineRange>{{72, 76}, {78, 83}, {85, 90}}));
    EXPECT_EQ(names, (std::set<std::string>{"writeInterfaces", "writeFields", "writeMethods"}));
    EXPECT_EQ(r.method_lines, (LineRange{53, 94}));

    bool whole_body = false;
    for (const auto& s : r.suggestions) {
        if (s.reason && s.reason->category == RejectionCategory::whole_body) {
            whole_body = true;
            EXPECT_EQ(s.proposed_name, "writeClass");
        }
    }
    EXPECT_TRUE(whole_body);
    EXPECT_NE(to_text(r).find("whole_body: "), std::string::npos);
}

TEST(Pipeline, IdsAndProvenance)
{
    Jvm jvm;
    auto r = run(jvm.model, {answer({{"a", 85, 90}, {"b", 78, 83}}), answer({{"c", 72, 76}})});
    ASSERT_EQ(r.suggestions.size(), 8u);  // 5 iterations over 2 texts: 2+1+2+1+2
    for (std::size_t i = 0; i < r.suggestions.size(); ++i) EXPECT_EQ(r.suggestions[i].id, static_cast<int>(i));
    EXPECT_EQ(r.suggestions[2].provenance.iteration, 1);
    EXPECT_EQ(r.suggestions[2].provenance.provider, "list");
    ASSERT_EQ(r.ranked.size(), 3u);
    EXPECT_EQ(r.ranked[0].group.frequency, 3);
    EXPECT_EQ(r.ranked[1].group.frequency, 3);
    EXPECT_EQ(r.ranked[2].group.canonical_range, (LineRange{72, 76}));
    EXPECT_EQ(r.ranked[2].group.frequency, 2);
}

TEST(Pipeline, FailedIterationsAreCounted)
{
    Jvm jvm;
    auto r = run(jvm.model, {answer({{"writeMethods", 85, 90}})}, {1, 3});
    EXPECT_EQ(r.completions.size(), 5u);
    EXPECT_EQ(r.ranked[0].group.frequency, 3);
    EXPECT_NE(to_text(r).find("5 completions (2 failed), 3 suggestions\n"), std::string::npos) << to_text(r);
}

TEST(Pipeline, AllFailedIsProviderUnreachable)
{
    Jvm jvm;
    try {
        (void)run(jvm.model, {"x"}, {0, 1, 2, 3, 4});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::provider_unreachable);
    }
}

TEST(Pipeline, NoUsefulSuggestions)
{
    Jvm jvm;
    auto r = run(jvm.model, {"I cannot help with that.", answer({{"all", 54, 93}}), answer({{"far", 200, 210}})});
    EXPECT_TRUE(r.ranked.empty());
    auto text = to_text(r);
    EXPECT_NE(text.find("\nno suggestions\n"), std::string::npos) << text;
    EXPECT_NE(text.find("out_of_bounds"), std::string::npos) << text;
    EXPECT_NE(text.find("whole_body"), std::string::npos) << text;
    EXPECT_EQ(r.completions[0].diagnostics, (std::vector<std::string>{"no JSON array in completion"}));
}

TEST(Pipeline, PlanConflictIsAPreviewError)
{
    // `x` would become a parameter but its declared type is `var`.
    auto unit = parse_unit("class A {\n"
                           "  void f() {\n"
                           "    var x = 1;\n"
                           "    int y = x + 1;\n"
                           "    System.out.println(y);\n"
                           "  }\n"
                           "}\n",
                           "A.java");
    auto model = locate_method(unit, MethodLocator{std::string("f")});
    auto r = run(model, {answer({{"show", 4, 5}})});
    ASSERT_EQ(r.ranked.size(), 1u);
    ASSERT_TRUE(r.ranked[0].plan_error);
    EXPECT_TRUE(r.ranked[0].signature.empty());
    EXPECT_NE(to_text(r).find("cannot plan: "), std::string::npos);
    auto j = nlohmann::json::parse(to_json(r));
    EXPECT_TRUE(j["ranked"][0].contains("plan_error"));
}

TEST(Pipeline, ExistingMethodNameIsRejected)
{
    Jvm jvm;
    auto r = run(jvm.model, {answer({{"constant", 65, 68}})});
    EXPECT_TRUE(r.ranked.empty());
    ASSERT_TRUE(r.suggestions[0].reason);
    EXPECT_EQ(r.suggestions[0].reason->category, RejectionCategory::name_invalid);
}

TEST(Pipeline, TopNAndDeterminism)
{
    Jvm jvm;
    PipelineOptions options;
    options.top_n = 1;
    auto a = run(jvm.model, demo_completions("writeJvmClass"), {}, options);
    auto b = run(jvm.model, demo_completions("writeJvmClass"), {}, options);
    EXPECT_EQ(a.ranked.size(), 1u);
    EXPECT_EQ(to_json(a), to_json(b));
    EXPECT_EQ(to_text(a), to_text(b));
}

TEST(Pipeline, JsonShape)
{
    Jvm jvm;
    auto j = nlohmann::json::parse(to_json(run(jvm.model, demo_completions("writeJvmClass"))));
    EXPECT_EQ(j["method"], "writeJvmClass");
    EXPECT_EQ(j["method_range"], nlohmann::json({53, 94}));
    EXPECT_EQ(j["completions"].size(), 5u);
    EXPECT_EQ(j["ranked"].size(), 3u);
    EXPECT_EQ(j["ranked"][0]["frequency"], 3);
    EXPECT_EQ(j["unit_digest"].get<std::string>().size(), 64u);
    for (const auto& s : j["suggestions"]) EXPECT_TRUE(s.contains("state"));
}

TEST(ExtractRange, MatchesGolden)
{
    Jvm jvm;
    auto x = extract_range(jvm.unit, jvm.model, {85, 90}, "writeMethods");
    ASSERT_TRUE(x.result);
    EXPECT_EQ(x.result->new_text, read_file(fixture("golden/JvmClassWriter.writeMethods.golden.java")));
    EXPECT_EQ(x.plan->signature(), "private void writeMethods(DataOutputStream out) throws IOException");
}

TEST(ExtractRange, Rejections)
{
    auto unit = load_unit(fixture("java/Fixtures.java"));
    auto find_first = locate_method(unit, MethodLocator{std::string("findFirst")});
    auto x = extract_range(unit, find_first, {39, 40}, "markFound");
    EXPECT_FALSE(x.result);
    ASSERT_TRUE(x.suggestion.reason);
    EXPECT_EQ(x.suggestion.reason->category, RejectionCategory::jump_crosses_boundary);

    auto y = extract_range(unit, find_first, {36, 43}, "all");
    ASSERT_TRUE(y.suggestion.reason);
    EXPECT_EQ(y.suggestion.reason->category, RejectionCategory::whole_body);

    auto z = extract_range(unit, find_first, {36, 37}, "1bad");
    ASSERT_TRUE(z.suggestion.reason);
    EXPECT_EQ(z.suggestion.reason->category, RejectionCategory::name_invalid);
}

TEST(PipelineSource, DemoOracleWithReplay)
{
    auto loaded = load_oracle(demo_dir() / "oracle.jsonl");
    ReplayProvider replay(demo_dir() / "replay");
    PipelineSource source(replay, ProviderConfig{}, default_prompt_template());
    auto report = evaluate(loaded.entries, source, {5, 0.03});
    EXPECT_EQ(report.total, 10);
    EXPECT_EQ(report.matched, 8);
    for (const auto& v : report.verdicts) EXPECT_FALSE(v.error) << v.id << ": " << *v.error;
    EXPECT_EQ(report.verdicts[0].matched_rank, 2);
}

TEST(PipelineSource, ErrorsBecomeVerdictErrors)
{
    OracleEntry e;
    e.id = "x";
    e.file = "/nonexistent/A.java";
    e.method_lines = {1, 5};
    e.extracted = {2, 3};
    ListProvider provider({"[]"});
    PipelineSource source(provider, ProviderConfig{}, default_prompt_template());
    auto report = evaluate({e}, source);
    ASSERT_TRUE(report.verdicts[0].error);
    EXPECT_EQ(report.recall, 0);
}

}  // namespace
}  // namespace xtract
