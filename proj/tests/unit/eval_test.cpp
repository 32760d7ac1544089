#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "xtract/error.hpp"
#include "xtract/eval.hpp"

namespace xtract {
namespace {

using testing::fixture;

// Reference matcher: line sets as std::set, tolerance in per-mille so the
// allowance is exact integer arithmetic.
bool reference_match(const LineRange& a, const LineRange& b, int host_loc, int per_mille)
{
    std::set<int> sa, sb;
    for (int l = a.first; l <= a.last; ++l) sa.insert(l);
    for (int l = b.first; l <= b.last; ++l) sb.insert(l);
    int diff = 0;
    for (int l : sa) diff += sb.count(l) ? 0 : 1;
    for (int l : sb) diff += sa.count(l) ? 0 : 1;
    return diff <= per_mille * host_loc / 1000;
}

OracleEntry entry(std::string id, LineRange host, LineRange extracted)
{
    OracleEntry e;
    e.id = std::move(id);
    e.method_name = "m";
    e.method_lines = host;
    e.extracted = extracted;
    return e;
}

using Dump = std::map<std::string, std::vector<RankedRange>>;

std::vector<RankedRange> ranked(std::initializer_list<LineRange> ranges)
{
    std::vector<RankedRange> out;
    for (const auto& r : ranges) out.push_back({r, ""});
    return out;
}

double recall(const std::vector<OracleEntry>& entries, const Dump& dump, int k, double tolerance = 0.03)
{
    DumpSource source(dump);
    return evaluate(entries, source, {k, tolerance}).recall;
}

TEST(Matches, ToleranceExamples)
{
    EXPECT_TRUE(matches(LineRange{10, 20}, LineRange{10, 20}, 30, 0.0));
    EXPECT_TRUE(matches(LineRange{10, 20}, LineRange{10, 20}, 30, 0.03));
    // Allowance floor(0.9) = 0.
    EXPECT_FALSE(matches(LineRange{10, 20}, LineRange{10, 21}, 30, 0.03));
    // Allowance 6.
    EXPECT_TRUE(matches(LineRange{50, 80}, LineRange{50, 85}, 200, 0.03));
    EXPECT_TRUE(matches(LineRange{50, 80}, LineRange{44, 80}, 200, 0.03));
    EXPECT_FALSE(matches(LineRange{50, 80}, LineRange{43, 80}, 200, 0.03));
}

TEST(Matches, FloorAllowance)
{
    EXPECT_EQ(floor_allowance(30, 0.03), 0);
    EXPECT_EQ(floor_allowance(200, 0.03), 6);
    EXPECT_EQ(floor_allowance(100, 0.07), 7);
    EXPECT_EQ(floor_allowance(0, 0.5), 0);
    EXPECT_EQ(floor_allowance(42, 0.03), 1);
}

TEST(Matches, AgreesWithReference)
{
    std::mt19937 rng(11);
    std::uniform_int_distribution<int> line(1, 60), loc(1, 400), pm(0, 1000);
    for (int i = 0; i < 20000; ++i) {
        int a1 = line(rng), a2 = line(rng), b1 = line(rng), b2 = line(rng);
        LineRange a{std::min(a1, a2), std::max(a1, a2)};
        LineRange b{std::min(b1, b2), std::max(b1, b2)};
        int host = loc(rng), m = pm(rng);
        ASSERT_EQ(matches(a, b, host, m / 1000.0), reference_match(a, b, host, m))
            << to_string(a) << " " << to_string(b) << " loc " << host << " tol " << m;
    }
}

TEST(Matches, SymmetricAndMonotone)
{
    std::mt19937 rng(5);
    std::uniform_int_distribution<int> line(1, 40), loc(1, 300);
    std::uniform_real_distribution<double> tol(0, 1);
    for (int i = 0; i < 5000; ++i) {
        int a1 = line(rng), a2 = line(rng), b1 = line(rng), b2 = line(rng);
        LineRange a{std::min(a1, a2), std::max(a1, a2)};
        LineRange b{std::min(b1, b2), std::max(b1, b2)};
        int host = loc(rng);
        double t1 = tol(rng), t2 = tol(rng);
        if (t1 > t2) std::swap(t1, t2);
        ASSERT_EQ(matches(a, b, host, t1), matches(b, a, host, t1));
        if (matches(a, b, host, t1)) ASSERT_TRUE(matches(a, b, host, t2));
    }
}

TEST(Matches, CustomAllowance)
{
    Allowance generous = [](int, double) { return 3; };
    EXPECT_TRUE(matches(LineRange{1, 5}, LineRange{1, 8}, 10, 0.0, generous));
    EXPECT_FALSE(matches(LineRange{1, 5}, LineRange{1, 9}, 10, 0.0, generous));
}

TEST(Matches, StatementLinesOnly)
{
    // Line 12 is blank or a comment: not counted.
    std::vector<int> code{10, 11, 13, 14};
    EXPECT_TRUE(matches(std::vector<int>{10, 11, 13}, std::vector<int>{10, 11, 13}, 30, 0.03));
    OracleEntry e = entry("a", {1, 30}, {10, 13});
    e.code_lines = code;
    DumpSource source(Dump{{"a", ranked({{10, 12}, {10, 13}})}});
    auto report = evaluate({e}, source, {5, 0.03});
    EXPECT_EQ(report.verdicts[0].matched_rank, 2);
    e.extracted = {10, 11};
    DumpSource again(Dump{{"a", ranked({{10, 12}})}});
    EXPECT_EQ(evaluate({e}, again, {5, 0.03}).verdicts[0].matched_rank, 1);
}

TEST(Evaluate, CountsHits)
{
    std::vector<OracleEntry> entries{entry("a", {1, 30}, {5, 9}), entry("b", {1, 30}, {10, 14}),
                                     entry("c", {1, 30}, {2, 3}), entry("d", {1, 30}, {20, 25})};
    Dump dump{{"a", ranked({{1, 2}, {3, 4}, {5, 9}})},
              {"b", ranked({{10, 15}})},
              {"c", ranked({{1, 1}, {1, 2}, {3, 3}, {4, 4}, {5, 5}, {2, 3}})},
              {"d", ranked({{20, 25}})}};
    DumpSource source(dump);
    auto report = evaluate(entries, source);
    EXPECT_EQ(report.k, 5);
    EXPECT_DOUBLE_EQ(report.tolerance, 0.03);
    EXPECT_EQ(report.matched, 2);
    EXPECT_EQ(report.total, 4);
    EXPECT_DOUBLE_EQ(report.recall, 0.5);
    EXPECT_EQ(report.verdicts[0].matched_rank, 3);
    EXPECT_FALSE(report.verdicts[1].matched_rank);
    EXPECT_FALSE(report.verdicts[2].matched_rank);
    EXPECT_EQ(report.verdicts[3].matched_rank, 1);
    EXPECT_DOUBLE_EQ(recall(entries, dump, 6), 0.75);
}

TEST(Evaluate, MissingDumpEntryIsAMissWithTrail)
{
    DumpSource source(Dump{});
    auto report = evaluate({entry("a", {1, 10}, {2, 3})}, source);
    EXPECT_EQ(report.recall, 0);
    EXPECT_EQ(report.verdicts[0].trail, (std::vector<std::string>{"no suggestions in the dump"}));
    EXPECT_NE(report_table(report).find("no suggestions in the dump"), std::string::npos);
}

TEST(Evaluate, Errors)
{
    DumpSource source(Dump{});
    try {
        (void)evaluate({}, source);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::empty_oracle);
    }
    EXPECT_THROW((void)evaluate({entry("a", {1, 10}, {2, 3})}, source, {0, 0.03}), Error);
}

TEST(EvalProperties, PermutationInvariant)
{
    std::mt19937 rng(3);
    std::vector<OracleEntry> entries;
    Dump dump;
    for (int i = 0; i < 30; ++i) {
        int a = 1 + static_cast<int>(rng() % 20);
        entries.push_back(entry("e" + std::to_string(i), {1, 40}, {a, a + static_cast<int>(rng() % 10)}));
        std::vector<RankedRange> list;
        for (int j = 0; j < 6; ++j) {
            int s = 1 + static_cast<int>(rng() % 20);
            list.push_back({{s, s + static_cast<int>(rng() % 10)}, ""});
        }
        list.push_back({entries.back().extracted, ""});
        std::shuffle(list.begin(), list.end(), rng);
        dump["e" + std::to_string(i)] = list;
    }
    double base = recall(entries, dump, 5);
    for (int round = 0; round < 50; ++round) {
        std::shuffle(entries.begin(), entries.end(), rng);
        ASSERT_DOUBLE_EQ(recall(entries, dump, 5), base);
    }
}

TEST(EvalProperties, IdenticalDumpHasFullRecall)
{
    auto loaded = load_oracle(fixture("eval/oracle.jsonl"));
    Dump dump;
    for (const auto& e : loaded.entries) dump[e.id] = {{e.extracted, ""}};
    for (double tol : {0.0, 0.03, 0.1, 0.5, 1.0}) EXPECT_DOUBLE_EQ(recall(loaded.entries, dump, 1, tol), 1.0);
}

TEST(EvalProperties, RecallMonotoneInK)
{
    std::mt19937 rng(17);
    for (int round = 0; round < 1000; ++round) {
        std::vector<OracleEntry> entries;
        Dump dump;
        for (int i = 0; i < 8; ++i) {
            int a = 1 + static_cast<int>(rng() % 10);
            entries.push_back(entry(std::to_string(i), {1, 20}, {a, a + static_cast<int>(rng() % 4)}));
            std::vector<RankedRange> list;
            for (int j = static_cast<int>(rng() % 8); j > 0; --j) {
                int s = 1 + static_cast<int>(rng() % 10);
                list.push_back({{s, s + static_cast<int>(rng() % 4)}, ""});
            }
            dump[std::to_string(i)] = list;
        }
        double previous = 0;
        for (int k = 1; k <= 8; ++k) {
            double r = recall(entries, dump, k, 0.05);
            ASSERT_LE(previous, r);
            previous = r;
        }
    }
}

// Hand-checked verdicts for the 20-entry synthetic oracle and its dump.
// Hosts in Fixtures.java are at most 16 lines, so 3% tolerates nothing;
// the two JvmClassWriter entries (42 lines) tolerate one line.
TEST(SyntheticOracle, RecallIsHandComputed)
{
    auto loaded = load_oracle(fixture("eval/oracle.jsonl"));
    ASSERT_EQ(loaded.entries.size(), 20u);
    EXPECT_TRUE(loaded.diagnostics.empty());
    auto dump = DumpSource::load(fixture("eval/dump.jsonl"));

    auto report = evaluate(loaded.entries, dump, {5, 0.03});
    EXPECT_EQ(report.matched, 12);
    EXPECT_DOUBLE_EQ(report.recall, 0.6);
    std::map<std::string, int> expected_rank{{"e01", 1}, {"e02", 2}, {"e04", 3}, {"e07", 1},
                                             {"e09", 2}, {"e11", 1}, {"e13", 2}, {"e14", 1},
                                             {"e16", 1}, {"e17", 5}, {"e18", 2}, {"e19", 1}};
    for (const auto& v : report.verdicts) {
        auto it = expected_rank.find(v.id);
        if (it == expected_rank.end()) EXPECT_FALSE(v.matched_rank) << v.id;
        else EXPECT_EQ(v.matched_rank, it->second) << v.id;
    }
    EXPECT_EQ(report.verdicts[18].matched_range, (LineRange{84, 90}));
    EXPECT_EQ(report.verdicts[11].trail, (std::vector<std::string>{"no suggestions in the dump"}));

    EXPECT_DOUBLE_EQ(evaluate(loaded.entries, dump, {1, 0.03}).recall, 0.3);
    EXPECT_DOUBLE_EQ(evaluate(loaded.entries, dump, {6, 0.03}).recall, 0.65);
}

TEST(LoadOracle, SummaryAndResolution)
{
    auto loaded = load_oracle(fixture("eval/oracle.jsonl"));
    EXPECT_EQ(loaded.host_loc.count, 20);
    EXPECT_EQ(loaded.host_loc.min, 5);
    EXPECT_EQ(loaded.host_loc.max, 42);
    EXPECT_NEAR(loaded.host_loc.mean, 13.15, 1e-12);
    EXPECT_DOUBLE_EQ(loaded.host_loc.median, 9.5);
    const auto& e = loaded.entries[0];
    EXPECT_EQ(e.host_loc(), 7);
    EXPECT_TRUE(std::filesystem::exists(e.file));
    // Body 12-16, all code.
    EXPECT_EQ(e.code_lines, (std::vector<int>{12, 13, 14, 15, 16}));
}

TEST(LoadOracle, SkipsUnresolvable)
{
    auto dir = std::filesystem::temp_directory_path() / "xtract_eval_test";
    std::filesystem::create_directories(dir);
    auto java = fixture("java/Fixtures.java").string();
    auto path = dir / "oracle.jsonl";
    {
        std::ofstream out(path);
        out << R"({"id": "ok", "file": ")" << java
            << R"(", "method_name": "sumArray", "method_start": 19, "method_end": 26, "extracted_start": 21, "extracted_end": 23})"
            << "\n\n"
            << R"({"id": "gone", "file": "missing/Nope.java", "method_name": "f", "method_start": 1, "method_end": 5, "extracted_start": 2, "extracted_end": 3})"
            << "\n"
            << "not json\n"
            << R"({"id": "wrong", "file": ")" << java
            << R"(", "method_name": "straightLine", "method_start": 19, "method_end": 26, "extracted_start": 21, "extracted_end": 23})"
            << "\n"
            << R"({"id": "outside", "file": ")" << java
            << R"(", "method_name": "sumArray", "method_start": 19, "method_end": 26, "extracted_start": 12, "extracted_end": 23})"
            << "\n"
            << R"({"id": 7, "file": ")" << java
            << R"(", "method_name": "sumArray", "method_start": 19, "method_end": 26, "extracted_start": 20, "extracted_end": 20, "extracted_name": "init"})"
            << "\n";
    }
    auto loaded = load_oracle(path);
    ASSERT_EQ(loaded.entries.size(), 2u);
    EXPECT_EQ(loaded.entries[1].id, "7");
    EXPECT_EQ(loaded.entries[1].extracted_name, "init");
    ASSERT_EQ(loaded.diagnostics.size(), 4u);
    EXPECT_EQ(loaded.diagnostics[0].rfind("oracle.jsonl:3: gone", 0), 0u) << loaded.diagnostics[0];
    EXPECT_EQ(loaded.diagnostics[1].rfind("oracle.jsonl:4: malformed", 0), 0u) << loaded.diagnostics[1];
    EXPECT_NE(loaded.diagnostics[2].find("not straightLine"), std::string::npos) << loaded.diagnostics[2];
    EXPECT_NE(loaded.diagnostics[3].find("not inside the host"), std::string::npos) << loaded.diagnostics[3];

    {
        std::ofstream out(path);
        out << R"({"id": "gone", "file": "missing/Nope.java", "method_name": "f", "method_start": 1, "method_end": 5, "extracted_start": 2, "extracted_end": 3})"
            << "\n";
    }
    try {
        (void)load_oracle(path);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::empty_oracle);
    }
    try {
        (void)load_oracle(dir / "absent.jsonl");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::io_error);
    }
    std::filesystem::remove_all(dir);
}

TEST(DumpSource, MalformedLineIsInvalidConfig)
{
    auto path = std::filesystem::temp_directory_path() / "xtract_bad_dump.jsonl";
    {
        std::ofstream out(path);
        out << R"({"id": "a", "suggestions": [{"start": 1}]})" << "\n";
    }
    try {
        (void)DumpSource::load(path);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::invalid_config);
    }
    std::filesystem::remove(path);
}

TEST(RepeatedStats, TextbookSample)
{
    // scipy.stats.ttest_1samp([0.52, 0.55, 0.49, 0.58, 0.51], 0.5)
    auto s = repeated_stats({0.52, 0.55, 0.49, 0.58, 0.51}, 0.5);
    EXPECT_EQ(s.n, 5);
    EXPECT_NEAR(s.mean, 0.53, 1e-12);
    EXPECT_NEAR(s.sd, 0.03535533905932737, 1e-12);
    EXPECT_NEAR(s.t, 1.8973665961010298, 1e-9);
    EXPECT_NEAR(s.p, 0.13063511375366027, 1e-9);
    EXPECT_FALSE(s.degenerate);

    // scipy.stats.ttest_1samp([5.1, 4.9, 5.6, 5.8, 6.0], 5.0)
    auto u = repeated_stats({5.1, 4.9, 5.6, 5.8, 6.0}, 5.0);
    EXPECT_NEAR(u.t, 2.304073731539131, 1e-9);
    EXPECT_NEAR(u.p, 0.08256829674577393, 1e-9);
}

TEST(RepeatedStats, IndependentTStatistic)
{
    std::mt19937 rng(23);
    std::normal_distribution<double> noise(0.5, 0.05);
    for (int round = 0; round < 200; ++round) {
        std::vector<double> xs(2 + round % 20);
        for (double& x : xs) x = noise(rng);
        double mean = 0;
        for (double x : xs) mean += x;
        mean /= static_cast<double>(xs.size());
        double ss = 0;
        for (double x : xs) ss += (x - mean) * (x - mean);
        double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
        double t = (mean - 0.48) * std::sqrt(static_cast<double>(xs.size())) / sd;
        auto s = repeated_stats(xs, 0.48);
        ASSERT_NEAR(s.t, t, 1e-9 * std::max(1.0, std::fabs(t)));
        ASSERT_GE(s.p, 0);
        ASSERT_LE(s.p, 1);
    }
}

TEST(RepeatedStats, Degenerate)
{
    auto same = repeated_stats({0.5, 0.5, 0.5}, 0.5);
    EXPECT_TRUE(same.degenerate);
    EXPECT_EQ(same.t, 0);
    EXPECT_EQ(same.p, 1);

    auto above = repeated_stats({0.6, 0.6, 0.6, 0.6}, 0.5);
    EXPECT_TRUE(above.degenerate);
    EXPECT_TRUE(std::isinf(above.t));
    EXPECT_GT(above.t, 0);
    EXPECT_EQ(above.p, 0);
    EXPECT_EQ(above.sd, 0);

    // 0.8 * 3 / 3 is not exactly 0.8 in binary.
    auto repeated = repeated_stats({0.8, 0.8, 0.8}, 0.5);
    EXPECT_TRUE(repeated.degenerate);
    EXPECT_EQ(repeated.mean, 0.8);
    EXPECT_TRUE(std::isinf(repeated.t));

    auto below = repeated_stats({0.4, 0.4}, 0.5);
    EXPECT_LT(below.t, 0);
    EXPECT_TRUE(std::isinf(below.t));
}

TEST(RepeatedStats, InsufficientSamples)
{
    for (auto xs : {std::vector<double>{}, std::vector<double>{0.5}}) {
        try {
            (void)repeated_stats(xs, 0.5);
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::insufficient_samples);
        }
    }
}

// 50 synthetic runs around 0.534 against a clearly lower fixed baseline.
TEST(RepeatedStats, FiftyRunsSignificance)
{
    std::mt19937 rng(50);
    std::normal_distribution<double> run(0.534, 0.01);
    std::vector<double> xs(50);
    for (double& x : xs) x = run(rng);
    auto s = repeated_stats(xs, 0.45);
    EXPECT_NEAR(s.mean, 0.534, 0.005);
    EXPECT_LT(s.p, 1e-5);
    EXPECT_GT(s.t, 0);
}

TEST(Report, JsonAndTable)
{
    DumpSource source(Dump{{"a", ranked({{2, 3}})}});
    auto report = evaluate({entry("a", {1, 10}, {2, 3}), entry("b", {1, 10}, {4, 5})}, source);
    report.stats = repeated_stats({0.6, 0.6}, 0.5);
    auto j = nlohmann::json::parse(report_json(report));
    EXPECT_EQ(j["k"], 5);
    EXPECT_EQ(j["matched"], 1);
    EXPECT_EQ(j["total"], 2);
    EXPECT_DOUBLE_EQ(j["recall"].get<double>(), 0.5);
    EXPECT_EQ(j["verdicts"][0]["matched_rank"], 1);
    EXPECT_EQ(j["verdicts"][0]["matched_range"], "2-3");
    EXPECT_TRUE(j["verdicts"][1]["matched_rank"].is_null());
    EXPECT_EQ(j["stats"]["t"], "inf");
    EXPECT_EQ(j["stats"]["degenerate"], true);

    auto table = report_table(report);
    EXPECT_NE(table.find("a   1     2-3\n"), std::string::npos) << table;
    EXPECT_NE(table.find("b   -     miss\n"), std::string::npos) << table;
    EXPECT_NE(table.find("Recall@5 at tolerance 0.0300: 0.5000 (1/2)\n"), std::string::npos) << table;
    EXPECT_NE(table.find("degenerate"), std::string::npos) << table;
}

}  // namespace
}  // namespace xtract
