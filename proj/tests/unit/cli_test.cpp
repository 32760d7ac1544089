#include <gtest/gtest.h>

#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "scratch.hpp"

namespace xtract {
namespace {

using testing::demo_dir;
using testing::fixture;
using testing::read_file;
using testing::TempDir;

struct Run {
    int status = -1;
    std::string out;
    std::string err;
};

std::string quote(const std::string& s)
{
    std::string q = "'";
    for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return q + "'";
}

Run xtract(const std::vector<std::string>& args, const std::string& env = "")
{
    TempDir tmp;
    std::string cmd = env + " " + quote(XTRACT_BIN);
    for (const auto& a : args) cmd += " " + quote(a);
    cmd += " >" + quote((tmp.path / "out").string()) + " 2>" + quote((tmp.path / "err").string());
    int raw = std::system(cmd.c_str());
    Run r;
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = read_file(tmp.path / "out");
    r.err = read_file(tmp.path / "err");
    return r;
}

std::vector<std::string> replay_args()
{
    return {"--provider", "replay", "--fixtures", (demo_dir() / "replay").string()};
}

Run suggest(const std::string& file, const std::string& method, std::vector<std::string> extra = {})
{
    std::vector<std::string> args{"suggest", (demo_dir() / "src" / file).string(), method};
    auto r = replay_args();
    args.insert(args.end(), r.begin(), r.end());
    args.insert(args.end(), extra.begin(), extra.end());
    return xtract(args);
}

TEST(Cli, SuggestWriteJvmClass)
{
    auto r = suggest("JvmClassWriter.java", "writeJvmClass");
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_NE(r.out.find("writeMethods  lines 85-90"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("writeFields  lines 78-83"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("writeInterfaces  lines 72-76"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("whole_body: "), std::string::npos) << r.out;
}

TEST(Cli, SuggestIsByteIdenticalAcrossRuns)
{
    for (const auto& [file, method] : std::vector<std::pair<std::string, std::string>>{
             {"JvmClassWriter.java", "writeJvmClass"}, {"Scheduler.java", "retryAll"}}) {
        auto first = suggest(file, method, {"--json"});
        ASSERT_EQ(first.status, 0) << first.err;
        for (int i = 0; i < 2; ++i) EXPECT_EQ(suggest(file, method, {"--json"}).out, first.out);
    }
}

TEST(Cli, NoSuggestionsIsSuccess)
{
    TempDir dir;
    auto completions = dir.write("c.json", R"(["[{\"function_name\": \"all\", \"line_start\": 54, \"line_end\": 93}]"])");
    auto fixtures = dir.path / "fixtures";
    auto rec = xtract({"fixture", (demo_dir() / "src/JvmClassWriter.java").string(), "writeJvmClass",
                       completions.string(), fixtures.string()});
    ASSERT_EQ(rec.status, 0) << rec.err;
    auto r = xtract({"suggest", (demo_dir() / "src/JvmClassWriter.java").string(), "writeJvmClass", "--provider",
                     "replay", "--fixtures", fixtures.string(), "--iterations", "1"});
    EXPECT_EQ(r.status, 0) << r.err;
    EXPECT_NE(r.out.find("\nno suggestions\n"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("whole_body"), std::string::npos) << r.out;
}

TEST(Cli, ErrorExitCodes)
{
    EXPECT_EQ(suggest("Missing.java", "f").status, 3);
    EXPECT_EQ(suggest("JvmClassWriter.java", "nope").status, 5);
    EXPECT_EQ(suggest("JvmClassWriter.java", "writeJvmClass", {"--top-n", "0"}).status, 15);
    EXPECT_EQ(xtract({"suggest"}).status, 2);
    EXPECT_EQ(xtract({"frobnicate"}).status, 2);

    TempDir dir;
    auto broken = dir.write("Broken.java", "class Broken {\n");
    EXPECT_EQ(xtract({"apply", broken.string(), "1-1", "g"}).status, 4);
    auto overloads = dir.write("O.java", "class O {\n  void f(int a) {}\n  void f(String s) {}\n}\n");
    auto amb = xtract(std::vector<std::string>{"suggest", overloads.string(), "f"});
    EXPECT_EQ(amb.status, 6) << amb.err;

    // No fixture for this prompt: every iteration fails.
    auto unreachable = xtract({"suggest", (demo_dir() / "src/JvmClassWriter.java").string(), "writeJvmClass",
                               "--provider", "replay", "--fixtures", dir.path.string()});
    EXPECT_EQ(unreachable.status, 9) << unreachable.err;

    auto empty = dir.write("empty.jsonl", "\n");
    EXPECT_EQ(xtract({"eval", empty.string(), "--dump", empty.string()}).status, 14);
    EXPECT_EQ(xtract({"eval", (demo_dir() / "oracle.jsonl").string(), "--dump", (demo_dir() / "dump.jsonl").string(),
                      "--runs", "3"})
                  .status,
              15);
}

TEST(Cli, ApiKeyFlagDoesNotExist)
{
    auto r = xtract({"suggest", "--api-key", "sk-123", "A.java", "f"});
    EXPECT_EQ(r.status, 2);
    EXPECT_EQ(r.out.find("sk-123"), std::string::npos);
}

TEST(Cli, ApplyDiffLeavesFileUntouched)
{
    TempDir dir;
    auto file = dir.write("JvmClassWriter.java", read_file(demo_dir() / "src/JvmClassWriter.java"));
    const auto before = read_file(file);
    auto r = xtract({"apply", file.string(), "85-90", "writeMethods", "--diff"});
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_EQ(r.out.rfind("--- a/", 0), 0u) << r.out;
    EXPECT_NE(r.out.find("+        writeMethods(out);\n"), std::string::npos);
    EXPECT_EQ(read_file(file), before);
}

TEST(Cli, ApplyInPlaceMatchesGolden)
{
    TempDir dir;
    auto file = dir.write("JvmClassWriter.java", read_file(demo_dir() / "src/JvmClassWriter.java"));
    auto r = xtract({"apply", file.string(), "85-90", "writeMethods", "--in-place"});
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_TRUE(r.out.empty());
    EXPECT_EQ(read_file(file), read_file(fixture("golden/JvmClassWriter.writeMethods.golden.java")));
}

TEST(Cli, ApplyRejectionIsPrintedVerbatim)
{
    TempDir dir;
    auto file = dir.write("Fixtures.java", read_file(fixture("java/Fixtures.java")));
    const auto before = read_file(file);
    auto r = xtract({"apply", file.string(), "39-40", "markFound", "--in-place"});
    EXPECT_EQ(r.status, 7);
    EXPECT_NE(r.err.find("jump_crosses_boundary"), std::string::npos) << r.err;
    EXPECT_EQ(read_file(file), before);

    EXPECT_EQ(xtract({"apply", file.string(), "forty", "g"}).status, 2);
}

TEST(Cli, EvalDumpOnDemoCorpus)
{
    auto r = xtract({"eval", (demo_dir() / "oracle.jsonl").string(), "--dump", (demo_dir() / "dump.jsonl").string()});
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_NE(r.out.find("jvm-write-methods  2     84-90\n"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("retry-jobs         -     miss\n"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("Recall@5 at tolerance 0.0300: 0.6000 (6/10)\n"), std::string::npos) << r.out;
    EXPECT_NE(r.err.find("10 oracle entries"), std::string::npos) << r.err;

    auto k1 = xtract({"eval", (demo_dir() / "oracle.jsonl").string(), "--dump", (demo_dir() / "dump.jsonl").string(),
                      "--k", "1", "--json"});
    ASSERT_EQ(k1.status, 0) << k1.err;
    auto j = nlohmann::json::parse(k1.out);
    EXPECT_LE(j["recall"].get<double>(), 0.6);
    EXPECT_DOUBLE_EQ(j["recall"].get<double>(), 0.3);
}

TEST(Cli, EvalLiveReplayWithStats)
{
    TempDir dir;
    auto report = dir.path / "report.json";
    std::vector<std::string> args{"eval", (demo_dir() / "oracle.jsonl").string(), "--runs", "3",
                                  "--baseline", "0.5", "--report", report.string()};
    auto r = replay_args();
    args.insert(args.end(), r.begin(), r.end());
    auto run = xtract(args);
    ASSERT_EQ(run.status, 0) << run.err;
    EXPECT_NE(run.out.find("Recall@5 at tolerance 0.0300: 0.8000 (8/10)\n"), std::string::npos) << run.out;
    EXPECT_NE(run.out.find("degenerate"), std::string::npos) << run.out;
    auto j = nlohmann::json::parse(read_file(report));
    EXPECT_EQ(j["stats"]["n"], 3);
    EXPECT_EQ(j["stats"]["t"], "inf");
}

}  // namespace
}  // namespace xtract
