#include <gtest/gtest.h>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <thread>

#include "fixtures.hpp"
#include "scratch.hpp"
#include "xtract/service.hpp"

namespace xtract {
namespace {

using nlohmann::json;
using testing::demo_dir;
using testing::fixture;
using testing::ListProvider;
using testing::read_file;
using testing::TempDir;

std::vector<std::string> jvm_completions()
{
    std::ifstream in(demo_dir() / "completions/writeJvmClass.json");
    return json::parse(in).get<std::vector<std::string>>();
}

class ServiceTest : public ::testing::Test {
protected:
    TempDir root;
    TempDir outside;
    ListProvider provider{jvm_completions()};
    std::unique_ptr<Service> service;
    std::thread thread;
    std::unique_ptr<httplib::Client> client;
    std::filesystem::path source;

    void SetUp() override
    {
        source = root.write("src/JvmClassWriter.java", read_file(demo_dir() / "src/JvmClassWriter.java"));
        root.write("src/Broken.java", "class Broken {\n");
        outside.write("Secret.java", "class Secret {}\n");
        AppConfig config;
        config.root = root.path;
        config.port = 0;
        service = std::make_unique<Service>(config, provider);
        int port = service->bind();
        thread = std::thread([this] { service->listen(); });
        service->server().wait_until_ready();
        client = std::make_unique<httplib::Client>("127.0.0.1", port);
    }

    void TearDown() override
    {
        service->stop();
        thread.join();
    }

    httplib::Result post(const std::string& path, const json& body)
    {
        return client->Post(path, body.dump(), "application/json");
    }

    json suggest_ok()
    {
        auto res = post("/suggest", {{"path", "src/JvmClassWriter.java"}, {"method_locator", "writeJvmClass"}});
        EXPECT_TRUE(res);
        EXPECT_EQ(res->status, 200) << res->body;
        return json::parse(res->body);
    }
};

TEST_F(ServiceTest, Health)
{
    auto res = client->Get("/health");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 200);
    EXPECT_EQ(json::parse(res->body)["status"], "ok");
}

TEST_F(ServiceTest, SuggestThenApply)
{
    const std::string before = read_file(source);
    json session = suggest_ok();
    EXPECT_EQ(session["method"], "writeJvmClass");
    EXPECT_EQ(session["path"], "src/JvmClassWriter.java");
    EXPECT_EQ(session["method_range"], json({{"first", 53}, {"last", 94}}));
    ASSERT_EQ(session["groups"].size(), 3u);
    EXPECT_EQ(session["groups"][0]["index"], 0);
    EXPECT_EQ(session["rejected"][0]["category"], "whole_body");
    // Suggesting never writes.
    EXPECT_EQ(read_file(source), before);

    int index = -1;
    for (const auto& g : session["groups"]) {
        if (g["name"] == "writeMethods") index = g["index"];
    }
    ASSERT_GE(index, 0);
    EXPECT_EQ(session["groups"][index]["range"], json({{"first", 85}, {"last", 90}}));
    EXPECT_EQ(session["groups"][index]["signature"],
              "private void writeMethods(DataOutputStream out) throws IOException");

    auto got = client->Get("/session/" + session["id"].get<std::string>());
    ASSERT_TRUE(got);
    EXPECT_EQ(got->status, 200);
    EXPECT_EQ(json::parse(got->body), session);

    auto res = post("/apply", {{"session_id", session["id"]}, {"group_index", index}});
    ASSERT_TRUE(res);
    ASSERT_EQ(res->status, 200) << res->body;
    json applied = json::parse(res->body);
    EXPECT_FALSE(applied["diff"].get<std::string>().empty());
    EXPECT_EQ(applied["call_line"], 85);
    const std::string golden = read_file(fixture("golden/JvmClassWriter.writeMethods.golden.java"));
    EXPECT_EQ(applied["new_text"], golden);
    EXPECT_EQ(read_file(source), golden);

    // The file changed, so the session is stale now.
    res = post("/apply", {{"session_id", session["id"]}, {"group_index", index}});
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 409);
    EXPECT_EQ(json::parse(res->body)["error"], "stale_unit");
}

TEST_F(ServiceTest, ApplyAfterExternalEditIs409)
{
    json session = suggest_ok();
    std::ofstream(source, std::ios::app) << "// edited\n";
    const std::string edited = read_file(source);
    auto res = post("/apply", {{"session_id", session["id"]}, {"group_index", 0}});
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 409);
    EXPECT_EQ(read_file(source), edited);
}

TEST_F(ServiceTest, SourceIsConfined)
{
    auto ok = client->Get("/source?path=src/JvmClassWriter.java");
    ASSERT_TRUE(ok);
    EXPECT_EQ(ok->status, 200);
    EXPECT_EQ(ok->body, read_file(source));

    for (const std::string& p : {std::string("../") + outside.path.filename().string() + "/Secret.java",
                                 (outside.path / "Secret.java").string(), std::string("src/../../x.java"),
                                 std::string("/etc/passwd")}) {
        auto res = client->Get("/source", httplib::Params{{"path", p}}, httplib::Headers{});
        ASSERT_TRUE(res);
        EXPECT_EQ(res->status, 403) << p;
    }

    std::filesystem::create_symlink(outside.path / "Secret.java", root.path / "link.java");
    auto linked = client->Get("/source?path=link.java");
    ASSERT_TRUE(linked);
    EXPECT_EQ(linked->status, 403);

    auto res = post("/suggest", {{"path", (outside.path / "Secret.java").string()}, {"method_locator", "x"}});
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 403);
}

TEST_F(ServiceTest, SourceErrors)
{
    auto missing_param = client->Get("/source");
    ASSERT_TRUE(missing_param);
    EXPECT_EQ(missing_param->status, 400);
    auto missing = client->Get("/source?path=src/Nope.java");
    ASSERT_TRUE(missing);
    EXPECT_EQ(missing->status, 404);
    auto broken = client->Get("/source?path=src/Broken.java");
    ASSERT_TRUE(broken);
    EXPECT_EQ(broken->status, 422);
}

TEST_F(ServiceTest, BadRequests)
{
    auto res = client->Post("/suggest", "not json", "application/json");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 400);
    res = post("/suggest", {{"path", "src/JvmClassWriter.java"}});
    EXPECT_EQ(res->status, 400);
    res = post("/apply", {{"session_id", 3}, {"group_index", 0}});
    EXPECT_EQ(res->status, 400);
    res = post("/apply", {{"session_id", "abc"}, {"group_index", "0"}});
    EXPECT_EQ(res->status, 400);
}

TEST_F(ServiceTest, NotFoundAndInvalid)
{
    auto res = client->Get("/session/0123abcd");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 404);
    res = post("/apply", {{"session_id", "0123abcd"}, {"group_index", 0}});
    EXPECT_EQ(res->status, 404);
    res = post("/suggest", {{"path", "src/Nope.java"}, {"method_locator", "f"}});
    EXPECT_EQ(res->status, 404);
    res = post("/suggest", {{"path", "src/JvmClassWriter.java"}, {"method_locator", "nope"}});
    EXPECT_EQ(res->status, 404);
    EXPECT_EQ(json::parse(res->body)["error"], "method_not_found");

    json session = suggest_ok();
    res = post("/apply", {{"session_id", session["id"]}, {"group_index", 3}});
    EXPECT_EQ(res->status, 422);
    res = post("/apply", {{"session_id", session["id"]}, {"group_index", -1}});
    EXPECT_EQ(res->status, 422);
}

TEST_F(ServiceTest, LineLocatorAndConcurrentSuggest)
{
    auto res = post("/suggest", {{"path", "src/JvmClassWriter.java"}, {"method_locator", 60}});
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 200);
    EXPECT_EQ(json::parse(res->body)["method"], "writeJvmClass");

    std::vector<std::thread> clients;
    std::atomic<int> ok{0};
    for (int i = 0; i < 4; ++i) {
        clients.emplace_back([&] {
            httplib::Client c("127.0.0.1", client->port());
            auto r = c.Post("/suggest", R"({"path": "src/JvmClassWriter.java", "method_locator": "writeJvmClass"})",
                            "application/json");
            if (r && r->status == 200) ++ok;
        });
    }
    for (auto& t : clients) t.join();
    EXPECT_EQ(ok, 4);
}

TEST(Confine, Rules)
{
    TempDir root;
    root.write("a/b.java", "");
    EXPECT_EQ(confine(root.path, "a/b.java"), std::filesystem::weakly_canonical(root.path / "a/b.java"));
    EXPECT_TRUE(confine(root.path, "a/../a/b.java"));
    EXPECT_TRUE(confine(root.path, "new.java"));
    EXPECT_FALSE(confine(root.path, ""));
    EXPECT_EQ(confine(root.path, "."), std::filesystem::weakly_canonical(root.path));
    EXPECT_FALSE(confine(root.path, ".."));
    EXPECT_FALSE(confine(root.path, "../x"));
    EXPECT_FALSE(confine(root.path, "/etc/passwd"));
}

}  // namespace
}  // namespace xtract
