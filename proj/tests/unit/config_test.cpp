#include <gtest/gtest.h>

#include <map>

#include "scratch.hpp"
#include "xtract/config.hpp"
#include "xtract/error.hpp"

namespace xtract {
namespace {

using testing::TempDir;

EnvLookup env_of(std::map<std::string, std::string> vars)
{
    return [vars = std::move(vars)](const std::string& name) -> std::optional<std::string> {
        auto it = vars.find(name);
        if (it == vars.end()) return std::nullopt;
        return it->second;
    };
}

ErrorCode code_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error";
    return ErrorCode::io_error;
}

TEST(Config, Defaults)
{
    auto c = resolve_config(std::nullopt, env_of({}), {});
    EXPECT_EQ(c.provider_kind, "openai");
    EXPECT_EQ(c.top_n, 3);
    EXPECT_EQ(c.k, 5);
    EXPECT_DOUBLE_EQ(c.tolerance, 0.03);
    EXPECT_EQ(c.host, "127.0.0.1");
    EXPECT_EQ(c.port, 8765);
    EXPECT_EQ(c.provider.api_key_env, "OPENAI_API_KEY");
}

TEST(Config, FileThenEnvironmentThenOverrides)
{
    TempDir dir;
    auto file = dir.write("conf/xtract.json", R"({"model": "from-file", "top_n": 4, "k": 7, "port": 9000,
        "fixture_dir": "fixtures", "provider": "replay", "api_key_env": "MY_KEY"})");

    auto c = resolve_config(file, env_of({}), {});
    EXPECT_EQ(c.provider.model_name, "from-file");
    EXPECT_EQ(c.top_n, 4);
    EXPECT_EQ(c.provider.api_key_env, "MY_KEY");
    EXPECT_EQ(*c.fixture_dir, dir.path / "conf" / "fixtures");

    c = resolve_config(file, env_of({{"XTRACT_MODEL", "from-env"}, {"XTRACT_TOP_N", "2"}}), {});
    EXPECT_EQ(c.provider.model_name, "from-env");
    EXPECT_EQ(c.top_n, 2);
    EXPECT_EQ(c.k, 7);

    ConfigOverrides o;
    o.model = "from-cli";
    o.port = 0;
    c = resolve_config(file, env_of({{"XTRACT_MODEL", "from-env"}, {"XTRACT_PORT", "1234"}}), o);
    EXPECT_EQ(c.provider.model_name, "from-cli");
    EXPECT_EQ(c.port, 0);
    EXPECT_EQ(c.top_n, 4);
}

TEST(Config, ApiKeyIsRefusedInFiles)
{
    TempDir dir;
    auto file = dir.write("x.json", R"({"api_key": "sk-do-not-store"})");
    try {
        (void)resolve_config(file, env_of({}), {});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::invalid_config);
        EXPECT_EQ(std::string(e.what()).find("sk-do-not-store"), std::string::npos);
    }
}

TEST(Config, Rejections)
{
    TempDir dir;
    auto unknown = dir.write("u.json", R"({"colour": "red"})");
    auto wrong_type = dir.write("t.json", R"({"top_n": "three"})");
    auto not_object = dir.write("n.json", "[1, 2]");
    EXPECT_EQ(code_of([&] { (void)resolve_config(unknown, env_of({}), {}); }), ErrorCode::invalid_config);
    EXPECT_EQ(code_of([&] { (void)resolve_config(wrong_type, env_of({}), {}); }), ErrorCode::invalid_config);
    EXPECT_EQ(code_of([&] { (void)resolve_config(not_object, env_of({}), {}); }), ErrorCode::invalid_config);
    EXPECT_EQ(code_of([&] { (void)resolve_config(dir.path / "absent.json", env_of({}), {}); }), ErrorCode::io_error);
    EXPECT_EQ(code_of([&] { (void)resolve_config(std::nullopt, env_of({{"XTRACT_TOP_N", "3x"}}), {}); }),
              ErrorCode::invalid_config);
    EXPECT_EQ(code_of([&] { (void)resolve_config(std::nullopt, env_of({{"XTRACT_PROVIDER", "replay"}}), {}); }),
              ErrorCode::invalid_config);
    EXPECT_EQ(code_of([&] { (void)resolve_config(std::nullopt, env_of({{"XTRACT_PROVIDER", "magic"}}), {}); }),
              ErrorCode::invalid_config);
    ConfigOverrides o;
    o.tolerance = 1.5;
    EXPECT_EQ(code_of([&] { (void)resolve_config(std::nullopt, env_of({}), o); }), ErrorCode::invalid_config);
    o = {};
    o.port = 70000;
    EXPECT_EQ(code_of([&] { (void)resolve_config(std::nullopt, env_of({}), o); }), ErrorCode::invalid_config);
    o = {};
    o.iterations = 0;
    EXPECT_EQ(code_of([&] { (void)resolve_config(std::nullopt, env_of({}), o); }), ErrorCode::invalid_config);
}

TEST(Config, ProviderStack)
{
    TempDir dir;
    ConfigOverrides o;
    o.provider_kind = "replay";
    o.fixture_dir = dir.path;
    ProviderStack replay(resolve_config(std::nullopt, env_of({}), o));
    EXPECT_EQ(replay.get().name(), "replay");

    ProviderStack live(resolve_config(std::nullopt, env_of({}), {}));
    EXPECT_EQ(live.get().name(), "openai");
}

TEST(Config, PromptFile)
{
    TempDir dir;
    auto c = resolve_config(std::nullopt, env_of({}), {});
    EXPECT_EQ(prompt_template(c).system_preamble, default_prompt_template().system_preamble);
    ConfigOverrides o;
    o.prompt_file = dir.write("p.json", R"({"system_preamble": "Be brief.",
        "few_shot_examples": [{"method": "1: void f() {\n2: }", "answer": "[]"}],
        "output_contract": "JSON only."})");
    c = resolve_config(std::nullopt, env_of({}), o);
    EXPECT_EQ(prompt_template(c).system_preamble, "Be brief.");
}

}  // namespace
}  // namespace xtract
