#include <gtest/gtest.h>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <random>
#include <thread>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "scratch.hpp"
#include "xtract/error.hpp"
#include "xtract/provider.hpp"

namespace xtract {
namespace {

using namespace std::chrono_literals;
using testing::fixture_method;
using testing::TempDir;

constexpr const char* kFixtures = "java/Fixtures.java";

// Scripted provider: completions by iteration, failures by iteration, and a
// delay that makes later iterations finish first.
class ScriptedProvider : public Provider {
public:
    std::vector<std::string> texts;
    std::set<int> failing;
    std::chrono::milliseconds delay{0};
    std::atomic<int> in_flight{0};
    std::atomic<int> peak{0};
    std::atomic<int> calls{0};

    std::string name() const override { return "scripted"; }
    Completion complete(const PromptSpec&, const ProviderConfig& config, const std::string&, int i) override
    {
        ++calls;
        int now = ++in_flight;
        int seen = peak.load();
        while (now > seen && !peak.compare_exchange_weak(seen, now)) {
        }
        std::this_thread::sleep_for(delay * (config.iterations - i));
        --in_flight;
        if (failing.count(i)) return {std::nullopt, "timeout"};
        return {texts.at(static_cast<std::size_t>(i) % texts.size()), {}};
    }
};

PromptSpec prompt_for(const char* method)
{
    return build_prompt(fixture_method(kFixtures, method));
}

TEST(Prompt, TargetIsNumberedDeclaration)
{
    auto unit = parse_unit("class A {\n  int f(int a) {\n    int b = a;\n    return b;\n  }\n}\n", "A.java");
    auto m = locate_method(unit, MethodLocator{std::string("f")});
    auto p = build_prompt(m);
    EXPECT_EQ(p.target, "2:   int f(int a) {\n3:     int b = a;\n4:     return b;\n5:   }");
    EXPECT_GE(p.few_shot_examples.size(), 1u);
    EXPECT_NE(p.text().find(p.target), std::string::npos);
}

TEST(Prompt, LineNumbersAreAbsolute)
{
    auto p = prompt_for("sumArray");
    EXPECT_EQ(p.target.substr(0, 4), "19: ");
    EXPECT_NE(p.target.find("\n26:     }"), std::string::npos);
}

TEST(Prompt, Deterministic)
{
    EXPECT_EQ(prompt_for("readAll").text(), prompt_for("readAll").text());
}

TEST(Prompt, BudgetRefusal)
{
    auto unit = parse_unit(testing::generate_long_method(40000), "Long.java");
    auto m = locate_method(unit, MethodLocator{std::string("longMethod")});
    try {
        (void)build_prompt(m, default_prompt_template(), PromptOptions{2000});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::method_too_large);
    }
}

TEST(Prompt, DefaultTemplateMatchesShippedFile)
{
    auto file = load_prompt_template(std::filesystem::path(XTRACT_PROMPTS_DIR) / "default_prompt.json");
    const auto& builtin = default_prompt_template();
    EXPECT_EQ(file.system_preamble, builtin.system_preamble);
    EXPECT_EQ(file.output_contract, builtin.output_contract);
    ASSERT_EQ(file.few_shot_examples.size(), builtin.few_shot_examples.size());
    ASSERT_GE(builtin.few_shot_examples.size(), 1u);
    // the shipped example answer is itself a well-formed completion
    auto parsed = parse_completion(builtin.few_shot_examples[0].answer);
    EXPECT_TRUE(parsed.diagnostics.empty());
    EXPECT_FALSE(parsed.suggestions.empty());
}

TEST(Prompt, TemplateWithoutExamplesIsRejected)
{
    TempDir dir;
    auto path = dir.path / "p.json";
    std::ofstream(path) << R"({"system_preamble": "x", "output_contract": "y", "few_shot_examples": []})";
    try {
        (void)load_prompt_template(path);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::invalid_config);
    }
}

TEST(Config, Defaults)
{
    ProviderConfig c;
    EXPECT_EQ(c.iterations, 5);
    EXPECT_EQ(c.max_parallel, 5);
    EXPECT_DOUBLE_EQ(c.temperature, 1.0);
    EXPECT_EQ(c.model_name, "gpt-3.5-turbo");
    EXPECT_NO_THROW(c.validate());
}

TEST(Config, Bounds)
{
    for (int it : {0, 21}) {
        ProviderConfig c;
        c.iterations = it;
        EXPECT_THROW(c.validate(), Error);
    }
    ProviderConfig c;
    c.iterations = 20;
    EXPECT_NO_THROW(c.validate());
    c.max_parallel = 0;
    EXPECT_THROW(c.validate(), Error);
    ProviderConfig t;
    t.temperature = -0.1;
    EXPECT_THROW(t.validate(), Error);
}

TEST(Digest, IgnoresEndpointAndKey)
{
    auto p = prompt_for("straightLine");
    ProviderConfig a;
    ProviderConfig b;
    b.endpoint = "http://localhost:1/v1/chat/completions";
    b.api_key_env = "OTHER_KEY";
    b.iterations = 9;
    b.max_parallel = 2;
    EXPECT_EQ(request_digest(p, a), request_digest(p, b));
    b.temperature = 0.2;
    EXPECT_NE(request_digest(p, a), request_digest(p, b));
    ProviderConfig c;
    c.model_name = "other";
    EXPECT_NE(request_digest(p, a), request_digest(p, c));
    EXPECT_NE(request_digest(p, a), request_digest(prompt_for("sumArray"), a));
    EXPECT_EQ(request_digest(p, a).size(), 64u);
}

TEST(ParseCompletion, FencedJson)
{
    auto r = parse_completion("```json\n[{\"function_name\":\"writeMethods\",\"line_start\":85,\"line_end\":90}]\n```");
    ASSERT_EQ(r.suggestions.size(), 1u);
    EXPECT_EQ(r.suggestions[0].proposed_name, "writeMethods");
    EXPECT_EQ(r.suggestions[0].raw_range, (LineRange{85, 90}));
    EXPECT_EQ(r.suggestions[0].state, SuggestionState::raw);
    EXPECT_TRUE(r.diagnostics.empty());
}

TEST(ParseCompletion, RefusalText)
{
    auto r = parse_completion("Sorry, I cannot help.");
    EXPECT_TRUE(r.suggestions.empty());
    EXPECT_EQ(r.diagnostics.size(), 1u);
}

TEST(ParseCompletion, InvertedRangeIsKept)
{
    auto r = parse_completion(R"([{"function_name":"f","line_start":20,"line_end":12}])");
    ASSERT_EQ(r.suggestions.size(), 1u);
    EXPECT_EQ(r.suggestions[0].raw_range.first, 20);
    EXPECT_EQ(r.suggestions[0].raw_range.last, 12);
}

TEST(ParseCompletion, ProseAndBracketsBeforeTheArray)
{
    auto r = parse_completion("Here [see below] are ideas:\n[{\"function_name\":\"a\",\"line_start\":1,\"line_end\":2},"
                              " {\"function_name\":\"b]\",\"line_start\":3,\"line_end\":4}]\nand [more]");
    ASSERT_EQ(r.suggestions.size(), 2u);
    EXPECT_EQ(r.suggestions[1].proposed_name, "b]");
    EXPECT_EQ(r.suggestions[1].id, 1);
}

TEST(ParseCompletion, MalformedElementsBecomeDiagnostics)
{
    auto r = parse_completion(R"([{"function_name":"ok","line_start":1,"line_end":2},
        {"function_name":"x","line_start":"3","line_end":4},
        {"line_start":1,"line_end":2},
        {"function_name":"y","line_start":1.5,"line_end":2},
        7,
        {"function_name":"big","line_start":1,"line_end":99999999999}])");
    EXPECT_EQ(r.suggestions.size(), 1u);
    EXPECT_EQ(r.diagnostics.size(), 5u);
}

TEST(ParseCompletion, TotalOnArbitraryText)
{
    std::mt19937 rng(5);
    const std::string alphabet = "[]{}\",:0123456789abc \n\\`-";
    std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
    std::uniform_int_distribution<int> len(0, 80);
    for (int i = 0; i < 3000; ++i) {
        std::string text;
        for (int n = len(rng); n > 0; --n) text += alphabet[pick(rng)];
        ParsedCompletion r;
        EXPECT_NO_THROW(r = parse_completion(text)) << text;
        EXPECT_TRUE(!r.suggestions.empty() || !r.diagnostics.empty() || text.find('[') != std::string::npos) << text;
    }
}

TEST(Sample, RecordsInIterationOrderWithPartialFailure)
{
    ScriptedProvider p;
    p.texts = {R"([{"function_name":"a","line_start":1,"line_end":2}])", "no json"};
    p.failing = {3};
    p.delay = 2ms;
    ProviderConfig c;
    c.iterations = 7;
    auto records = sample(p, prompt_for("straightLine"), c);
    ASSERT_EQ(records.size(), 7u);
    for (int i = 0; i < 7; ++i) EXPECT_EQ(records[static_cast<std::size_t>(i)].iteration, i);
    EXPECT_TRUE(records[3].failed);
    EXPECT_EQ(records[3].diagnostics, std::vector<std::string>{"timeout"});
    EXPECT_EQ(records[0].parsed.size(), 1u);
    EXPECT_EQ(records[1].raw_text, "no json");
    EXPECT_EQ(records[1].diagnostics.size(), 1u);
    auto failed = std::count_if(records.begin(), records.end(), [](const auto& r) { return r.failed; });
    EXPECT_EQ(failed, 1);
}

TEST(Sample, NeverExceedsMaxParallel)
{
    for (int limit : {1, 2, 5}) {
        ScriptedProvider p;
        p.texts = {"[]"};
        p.delay = 3ms;
        ProviderConfig c;
        c.iterations = 10;
        c.max_parallel = limit;
        auto records = sample(p, prompt_for("straightLine"), c);
        EXPECT_EQ(records.size(), 10u);
        EXPECT_LE(p.peak.load(), limit);
        EXPECT_EQ(p.calls.load(), 10);
    }
}

TEST(Sample, AllFailuresAreProviderUnreachable)
{
    ScriptedProvider p;
    p.texts = {"[]"};
    p.failing = {0, 1, 2};
    ProviderConfig c;
    c.iterations = 3;
    try {
        (void)sample(p, prompt_for("straightLine"), c);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::provider_unreachable);
    }
}

TEST(Sample, ThrowingProviderYieldsDiagnostic)
{
    class Throwing : public ScriptedProvider {
        Completion complete(const PromptSpec& p, const ProviderConfig& c, const std::string& d, int i) override
        {
            if (i == 1) throw std::runtime_error("boom");
            return ScriptedProvider::complete(p, c, d, i);
        }
    } p;
    p.texts = {"[]"};
    ProviderConfig c;
    c.iterations = 2;
    auto records = sample(p, prompt_for("straightLine"), c);
    EXPECT_TRUE(records[1].failed);
    EXPECT_EQ(records[1].diagnostics.front(), "boom");
}

TEST(Replay, RecordThenReplayIsByteIdentical)
{
    TempDir dir;
    ScriptedProvider live;
    live.texts = {"```json\n[{\"function_name\":\"a\",\"line_start\":12,\"line_end\":13}]\n```", "[]", "Sorry",
                  "[{\"function_name\":\"b\",\"line_start\":14,\"line_end\":15}]", "  [ ]  "};
    RecordingProvider recorder(live, dir.path);
    auto prompt = prompt_for("straightLine");
    ProviderConfig c;
    auto recorded = sample(recorder, prompt, c);

    auto file = replay_file(dir.path, request_digest(prompt, c));
    ASSERT_TRUE(std::filesystem::exists(file));
    ReplayProvider replay(dir.path);
    for (int run = 0; run < 2; ++run) {
        auto replayed = sample(replay, prompt, c);
        ASSERT_EQ(replayed.size(), recorded.size());
        for (std::size_t i = 0; i < recorded.size(); ++i) {
            EXPECT_EQ(replayed[i].raw_text, recorded[i].raw_text);
            EXPECT_EQ(replayed[i].raw_text, live.texts[i]);
            EXPECT_EQ(replayed[i].request_digest, recorded[i].request_digest);
        }
    }
}

TEST(Replay, MissingFixtureAndShortFixture)
{
    TempDir dir;
    ReplayProvider replay(dir.path);
    auto prompt = prompt_for("straightLine");
    ProviderConfig c;
    EXPECT_THROW((void)sample(replay, prompt, c), Error);

    std::ofstream(replay_file(dir.path, request_digest(prompt, c))) << R"({"digest":"x","prompt_text":"","completions":["[]","[]"]})";
    auto records = sample(replay, prompt, c);
    ASSERT_EQ(records.size(), 5u);
    EXPECT_FALSE(records[1].failed);
    EXPECT_TRUE(records[2].failed);
    EXPECT_NE(records[2].diagnostics.front().find("iteration 2"), std::string::npos);
}

// A local stand-in for an OpenAI-compatible endpoint.
class FakeEndpoint {
public:
    std::atomic<int> requests{0};
    std::string last_auth;
    std::string last_body;
    std::chrono::milliseconds delay{0};
    int port = 0;

    FakeEndpoint()
    {
        server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
            ++requests;
            {
                std::lock_guard lock(mu_);
                last_auth = req.get_header_value("Authorization");
                last_body = req.body;
            }
            std::this_thread::sleep_for(delay);
            res.set_content(R"({"choices":[{"message":{"role":"assistant","content":"[{\"function_name\":\"f\",\"line_start\":12,\"line_end\":13}]"}}]})",
                            "application/json");
        });
        port = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~FakeEndpoint()
    {
        server_.stop();
        thread_.join();
    }
    std::string url() const { return "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions"; }

private:
    httplib::Server server_;
    std::thread thread_;
    std::mutex mu_;
};

TEST(OpenAi, SendsChatRequestWithKeyFromEnvironment)
{
    FakeEndpoint endpoint;
    ::setenv("XTRACT_TEST_KEY", "sk-test-123", 1);
    ProviderConfig c;
    c.endpoint = endpoint.url();
    c.api_key_env = "XTRACT_TEST_KEY";
    c.iterations = 3;
    OpenAiProvider provider;
    auto records = sample(provider, prompt_for("straightLine"), c);
    ASSERT_EQ(records.size(), 3u);
    for (const auto& r : records) {
        EXPECT_FALSE(r.failed);
        ASSERT_EQ(r.parsed.size(), 1u);
        EXPECT_EQ(r.parsed[0].proposed_name, "f");
    }
    EXPECT_EQ(endpoint.requests.load(), 3);
    EXPECT_EQ(endpoint.last_auth, "Bearer sk-test-123");
    auto body = nlohmann::json::parse(endpoint.last_body);
    EXPECT_EQ(body["model"], "gpt-3.5-turbo");
    EXPECT_EQ(body["messages"].front()["role"], "system");
    EXPECT_EQ(body["messages"].back()["content"], prompt_for("straightLine").target);
    ::unsetenv("XTRACT_TEST_KEY");
}

TEST(OpenAi, MissingKeyNamesTheVariableOnly)
{
    ::unsetenv("XTRACT_ABSENT_KEY");
    ProviderConfig c;
    c.endpoint = "http://127.0.0.1:9/v1/chat/completions";
    c.api_key_env = "XTRACT_ABSENT_KEY";
    OpenAiProvider provider;
    auto r = provider.complete(prompt_for("straightLine"), c, "d", 0);
    EXPECT_FALSE(r.text);
    EXPECT_NE(r.error.find("XTRACT_ABSENT_KEY"), std::string::npos);
}

TEST(OpenAi, TimeoutIsAPerIterationDiagnostic)
{
    FakeEndpoint endpoint;
    endpoint.delay = 600ms;
    ::setenv("XTRACT_TEST_KEY", "sk-secret-value", 1);
    ProviderConfig c;
    c.endpoint = endpoint.url();
    c.api_key_env = "XTRACT_TEST_KEY";
    c.iterations = 2;
    c.timeout = 100ms;
    OpenAiProvider provider;
    try {
        (void)sample(provider, prompt_for("straightLine"), c);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::provider_unreachable);
        EXPECT_NE(std::string(e.what()).find("timeout"), std::string::npos);
        EXPECT_EQ(std::string(e.what()).find("sk-secret-value"), std::string::npos);
    }
    ::unsetenv("XTRACT_TEST_KEY");
}

}  // namespace
}  // namespace xtract
