#include "xtract/provider.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <regex>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "xtract/atomic_write.hpp"
#include "xtract/digest.hpp"
#include "xtract/error.hpp"

namespace xtract {

using nlohmann::json;

namespace detail {
extern const char* const kDefaultPromptJson;
}

namespace {

PromptTemplate template_from_json(const json& j)
{
    PromptTemplate t;
    t.system_preamble = j.at("system_preamble").get<std::string>();
    t.output_contract = j.at("output_contract").get<std::string>();
    for (const auto& ex : j.at("few_shot_examples")) {
        t.few_shot_examples.push_back({ex.at("method").get<std::string>(), ex.at("answer").get<std::string>()});
    }
    if (t.few_shot_examples.empty()) throw Error(ErrorCode::invalid_config, "prompt template has no few-shot examples");
    return t;
}

// End of the bracketed value starting at text[open], honoring JSON strings.
std::optional<std::size_t> matching_bracket(std::string_view text, std::size_t open)
{
    int depth = 0;
    bool in_string = false;
    for (std::size_t i = open; i < text.size(); ++i) {
        char c = text[i];
        if (in_string) {
            if (c == '\\') ++i;
            else if (c == '"') in_string = false;
            continue;
        }
        if (c == '"') in_string = true;
        else if (c == '[' || c == '{') ++depth;
        else if (c == ']' || c == '}') {
            if (--depth == 0) return i;
        }
    }
    return std::nullopt;
}

std::optional<int> as_line(const json& v)
{
    if (!v.is_number_integer()) return std::nullopt;
    auto n = v.get<std::int64_t>();
    if (n < std::numeric_limits<int>::min() || n > std::numeric_limits<int>::max()) return std::nullopt;
    return static_cast<int>(n);
}

}  // namespace

const PromptTemplate& default_prompt_template()
{
    static const PromptTemplate t = template_from_json(json::parse(detail::kDefaultPromptJson));
    return t;
}

PromptTemplate load_prompt_template(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_error, "cannot read prompt file " + path.string());
    try {
        return template_from_json(json::parse(in));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::invalid_config, "prompt file " + path.string() + ": " + e.what());
    }
}

std::string PromptSpec::text() const
{
    std::string out = "### System\n" + system_preamble + "\n\n### Output\n" + output_contract + "\n";
    for (std::size_t i = 0; i < few_shot_examples.size(); ++i) {
        auto n = std::to_string(i + 1);
        out += "\n### Example " + n + "\n" + few_shot_examples[i].method_text + "\n### Answer " + n + "\n"
               + few_shot_examples[i].answer + "\n";
    }
    out += "\n### Method\n" + target + "\n";
    return out;
}

std::string numbered_declaration(const MethodModel& model)
{
    std::string out;
    for (int line = model.declaration_span.first; line <= model.declaration_span.last; ++line) {
        if (!out.empty()) out += '\n';
        out += std::to_string(line) + ": ";
        out += model.owner.line_text(line);
    }
    return out;
}

PromptSpec build_prompt(const MethodModel& model, const PromptTemplate& tmpl, const PromptOptions& options)
{
    PromptSpec p{tmpl.system_preamble, tmpl.few_shot_examples, numbered_declaration(model), tmpl.output_contract};
    std::size_t tokens = (p.text().size() + 3) / 4;
    if (tokens > options.token_budget) {
        throw Error(ErrorCode::method_too_large, "prompt for '" + model.name + "' needs about " + std::to_string(tokens)
                                                     + " tokens; the budget is " + std::to_string(options.token_budget));
    }
    return p;
}

void ProviderConfig::validate() const
{
    auto bad = [](const std::string& what) { throw Error(ErrorCode::invalid_config, what); };
    if (iterations < 1 || iterations > 20) bad("iterations must be in [1, 20]");
    if (max_parallel < 1) bad("max_parallel must be at least 1");
    if (!(temperature >= 0)) bad("temperature must be non-negative");
    if (timeout.count() <= 0) bad("timeout must be positive");
    if (model_name.empty()) bad("model name is empty");
}

std::string request_digest(const PromptSpec& prompt, const ProviderConfig& config)
{
    json j{{"prompt", prompt.text()}, {"model", config.model_name}, {"temperature", config.temperature}};
    return sha256_hex(j.dump());
}

ParsedCompletion parse_completion(std::string_view raw_text)
{
    ParsedCompletion out;
    std::optional<json> array;
    for (std::size_t pos = raw_text.find('['); pos != std::string_view::npos; pos = raw_text.find('[', pos + 1)) {
        auto close = matching_bracket(raw_text, pos);
        if (!close) continue;
        json j = json::parse(raw_text.substr(pos, *close - pos + 1), nullptr, false);
        if (!j.is_discarded() && j.is_array()) {
            array = std::move(j);
            break;
        }
    }
    if (!array) {
        out.diagnostics.push_back("no JSON array in completion");
        return out;
    }
    for (std::size_t i = 0; i < array->size(); ++i) {
        const json& e = (*array)[i];
        auto where = "element " + std::to_string(i) + ": ";
        if (!e.is_object()) {
            out.diagnostics.push_back(where + "not an object");
            continue;
        }
        auto name = e.find("function_name");
        auto start = e.find("line_start");
        auto end = e.find("line_end");
        if (name == e.end() || !name->is_string()) {
            out.diagnostics.push_back(where + "function_name missing or not a string");
            continue;
        }
        std::optional<int> first = start == e.end() ? std::nullopt : as_line(*start);
        std::optional<int> last = end == e.end() ? std::nullopt : as_line(*end);
        if (!first || !last) {
            out.diagnostics.push_back(where + "line_start/line_end missing or not integers");
            continue;
        }
        Suggestion s;
        s.id = static_cast<int>(out.suggestions.size());
        s.proposed_name = name->get<std::string>();
        s.raw_range = LineRange{*first, *last};
        out.suggestions.push_back(std::move(s));
    }
    return out;
}

void Provider::sampled(const PromptSpec&, const std::string&, const std::vector<CompletionRecord>&) {}

std::vector<CompletionRecord> sample(Provider& provider, const PromptSpec& prompt, const ProviderConfig& config)
{
    config.validate();
    const std::string digest = request_digest(prompt, config);
    std::vector<CompletionRecord> records(static_cast<std::size_t>(config.iterations));
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int i = next++; i < config.iterations; i = next++) {
            CompletionRecord& r = records[static_cast<std::size_t>(i)];
            r.request_digest = digest;
            r.iteration = i;
            Completion c;
            try {
                c = provider.complete(prompt, config, digest, i);
            } catch (const std::exception& e) {
                c.error = e.what();
            }
            if (!c.text) {
                r.failed = true;
                r.diagnostics.push_back(c.error.empty() ? "provider returned no text" : c.error);
                continue;
            }
            r.raw_text = std::move(*c.text);
            ParsedCompletion parsed = parse_completion(r.raw_text);
            r.parsed = std::move(parsed.suggestions);
            r.diagnostics = std::move(parsed.diagnostics);
        }
    };
    int n = std::min(config.max_parallel, config.iterations);
    std::vector<std::thread> pool;
    for (int t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    if (std::all_of(records.begin(), records.end(), [](const CompletionRecord& r) { return r.failed; })) {
        throw Error(ErrorCode::provider_unreachable,
                    provider.name() + ": all " + std::to_string(config.iterations)
                        + " requests failed; first error: " + records.front().diagnostics.front());
    }
    provider.sampled(prompt, digest, records);
    return records;
}

std::filesystem::path replay_file(const std::filesystem::path& dir, const std::string& digest)
{
    return dir / (digest + ".json");
}

ReplayProvider::ReplayProvider(std::filesystem::path dir) : dir_(std::move(dir)) {}

Completion ReplayProvider::complete(const PromptSpec&, const ProviderConfig&, const std::string& digest,
                                    int iteration)
{
    auto path = replay_file(dir_, digest);
    std::ifstream in(path);
    if (!in) return {std::nullopt, "no replay fixture " + path.filename().string()};
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.contains("completions") || !j["completions"].is_array()) {
        return {std::nullopt, "malformed replay fixture " + path.filename().string()};
    }
    const json& all = j["completions"];
    if (iteration < 0 || static_cast<std::size_t>(iteration) >= all.size() || !all[static_cast<std::size_t>(iteration)].is_string()) {
        return {std::nullopt, "replay fixture has no completion for iteration " + std::to_string(iteration)};
    }
    return {all[static_cast<std::size_t>(iteration)].get<std::string>(), {}};
}

RecordingProvider::RecordingProvider(Provider& inner, std::filesystem::path dir) : inner_(inner), dir_(std::move(dir))
{
}

Completion RecordingProvider::complete(const PromptSpec& prompt, const ProviderConfig& config,
                                       const std::string& digest, int iteration)
{
    return inner_.complete(prompt, config, digest, iteration);
}

void RecordingProvider::sampled(const PromptSpec& prompt, const std::string& digest,
                                const std::vector<CompletionRecord>& records)
{
    json completions = json::array();
    for (const auto& r : records) {
        if (!r.failed) completions.push_back(r.raw_text);
    }
    json j{{"digest", digest}, {"prompt_text", prompt.text()}, {"completions", completions}};
    std::filesystem::create_directories(dir_);
    write_file_atomically(replay_file(dir_, digest), j.dump(2) + "\n");
}

std::string chat_request_body(const PromptSpec& prompt, const ProviderConfig& config)
{
    json messages = json::array();
    messages.push_back({{"role", "system"}, {"content", prompt.system_preamble + "\n\n" + prompt.output_contract}});
    for (const auto& ex : prompt.few_shot_examples) {
        messages.push_back({{"role", "user"}, {"content", ex.method_text}});
        messages.push_back({{"role", "assistant"}, {"content", ex.answer}});
    }
    messages.push_back({{"role", "user"}, {"content", prompt.target}});
    json body{{"model", config.model_name}, {"temperature", config.temperature}, {"messages", messages}};
    return body.dump();
}

Completion OpenAiProvider::complete(const PromptSpec& prompt, const ProviderConfig& config, const std::string&, int)
{
    static const std::regex url(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(config.endpoint, m, url)) return {std::nullopt, "malformed endpoint URL"};
    const char* key = std::getenv(config.api_key_env.c_str());
    if (!key || !*key) return {std::nullopt, "environment variable " + config.api_key_env + " is not set"};

    httplib::Client client(m[1].str());
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(config.timeout);
    auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    httplib::Headers headers{{"Authorization", std::string("Bearer ") + key}};
    std::string path = m[2].matched ? m[2].str() : "/";
    auto res = client.Post(path, headers, chat_request_body(prompt, config), "application/json");
    if (!res) {
        auto err = res.error();
        bool timeout = err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read;
        return {std::nullopt, timeout ? "timeout" : "request failed: " + httplib::to_string(err)};
    }
    if (res->status != 200) return {std::nullopt, "HTTP " + std::to_string(res->status)};
    json j = json::parse(res->body, nullptr, false);
    if (j.is_discarded()) return {std::nullopt, "response is not JSON"};
    try {
        return {j.at("choices").at(0).at("message").at("content").get<std::string>(), {}};
    } catch (const json::exception&) {
        return {std::nullopt, "response has no choices[0].message.content"};
    }
}

}  // namespace xtract
