#include "xtract/config.hpp"

#include <cstdlib>
#include <fstream>

#include <nlohmann/json.hpp>

#include "xtract/error.hpp"

namespace xtract {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::invalid_config, what); }

int to_int(const std::string& name, const std::string& text)
{
    try {
        std::size_t used = 0;
        int v = std::stoi(text, &used);
        if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
    bad(name + " must be an integer, got '" + text + "'");
}

double to_double(const std::string& name, const std::string& text)
{
    try {
        std::size_t used = 0;
        double v = std::stod(text, &used);
        if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
    bad(name + " must be a number, got '" + text + "'");
}

template <typename T>
void set(T& field, const std::optional<T>& value)
{
    if (value) field = *value;
}

}  // namespace

void AppConfig::validate() const
{
    provider.validate();
    if (provider_kind != "openai" && provider_kind != "replay" && provider_kind != "record") {
        bad("provider must be openai, replay or record, got '" + provider_kind + "'");
    }
    if ((provider_kind == "replay" || provider_kind == "record") && !fixture_dir) {
        bad("the " + provider_kind + " provider needs a fixture directory");
    }
    if (top_n < 1) bad("top_n must be at least 1");
    if (k < 1) bad("k must be at least 1");
    if (!(tolerance >= 0 && tolerance <= 1)) bad("tolerance must be in [0, 1]");
    if (port < 0 || port > 65535) bad("port must be in [0, 65535]");
}

std::optional<std::string> process_env(const std::string& name)
{
    const char* v = std::getenv(name.c_str());
    if (!v) return std::nullopt;
    return std::string(v);
}

void apply_config_file(AppConfig& c, const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_error, "cannot read config file " + path.string());
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) bad(path.string() + " is not a JSON object");
    const auto base = path.parent_path();
    auto relative = [&](const std::string& p) {
        std::filesystem::path fp(p);
        return fp.is_absolute() ? fp : base / fp;
    };
    try {
        for (const auto& [key, v] : j.items()) {
            if (key == "api_key") bad("api keys are read from the environment only; set api_key_env instead");
            else if (key == "provider") c.provider_kind = v.get<std::string>();
            else if (key == "model") c.provider.model_name = v.get<std::string>();
            else if (key == "endpoint") c.provider.endpoint = v.get<std::string>();
            else if (key == "temperature") c.provider.temperature = v.get<double>();
            else if (key == "iterations") c.provider.iterations = v.get<int>();
            else if (key == "max_parallel") c.provider.max_parallel = v.get<int>();
            else if (key == "timeout_ms") c.provider.timeout = std::chrono::milliseconds(v.get<int>());
            else if (key == "api_key_env") c.provider.api_key_env = v.get<std::string>();
            else if (key == "top_n") c.top_n = v.get<int>();
            else if (key == "tolerance") c.tolerance = v.get<double>();
            else if (key == "k") c.k = v.get<int>();
            else if (key == "prompt_file") c.prompt_file = relative(v.get<std::string>());
            else if (key == "fixture_dir") c.fixture_dir = relative(v.get<std::string>());
            else if (key == "host") c.host = v.get<std::string>();
            else if (key == "port") c.port = v.get<int>();
            else if (key == "root") c.root = relative(v.get<std::string>());
            else bad(path.string() + ": unknown key '" + key + "'");
        }
    } catch (const json::exception& e) {
        bad(path.string() + ": " + e.what());
    }
}

void apply_env(AppConfig& c, const EnvLookup& env)
{
    auto get = [&](const char* name, auto&& apply) {
        if (auto v = env(name)) apply(std::string(name), *v);
    };
    get("XTRACT_PROVIDER", [&](auto, const std::string& v) { c.provider_kind = v; });
    get("XTRACT_MODEL", [&](auto, const std::string& v) { c.provider.model_name = v; });
    get("XTRACT_ENDPOINT", [&](auto, const std::string& v) { c.provider.endpoint = v; });
    get("XTRACT_TEMPERATURE", [&](auto n, const std::string& v) { c.provider.temperature = to_double(n, v); });
    get("XTRACT_ITERATIONS", [&](auto n, const std::string& v) { c.provider.iterations = to_int(n, v); });
    get("XTRACT_MAX_PARALLEL", [&](auto n, const std::string& v) { c.provider.max_parallel = to_int(n, v); });
    get("XTRACT_TIMEOUT_MS", [&](auto n, const std::string& v) {
        c.provider.timeout = std::chrono::milliseconds(to_int(n, v));
    });
    get("XTRACT_API_KEY_ENV", [&](auto, const std::string& v) { c.provider.api_key_env = v; });
    get("XTRACT_TOP_N", [&](auto n, const std::string& v) { c.top_n = to_int(n, v); });
    get("XTRACT_TOLERANCE", [&](auto n, const std::string& v) { c.tolerance = to_double(n, v); });
    get("XTRACT_K", [&](auto n, const std::string& v) { c.k = to_int(n, v); });
    get("XTRACT_PROMPT_FILE", [&](auto, const std::string& v) { c.prompt_file = v; });
    get("XTRACT_FIXTURE_DIR", [&](auto, const std::string& v) { c.fixture_dir = v; });
    get("XTRACT_HOST", [&](auto, const std::string& v) { c.host = v; });
    get("XTRACT_PORT", [&](auto n, const std::string& v) { c.port = to_int(n, v); });
    get("XTRACT_ROOT", [&](auto, const std::string& v) { c.root = v; });
}

void apply_overrides(AppConfig& c, const ConfigOverrides& o)
{
    set(c.provider_kind, o.provider_kind);
    set(c.provider.model_name, o.model);
    set(c.provider.endpoint, o.endpoint);
    set(c.provider.temperature, o.temperature);
    set(c.provider.iterations, o.iterations);
    set(c.provider.max_parallel, o.max_parallel);
    if (o.timeout_ms) c.provider.timeout = std::chrono::milliseconds(*o.timeout_ms);
    set(c.top_n, o.top_n);
    set(c.tolerance, o.tolerance);
    set(c.k, o.k);
    if (o.prompt_file) c.prompt_file = o.prompt_file;
    if (o.fixture_dir) c.fixture_dir = o.fixture_dir;
    set(c.host, o.host);
    set(c.port, o.port);
    set(c.root, o.root);
}

AppConfig resolve_config(const std::optional<std::filesystem::path>& file, const EnvLookup& env,
                         const ConfigOverrides& overrides)
{
    AppConfig c;
    if (file) apply_config_file(c, *file);
    apply_env(c, env);
    apply_overrides(c, overrides);
    c.validate();
    return c;
}

ProviderStack::ProviderStack(const AppConfig& config)
{
    if (config.provider_kind == "replay") {
        outer_ = std::make_unique<ReplayProvider>(*config.fixture_dir);
        return;
    }
    inner_ = std::make_unique<OpenAiProvider>();
    if (config.provider_kind == "record") {
        outer_ = std::make_unique<RecordingProvider>(*inner_, *config.fixture_dir);
    } else {
        outer_ = std::move(inner_);
    }
}

PromptTemplate prompt_template(const AppConfig& config)
{
    return config.prompt_file ? load_prompt_template(*config.prompt_file) : default_prompt_template();
}

}  // namespace xtract
