#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "xtract/provider.hpp"

namespace xtract {

struct AppConfig {
    ProviderConfig provider;
    /// "openai", "replay" or "record" (live calls written to fixture_dir).
    std::string provider_kind = "openai";
    int top_n = 3;
    double tolerance = 0.03;
    int k = 5;
    std::optional<std::filesystem::path> prompt_file;
    std::optional<std::filesystem::path> fixture_dir;
    std::string host = "127.0.0.1";
    int port = 8765;
    /// The service reads and writes files below this directory only.
    std::filesystem::path root = ".";

    /// Throws Error(invalid_config).
    void validate() const;
};

/// Values that were given on the command line; unset fields keep what the
/// file and environment produced.
struct ConfigOverrides {
    std::optional<std::string> provider_kind;
    std::optional<std::string> model;
    std::optional<std::string> endpoint;
    std::optional<double> temperature;
    std::optional<int> iterations;
    std::optional<int> max_parallel;
    std::optional<int> timeout_ms;
    std::optional<int> top_n;
    std::optional<double> tolerance;
    std::optional<int> k;
    std::optional<std::filesystem::path> prompt_file;
    std::optional<std::filesystem::path> fixture_dir;
    std::optional<std::string> host;
    std::optional<int> port;
    std::optional<std::filesystem::path> root;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

/// std::getenv.
[[nodiscard]] std::optional<std::string> process_env(const std::string& name);

/// JSON object with the keys documented in the README. An "api_key" key is
/// refused: keys come from the environment only.
void apply_config_file(AppConfig& config, const std::filesystem::path& path);
/// XTRACT_* variables.
void apply_env(AppConfig& config, const EnvLookup& env);
void apply_overrides(AppConfig& config, const ConfigOverrides& overrides);

/// Defaults < file < environment < overrides, then validated.
[[nodiscard]] AppConfig resolve_config(const std::optional<std::filesystem::path>& file, const EnvLookup& env,
                                       const ConfigOverrides& overrides);

/// The configured provider, wrapping a recorder when asked to.
class ProviderStack {
public:
    explicit ProviderStack(const AppConfig& config);
    [[nodiscard]] Provider& get() { return *outer_; }

private:
    std::unique_ptr<Provider> inner_;
    std::unique_ptr<Provider> outer_;
};

[[nodiscard]] PromptTemplate prompt_template(const AppConfig& config);

}  // namespace xtract
