#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "xtract/candidates.hpp"
#include "xtract/source_model.hpp"

namespace xtract {

struct FewShotExample {
    std::string method_text;  // numbered lines
    std::string answer;       // JSON array text
};

/// Prompt wording, replaceable through a JSON file with the same keys.
struct PromptTemplate {
    std::string system_preamble;
    std::vector<FewShotExample> few_shot_examples;
    std::string output_contract;
};

[[nodiscard]] const PromptTemplate& default_prompt_template();
/// Reads {system_preamble, few_shot_examples: [{method, answer}], output_contract}.
[[nodiscard]] PromptTemplate load_prompt_template(const std::filesystem::path& path);

struct PromptSpec {
    std::string system_preamble;
    std::vector<FewShotExample> few_shot_examples;
    std::string target;
    std::string output_contract;

    /// Flat rendering used for digests and replay files.
    [[nodiscard]] std::string text() const;
};

struct PromptOptions {
    /// Estimated tokens (4 bytes each); prompts above it are refused.
    std::size_t token_budget = 12000;
};

/// Every line of the method declaration, prefixed with its absolute line number.
[[nodiscard]] std::string numbered_declaration(const MethodModel& model);

/// Throws Error(method_too_large) when the prompt exceeds the budget.
[[nodiscard]] PromptSpec build_prompt(const MethodModel& model, const PromptTemplate& tmpl = default_prompt_template(),
                                      const PromptOptions& options = {});

struct ProviderConfig {
    std::string endpoint = "https://api.openai.com/v1/chat/completions";
    std::string model_name = "gpt-3.5-turbo";
    double temperature = 1.0;
    int iterations = 5;
    int max_parallel = 5;
    std::chrono::milliseconds timeout{30000};
    /// Name of the environment variable holding the key; the key itself is
    /// never stored in configuration.
    std::string api_key_env = "OPENAI_API_KEY";

    /// Throws Error(invalid_config).
    void validate() const;
};

/// Stable over prompt text, model name and temperature only.
[[nodiscard]] std::string request_digest(const PromptSpec& prompt, const ProviderConfig& config);

struct ParsedCompletion {
    std::vector<Suggestion> suggestions;  // state raw, ids from 0
    std::vector<std::string> diagnostics;
};

/// Total: never throws, whatever the text.
[[nodiscard]] ParsedCompletion parse_completion(std::string_view raw_text);

struct CompletionRecord {
    std::string request_digest;
    int iteration = 0;
    std::string raw_text;
    std::vector<Suggestion> parsed;
    /// Parse problems, or the call failure when `failed`.
    std::vector<std::string> diagnostics;
    bool failed = false;
};

struct Completion {
    std::optional<std::string> text;
    std::string error;  // set when text is empty
};

/// One language-model backend. complete() may be called from several threads.
class Provider {
public:
    virtual ~Provider() = default;
    [[nodiscard]] virtual std::string name() const = 0;
    [[nodiscard]] virtual Completion complete(const PromptSpec& prompt, const ProviderConfig& config,
                                              const std::string& digest, int iteration) = 0;
    /// Called once per sample() with the records in iteration order.
    virtual void sampled(const PromptSpec& prompt, const std::string& digest,
                         const std::vector<CompletionRecord>& records);
};

/// Runs config.iterations completions with at most config.max_parallel in
/// flight. Records come back in iteration order. Throws
/// Error(provider_unreachable) only when every call fails.
[[nodiscard]] std::vector<CompletionRecord> sample(Provider& provider, const PromptSpec& prompt,
                                                   const ProviderConfig& config);

/// Serves completions from {digest, prompt_text, completions} files named
/// <digest>.json. Safe for concurrent use.
class ReplayProvider : public Provider {
public:
    explicit ReplayProvider(std::filesystem::path dir);
    [[nodiscard]] std::string name() const override { return "replay"; }
    [[nodiscard]] Completion complete(const PromptSpec& prompt, const ProviderConfig& config,
                                      const std::string& digest, int iteration) override;

private:
    std::filesystem::path dir_;
};

/// Forwards to another provider and writes what it returned as a replay file.
class RecordingProvider : public Provider {
public:
    RecordingProvider(Provider& inner, std::filesystem::path dir);
    [[nodiscard]] std::string name() const override { return "record:" + inner_.name(); }
    [[nodiscard]] Completion complete(const PromptSpec& prompt, const ProviderConfig& config,
                                      const std::string& digest, int iteration) override;
    void sampled(const PromptSpec& prompt, const std::string& digest,
                 const std::vector<CompletionRecord>& records) override;

private:
    Provider& inner_;
    std::filesystem::path dir_;
};

/// OpenAI-compatible chat-completions endpoint.
class OpenAiProvider : public Provider {
public:
    [[nodiscard]] std::string name() const override { return "openai"; }
    [[nodiscard]] Completion complete(const PromptSpec& prompt, const ProviderConfig& config,
                                      const std::string& digest, int iteration) override;
};

/// Chat messages for an OpenAI-compatible request body.
[[nodiscard]] std::string chat_request_body(const PromptSpec& prompt, const ProviderConfig& config);

[[nodiscard]] std::filesystem::path replay_file(const std::filesystem::path& dir, const std::string& digest);

}  // namespace xtract
