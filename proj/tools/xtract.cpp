// xtract: suggest, apply and evaluate Extract Method refactorings for Java.

#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "xtract/atomic_write.hpp"
#include "xtract/config.hpp"
#include "xtract/error.hpp"
#include "xtract/eval.hpp"
#include "xtract/pipeline.hpp"
#include "xtract/service.hpp"

namespace {

using namespace xtract;

enum Exit : int {
    ok = 0,
    internal = 1,
    usage = 2,
    file_not_found = 3,
    parse_failed = 4,
    method_not_found = 5,
    ambiguous_method = 6,
    invalid_range = 7,
    method_too_large = 8,
    provider_unreachable = 9,
    plan_conflict = 10,
    stale_unit = 11,
    render_failed = 12,
    insufficient_samples = 13,
    empty_oracle = 14,
    invalid_config = 15,
};

int exit_code(ErrorCode code)
{
    switch (code) {
    case ErrorCode::io_error: return file_not_found;
    case ErrorCode::parse_error: return parse_failed;
    case ErrorCode::method_not_found: return method_not_found;
    case ErrorCode::ambiguous_method: return ambiguous_method;
    case ErrorCode::empty_range:
    case ErrorCode::not_aligned: return invalid_range;
    case ErrorCode::method_too_large: return method_too_large;
    case ErrorCode::provider_unreachable: return provider_unreachable;
    case ErrorCode::plan_conflict: return plan_conflict;
    case ErrorCode::stale_unit: return stale_unit;
    case ErrorCode::render_error: return render_failed;
    case ErrorCode::insufficient_samples: return insufficient_samples;
    case ErrorCode::empty_oracle: return empty_oracle;
    case ErrorCode::invalid_config: return invalid_config;
    }
    return internal;
}

struct Common {
    std::optional<std::string> config_file;
    ConfigOverrides overrides;
};

void add_common(CLI::App& app, Common& c)
{
    auto& o = c.overrides;
    app.add_option("--config", c.config_file, "JSON config file");
    app.add_option("--provider", o.provider_kind, "openai, replay or record");
    app.add_option("--fixtures", o.fixture_dir, "replay fixture directory");
    app.add_option("--model", o.model, "model name");
    app.add_option("--endpoint", o.endpoint, "chat-completions URL");
    app.add_option("--temperature", o.temperature, "sampling temperature");
    app.add_option("--iterations", o.iterations, "completions per method (1-20)");
    app.add_option("--max-parallel", o.max_parallel, "concurrent provider calls");
    app.add_option("--timeout-ms", o.timeout_ms, "per-call timeout");
    app.add_option("--prompt", o.prompt_file, "prompt template JSON");
}

AppConfig config_from(const Common& c)
{
    std::optional<std::filesystem::path> file;
    if (c.config_file) file = *c.config_file;
    return resolve_config(file, process_env, c.overrides);
}

int cmd_suggest(const Common& common, const std::string& file, const std::string& method, bool as_json)
{
    AppConfig config = config_from(common);
    auto unit = load_unit(file);
    auto model = locate_method(unit, MethodLocator::parse(method));
    ProviderStack providers(config);
    PipelineOptions options;
    options.top_n = config.top_n;
    auto result = suggest(model, providers.get(), config.provider, prompt_template(config), options);
    std::cout << (as_json ? to_json(result) : to_text(result));
    return ok;
}

int cmd_apply(const std::string& file, const std::string& range_text, const std::string& name,
              const std::optional<std::string>& method, bool in_place)
{
    auto range = parse_line_range(range_text);
    if (!range) {
        std::cerr << "xtract: '" << range_text << "' is not a line range (expected FIRST-LAST)\n";
        return usage;
    }
    auto unit = load_unit(file);
    auto model = locate_method(unit, method ? MethodLocator::parse(*method) : MethodLocator{range->first});
    auto outcome = extract_range(unit, model, *range, name);
    if (!outcome.result) {
        const auto& s = outcome.suggestion;
        std::cerr << "xtract: " << to_string(s.reason->category) << ": " << s.reason->detail << "\n";
        return invalid_range;
    }
    if (in_place) {
        write_file_atomically(file, outcome.result->new_text);
        std::cerr << "extracted " << outcome.plan->signature() << " from lines " << to_string(outcome.plan->lines)
                  << "\n";
    } else {
        std::cout << outcome.result->script.diff;
    }
    return ok;
}

struct EvalArgs {
    std::string oracle;
    std::optional<std::string> source;  // defaults to dump when --dump is given, else live
    std::optional<std::string> dump;
    std::optional<int> k;
    std::optional<double> tolerance;
    int runs = 1;
    std::optional<double> baseline;
    bool json = false;
    std::optional<std::string> report;
};

int cmd_eval(const Common& common, const EvalArgs& a)
{
    Common c = common;
    if (a.k) c.overrides.k = a.k;
    if (a.tolerance) c.overrides.tolerance = a.tolerance;
    AppConfig config = config_from(c);

    auto loaded = load_oracle(a.oracle);
    for (const auto& d : loaded.diagnostics) std::cerr << "skipped " << d << "\n";
    const auto& loc = loaded.host_loc;
    std::cerr << loc.count << " oracle entries; host LOC min/max/mean/median " << loc.min << "/" << loc.max << "/"
              << loc.mean << "/" << loc.median << "\n";

    std::unique_ptr<ProviderStack> providers;
    std::unique_ptr<SuggestionSource> source;
    const std::string kind = a.source.value_or(a.dump ? "dump" : "live");
    if (kind == "dump") {
        if (!a.dump) throw Error(ErrorCode::invalid_config, "--source dump needs --dump FILE");
        source = std::make_unique<DumpSource>(DumpSource::load(*a.dump));
    } else if (kind == "live") {
        providers = std::make_unique<ProviderStack>(config);
        source = std::make_unique<PipelineSource>(providers->get(), config.provider, prompt_template(config));
    } else {
        throw Error(ErrorCode::invalid_config, "--source must be live or dump");
    }
    if (a.runs > 1 && !a.baseline) throw Error(ErrorCode::invalid_config, "--runs above 1 needs --baseline");

    EvalOptions options{config.k, config.tolerance};
    EvalReport report = evaluate(loaded.entries, *source, options);
    std::vector<double> recalls{report.recall};
    for (int i = 1; i < a.runs; ++i) recalls.push_back(evaluate(loaded.entries, *source, options).recall);
    if (a.baseline && a.runs > 1) report.stats = repeated_stats(recalls, *a.baseline);

    if (a.report) write_file_atomically(*a.report, report_json(report) + "\n");
    std::cout << (a.json ? report_json(report) + "\n" : report_table(report));
    return ok;
}

Service* g_service = nullptr;

void on_signal(int)
{
    if (g_service) g_service->stop();
}

int cmd_serve(const Common& common, std::optional<std::string> host, std::optional<int> port,
              std::optional<std::string> root)
{
    Common c = common;
    if (host) c.overrides.host = host;
    if (port) c.overrides.port = port;
    if (root) c.overrides.root = *root;
    AppConfig config = config_from(c);
    ProviderStack providers(config);
    Service service(config, providers.get());
    int bound = service.bind();
    g_service = &service;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cerr << "serving " << std::filesystem::weakly_canonical(config.root).string() << " on http://" << config.host
              << ":" << bound << "\n";
    service.listen();
    g_service = nullptr;
    return ok;
}

// Replays a hand-written list of completions through the recorder so that
// the fixture is keyed exactly like a live run.
class ListProvider : public Provider {
public:
    explicit ListProvider(std::vector<std::string> texts) : texts_(std::move(texts)) {}
    std::string name() const override { return "list"; }
    Completion complete(const PromptSpec&, const ProviderConfig&, const std::string&, int i) override
    {
        return {texts_.at(static_cast<std::size_t>(i)), {}};
    }

private:
    std::vector<std::string> texts_;
};

int cmd_fixture(const Common& common, const std::string& file, const std::string& method,
                const std::string& completions, const std::string& out_dir)
{
    std::ifstream in(completions);
    if (!in) throw Error(ErrorCode::io_error, "cannot read " + completions);
    auto texts = nlohmann::json::parse(in).get<std::vector<std::string>>();
    Common c = common;
    c.overrides.iterations = static_cast<int>(texts.size());
    AppConfig config = config_from(c);
    auto unit = load_unit(file);
    auto model = locate_method(unit, MethodLocator::parse(method));
    ListProvider list(std::move(texts));
    std::filesystem::create_directories(out_dir);
    RecordingProvider recorder(list, out_dir);
    auto prompt = build_prompt(model, prompt_template(config));
    (void)sample(recorder, prompt, config.provider);
    std::cout << replay_file(out_dir, request_digest(prompt, config.provider)).string() << "\n";
    return ok;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Extract Method suggestions for Java"};
    app.require_subcommand(1);
    Common common;
    add_common(app, common);

    std::string file;
    std::string method;
    bool as_json = false;
    auto* suggest_cmd = app.add_subcommand("suggest", "rank Extract Method suggestions for one method");
    suggest_cmd->add_option("file", file, "Java source file")->required();
    suggest_cmd->add_option("method", method, "method name or a line inside it")->required();
    suggest_cmd->add_option("--top-n", common.overrides.top_n, "groups to show");
    suggest_cmd->add_flag("--json", as_json, "print JSON");
    suggest_cmd->fallthrough();

    std::string range;
    std::string name;
    std::optional<std::string> apply_method;
    bool diff = false;
    bool in_place = false;
    auto* apply_cmd = app.add_subcommand("apply", "extract a line range into a new method");
    apply_cmd->add_option("file", file, "Java source file")->required();
    apply_cmd->add_option("range", range, "FIRST-LAST")->required();
    apply_cmd->add_option("name", name, "new method name")->required();
    apply_cmd->add_option("--method", apply_method, "host method (default: the one containing FIRST)");
    auto* diff_flag = apply_cmd->add_flag("--diff", diff, "print a unified diff (default)");
    apply_cmd->add_flag("--in-place", in_place, "rewrite the file")->excludes(diff_flag);
    apply_cmd->fallthrough();

    EvalArgs eval;
    auto* eval_cmd = app.add_subcommand("eval", "Recall@k against an oracle");
    eval_cmd->add_option("oracle", eval.oracle, "oracle JSONL")->required();
    eval_cmd->add_option("--source", eval.source, "live or dump")->check(CLI::IsMember({"live", "dump"}));
    eval_cmd->add_option("--dump", eval.dump, "suggestion dump JSONL");
    eval_cmd->add_option("--k", eval.k, "suggestions considered per entry");
    eval_cmd->add_option("--tolerance", eval.tolerance, "allowed deviation as a share of host LOC");
    eval_cmd->add_option("--runs", eval.runs, "repeat the evaluation")->check(CLI::PositiveNumber);
    eval_cmd->add_option("--baseline", eval.baseline, "recall to t-test against");
    eval_cmd->add_flag("--json", eval.json, "print the JSON report instead of the table");
    eval_cmd->add_option("--report", eval.report, "also write the JSON report here");
    eval_cmd->fallthrough();

    std::optional<std::string> host;
    std::optional<int> port;
    std::optional<std::string> root;
    auto* serve_cmd = app.add_subcommand("serve", "run the local HTTP service");
    serve_cmd->add_option("--host", host, "interface to bind");
    serve_cmd->add_option("--port", port, "port (0 picks one)");
    serve_cmd->add_option("--root", root, "directory the service may read and write");
    serve_cmd->add_option("--top-n", common.overrides.top_n, "groups per session");
    serve_cmd->fallthrough();

    std::string completions;
    std::string out_dir;
    auto* fixture_cmd = app.add_subcommand("fixture", "write a replay fixture from a JSON list of completions");
    fixture_cmd->add_option("file", file, "Java source file")->required();
    fixture_cmd->add_option("method", method, "method name or line")->required();
    fixture_cmd->add_option("completions", completions, "JSON array of completion texts")->required();
    fixture_cmd->add_option("out", out_dir, "fixture directory")->required();
    fixture_cmd->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? ok : usage;
    }

    try {
        if (*suggest_cmd) return cmd_suggest(common, file, method, as_json);
        if (*apply_cmd) return cmd_apply(file, range, name, apply_method, in_place);
        if (*eval_cmd) return cmd_eval(common, eval);
        if (*serve_cmd) return cmd_serve(common, host, port, root);
        if (*fixture_cmd) return cmd_fixture(common, file, method, completions, out_dir);
    } catch (const Error& e) {
        std::cerr << "xtract: " << to_string(e.code()) << ": " << e.what() << "\n";
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "xtract: " << e.what() << "\n";
        return internal;
    }
    return usage;
}
