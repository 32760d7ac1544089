#include <benchmark/benchmark.h>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "scratch.hpp"
#include "xtract/candidates.hpp"
#include "xtract/pipeline.hpp"

namespace {

using namespace xtract;

constexpr int kLines = 500;

const std::string& long_text()
{
    static const std::string text = testing::generate_long_method(kLines, 1);
    return text;
}

MethodModel long_method(const SourceUnit& unit) { return locate_method(unit, MethodLocator{std::string("longMethod")}); }

std::vector<std::string> completions()
{
    std::vector<std::string> out;
    for (int c = 0; c < 5; ++c) {
        nlohmann::json answer = nlohmann::json::array();
        for (int i = 0; i < 20; ++i) {
            int a = 9 + (c * 97 + i * 23) % (kLines - 20);
            answer.push_back({{"function_name", "part" + std::to_string(i)}, {"line_start", a}, {"line_end", a + i % 15}});
        }
        out.push_back(answer.dump());
    }
    return out;
}

void BM_Parse(benchmark::State& state)
{
    for (auto _ : state) benchmark::DoNotOptimize(parse_unit(long_text(), "Long.java"));
}
BENCHMARK(BM_Parse)->Unit(benchmark::kMillisecond);

void BM_LocateMethod(benchmark::State& state)
{
    auto unit = parse_unit(long_text(), "Long.java");
    for (auto _ : state) benchmark::DoNotOptimize(long_method(unit));
}
BENCHMARK(BM_LocateMethod)->Unit(benchmark::kMillisecond);

void BM_Analysis(benchmark::State& state)
{
    auto unit = parse_unit(long_text(), "Long.java");
    auto m = long_method(unit);
    for (auto _ : state) benchmark::DoNotOptimize(MethodAnalysis(m));
}
BENCHMARK(BM_Analysis)->Unit(benchmark::kMillisecond);

void BM_ValidateAllSiblingRuns(benchmark::State& state)
{
    auto unit = parse_unit(long_text(), "Long.java");
    auto m = long_method(unit);
    MethodAnalysis a(m);
    auto runs = testing::all_sibling_runs(m);
    for (auto _ : state) {
        for (const auto& run : runs) benchmark::DoNotOptimize(check_fragment(m, a.cfg, a.live, run));
    }
    state.counters["runs"] = static_cast<double>(runs.size());
}
BENCHMARK(BM_ValidateAllSiblingRuns)->Unit(benchmark::kMillisecond);

void BM_SuggestWithoutProvider(benchmark::State& state)
{
    testing::ListProvider provider(completions());
    for (auto _ : state) {
        auto unit = parse_unit(long_text(), "Long.java");
        auto m = long_method(unit);
        benchmark::DoNotOptimize(suggest(m, provider, ProviderConfig{}, default_prompt_template()));
    }
}
BENCHMARK(BM_SuggestWithoutProvider)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
