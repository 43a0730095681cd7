#include "cid/decision.hpp"
#include "cid/functional.hpp"
#include "cid/graph.hpp"
#include "cid/inference.hpp"
#include "cid/model_io.hpp"
#include "cid/worlds.hpp"

#include <benchmark/benchmark.h>

#include <string>

using namespace cid;

namespace {

Diagram load(const std::string& file) {
    return parse_model(read_text_file(std::string(CID_MODELS_DIR) + "/" + file));
}

// Chain of n binary chance nodes below one decision.
Diagram chain(int n) {
    std::string text = R"({"variables": [{"name": "d", "kind": "decision", "states": ["a", "b"]})";
    std::string arcs, cpts;
    for (int i = 0; i < n; ++i) {
        const std::string x = "x" + std::to_string(i), p = i == 0 ? "d" : "x" + std::to_string(i - 1);
        text += R"(, {"name": ")" + x + R"(", "kind": "chance", "states": ["0", "1"]})";
        arcs += std::string(i ? ", " : "") + "[\"" + p + "\", \"" + x + "\"]";
        const std::string k0 = i == 0 ? "a" : "0", k1 = i == 0 ? "b" : "1";
        cpts += std::string(i ? ", " : "") + "\"" + x + "\": {\"parent_order\": [\"" + p + "\"], \"rows\": {\"" + k0 +
                "\": [0.9, 0.1], \"" + k1 + "\": [0.3, 0.7]}}";
    }
    text += "], \"relevance_arcs\": [" + arcs + "], \"cpts\": {" + cpts + "}, \"annotations\": {\"causal\": true}}";
    return parse_model(text);
}

void BM_MechanismStates(benchmark::State& state) {
    const Variable x{"x", {"0", "1"}};
    std::vector<Variable> parents;
    for (int i = 0; i < state.range(0); ++i) parents.push_back({"p" + std::to_string(i), {"0", "1"}});
    for (auto _ : state) benchmark::DoNotOptimize(enumerate_mechanism_states(x, parents));
}
BENCHMARK(BM_MechanismStates)->DenseRange(1, 3);

void BM_PosteriorChain(benchmark::State& state) {
    const Diagram d = chain(static_cast<int>(state.range(0)));
    const std::string last = "x" + std::to_string(state.range(0) - 1);
    for (auto _ : state)
        benchmark::DoNotOptimize(posterior(d, {{"d", "a"}}, {{last, "1"}}, std::vector<std::string>{"x0"}));
}
BENCHMARK(BM_PosteriorChain)->RangeMultiplier(4)->Range(4, 256);

void BM_MinimalBlockingSets(benchmark::State& state) {
    const Diagram d = load("fig1.json");
    const auto decs = d.decisions();
    const NameSet all(decs.begin(), decs.end());
    for (auto _ : state) benchmark::DoNotOptimize(minimal_blocking_sets(d, all, "utility"));
}
BENCHMARK(BM_MinimalBlockingSets);

void BM_ToHcf(benchmark::State& state) {
    const Diagram d = load("fig1.json");
    for (auto _ : state) benchmark::DoNotOptimize(to_hcf(d));
}
BENCHMARK(BM_ToHcf);

void BM_OracleCauses(benchmark::State& state) {
    const HcfDiagram h = to_hcf(load("fig6a.json"));
    for (auto _ : state) benchmark::DoNotOptimize(oracle_causes(h, "lung cancer"));
}
BENCHMARK(BM_OracleCauses);

void BM_OptimalPolicy(benchmark::State& state) {
    const Diagram d = load("fig1.json");
    for (auto _ : state) benchmark::DoNotOptimize(optimal_policy(d));
}
BENCHMARK(BM_OptimalPolicy);

void BM_Counterfactual(benchmark::State& state) {
    const HcfDiagram h = to_hcf(load("m1.json"));
    const CounterfactualQuery q{{{"smoke", "no"}}, {{"lung cancer", "no"}}, {{"smoke", "yes"}}, {"lung cancer"}};
    for (auto _ : state) benchmark::DoNotOptimize(counterfactual(h, q));
}
BENCHMARK(BM_Counterfactual);

}  // namespace

BENCHMARK_MAIN();
