#include <benchmark/benchmark.h>

#include "dnfcount/exact.hpp"
#include "dnfcount/generator.hpp"
#include "dnfcount/klm.hpp"
#include "dnfcount/model.hpp"

namespace {

dnfc::WeightedFormula make_instance(int n, int m, int width, uint64_t seed) {
    dnfc::GeneratorConfig cfg;
    cfg.n = n;
    cfg.m = m;
    cfg.min_width = width;
    cfg.max_width = width;
    cfg.seed = seed;
    dnfc::Rng rng = dnfc::Rng::stream(seed, 1);
    return {dnfc::generate_formula(cfg), dnfc::sample_base_distribution(n, rng)};
}

void BM_KlmEstimate(benchmark::State& state) {
    int n = static_cast<int>(state.range(0));
    auto [f, w] = make_instance(n, n / 2, 3, 42);
    dnfc::KlmParams p;
    uint64_t seed = 0;
    for (auto _ : state) {
        p.seed = seed++;
        benchmark::DoNotOptimize(dnfc::klm_estimate(f, w, p));
    }
}
BENCHMARK(BM_KlmEstimate)->Arg(100)->Arg(200)->Arg(400)->Arg(800);

void BM_GnnForward(benchmark::State& state) {
    int n = static_cast<int>(state.range(0));
    auto [f, w] = make_instance(n, n / 2, 3, 42);
    dnfc::nn::ModelConfig cfg;
    cfg.dim = 32;
    dnfc::nn::ModelParams params = dnfc::nn::init_params(cfg, 7);
    for (auto _ : state) {
        benchmark::DoNotOptimize(dnfc::nn::forward(f, w, params));
    }
}
BENCHMARK(BM_GnnForward)->Arg(100)->Arg(200)->Arg(400)->Arg(800);

void BM_ExactEnumeration(benchmark::State& state) {
    int n = static_cast<int>(state.range(0));
    auto [f, w] = make_instance(n, n, 3, 42);
    for (auto _ : state) {
        benchmark::DoNotOptimize(dnfc::exact_wmc_enumeration(f, w));
    }
}
BENCHMARK(BM_ExactEnumeration)->Arg(12)->Arg(16)->Arg(20);

}  // namespace

BENCHMARK_MAIN();
