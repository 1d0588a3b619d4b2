// Microbenchmarks for the hot paths: preshape normalization, kernel
// evaluation, Gram assembly, eigen diagnostics, classifier fit/predict,
// and the extrinsic mean.
//
//   ./benchmarks/bench_core --benchmark_filter=Krrc

#include <benchmark/benchmark.h>

#include "shapekrrc/classifiers.hpp"
#include "shapekrrc/data_io.hpp"
#include "shapekrrc/evaluation.hpp"
#include "shapekrrc/kernels.hpp"

using namespace shapekrrc;

namespace {

constexpr int kLandmarks = 15;

std::vector<Preshape> make_shapes(int n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Preshape> shapes;
    shapes.reserve(n);
    for (int i = 0; i < n; ++i) shapes.push_back(random_preshape(kLandmarks, rng));
    return shapes;
}

LabeledPreshapes make_training_set(int classes, int per_class, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Preshape> templates;
    for (int c = 0; c < classes; ++c) templates.push_back(random_preshape(kLandmarks, rng));
    return generate_synthetic(templates, per_class, 0.05, seed).to_preshapes();
}

void BM_ToPreshape(benchmark::State& state) {
    Rng rng(1);
    ComplexVector z(kLandmarks);
    for (int i = 0; i < kLandmarks; ++i) z[i] = Complex(gaussian(rng), gaussian(rng));
    const LandmarkConfig config{z, 0, "bench"};
    for (auto _ : state) {
        benchmark::DoNotOptimize(to_preshape(config));
    }
}
BENCHMARK(BM_ToPreshape);

void BM_KernelEval(benchmark::State& state) {
    const auto shapes = make_shapes(2, 2);
    const KernelSpec spec(static_cast<KernelFamily>(state.range(0)), 1.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(kernel_eval(spec, shapes[0], shapes[1]));
    }
}
BENCHMARK(BM_KernelEval)
    ->Arg(static_cast<int>(KernelFamily::VWG))
    ->Arg(static_cast<int>(KernelFamily::IntrinsicGaussian));

void BM_Gram(benchmark::State& state) {
    const auto shapes = make_shapes(static_cast<int>(state.range(0)), 3);
    const KernelSpec spec(KernelFamily::VWG, 1.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(gram(spec, shapes));
    }
}
BENCHMARK(BM_Gram)->Arg(50)->Arg(100);

void BM_MinEigenvalue(benchmark::State& state) {
    const auto shapes = make_shapes(static_cast<int>(state.range(0)), 4);
    const GramMatrix g = gram(KernelSpec(KernelFamily::VWG, 1.0), shapes);
    for (auto _ : state) {
        benchmark::DoNotOptimize(min_eigenvalue(g));
    }
}
BENCHMARK(BM_MinEigenvalue)->Arg(50)->Arg(100);

void BM_KrrcFit(benchmark::State& state) {
    const auto train = make_training_set(7, static_cast<int>(state.range(0)), 5);
    const KernelSpec spec(KernelFamily::VWG, 1.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(krrc_fit(train, spec, 1e-3));
    }
}
BENCHMARK(BM_KrrcFit)->Arg(10)->Arg(50)->Arg(100);

void BM_KrrcPredict(benchmark::State& state) {
    const auto train = make_training_set(7, static_cast<int>(state.range(0)), 6);
    const auto model = krrc_fit(train, KernelSpec(KernelFamily::VWG, 1.0), 1e-3);
    Rng rng(7);
    const Preshape query = random_preshape(kLandmarks, rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(krrc_predict(model, query));
    }
}
BENCHMARK(BM_KrrcPredict)->Arg(10)->Arg(50)->Arg(100);

void BM_RrcPredict(benchmark::State& state) {
    const auto train = make_training_set(7, static_cast<int>(state.range(0)), 8);
    const auto model = rrc_fit(train, 1e-3);
    Rng rng(9);
    const Preshape query = random_preshape(kLandmarks, rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(rrc_predict(model, query));
    }
}
BENCHMARK(BM_RrcPredict)->Arg(10)->Arg(50)->Arg(100);

void BM_ExtrinsicMean(benchmark::State& state) {
    const auto shapes = make_shapes(static_cast<int>(state.range(0)), 10);
    for (auto _ : state) {
        benchmark::DoNotOptimize(extrinsic_mean(shapes));
    }
}
BENCHMARK(BM_ExtrinsicMean)->Arg(20)->Arg(100);

void BM_GridSearchCell(benchmark::State& state) {
    const auto train = make_training_set(7, 50, 11);
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            grid_search(train, {1e-3, 1e-1}, {0.1, 1.0}, EvalMethod::VwgKrrc, 1));
    }
}
BENCHMARK(BM_GridSearchCell);

}  // namespace

BENCHMARK_MAIN();
