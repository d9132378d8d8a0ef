#include <benchmark/benchmark.h>

#include "inspecta/cluster.hpp"
#include "inspecta/features.hpp"
#include "inspecta/loss.hpp"
#include "inspecta/metrics.hpp"
#include "inspecta/rng.hpp"
#include "inspecta/syngen.hpp"

using namespace inspecta;

namespace {

Image bench_image(int size, std::uint64_t seed) {
    const syngen::PartSpec spec = syngen::uniform_part_spec(size);
    return syngen::gen_part(spec, size, seed);
}

std::vector<ScoredLabel> bench_scores(int n) {
    Rng rng(17);
    std::vector<ScoredLabel> scored;
    for (int i = 0; i < n; ++i) {
        scored.push_back({"i" + std::to_string(i), rng.next_unit(),
                          rng.next_unit() < 0.5 ? Label::ng : Label::ok});
    }
    scored[0].truth = Label::ng;
    scored[1].truth = Label::ok;
    return scored;
}

}  // namespace

static void BM_ExtractFeatures128(benchmark::State& state) {
    const Image image = bench_image(128, 1);
    const FeatureConfig config;
    for (auto _ : state) {
        benchmark::DoNotOptimize(extract_features(image, config));
    }
}
BENCHMARK(BM_ExtractFeatures128);

static void BM_Auc(benchmark::State& state) {
    const auto scored = bench_scores(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(auc(scored));
    }
}
BENCHMARK(BM_Auc)->Arg(100)->Arg(10000);

static void BM_FocalGrad(benchmark::State& state) {
    Rng rng(3);
    const FocalLossParams params{0.25, 2.0};
    double z = -4.0;
    for (auto _ : state) {
        z = z > 4.0 ? -4.0 : z + 1e-4;
        benchmark::DoNotOptimize(focal_loss_grad(z, 1, params));
    }
}
BENCHMARK(BM_FocalGrad);

static void BM_WardAgglomerate(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Rng rng(11);
    std::vector<std::vector<double>> features;
    std::vector<std::string> ids;
    for (int i = 0; i < n; ++i) {
        features.push_back({rng.next_unit(), rng.next_unit(), rng.next_unit()});
        ids.push_back("p" + std::to_string(i));
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(agglomerate(features, ids, 3));
    }
}
BENCHMARK(BM_WardAgglomerate)->Arg(64)->Arg(256);

static void BM_GenPart(benchmark::State& state) {
    const syngen::PartSpec spec = syngen::uniform_part_spec(128);
    std::uint64_t seed = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(syngen::gen_part(spec, 128, seed++));
    }
}
BENCHMARK(BM_GenPart);

static void BM_ApplyDefect(benchmark::State& state) {
    const syngen::PartSpec spec = syngen::uniform_part_spec(128);
    const syngen::Mask mask = syngen::rasterize_part(spec, 128);
    const Image image = syngen::gen_part(spec, 128, 9);
    syngen::DefectSpec defect;
    std::uint64_t seed = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(syngen::apply_defect(image, mask, defect, seed++));
    }
}
BENCHMARK(BM_ApplyDefect);

static void BM_CurationFeatures(benchmark::State& state) {
    const Image image = bench_image(128, 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(curation_features(image));
    }
}
BENCHMARK(BM_CurationFeatures);

BENCHMARK_MAIN();
