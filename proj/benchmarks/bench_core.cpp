#include <benchmark/benchmark.h>

#include "plattice/coupling.hpp"
#include "plattice/discriminators.hpp"
#include "plattice/greedy.hpp"
#include "plattice/law.hpp"
#include "plattice/process.hpp"

using namespace plattice;

namespace {

void BM_SiteRngBits(benchmark::State& state) {
    const SiteRng rng(17, 0);
    Site s = Site::zero(3);
    std::uint64_t acc = 0;
    int i = 0;
    for (auto _ : state) {
        s.c[0] = ++i;
        acc ^= rng.bits64(s, 0);
    }
    benchmark::DoNotOptimize(acc);
}
BENCHMARK(BM_SiteRngBits);

void BM_SampleGaussian3d(benchmark::State& state) {
    const auto law = PerturbationLaw::make_gaussian(1.0, 3);
    const SiteRng rng(17, 0);
    Site s = Site::zero(3);
    int i = 0;
    double acc = 0;
    for (auto _ : state) {
        s.c[0] = ++i;
        acc += sample(law, s, rng)[0];
    }
    benchmark::DoNotOptimize(acc);
}
BENCHMARK(BM_SampleGaussian3d);

void BM_SampleCauchy(benchmark::State& state) {
    const auto law = PerturbationLaw::make_stable(1.0, 1.0);
    const SiteRng rng(17, 0);
    Site s = Site::zero(1);
    int i = 0;
    double acc = 0;
    for (auto _ : state) {
        s.c[0] = ++i;
        acc += sample(law, s, rng)[0];
    }
    benchmark::DoNotOptimize(acc);
}
BENCHMARK(BM_SampleCauchy);

void BM_RealizeCauchyWindow(benchmark::State& state) {
    ProcessSpec spec;
    spec.law = PerturbationLaw::make_stable(1.0, 1.0);
    Window w;
    w.dim = 1;
    w.radius = state.range(0);
    w.margin = 4 * state.range(0);
    for (auto _ : state) {
        const auto cfg = realize(spec, w, SiteRng(17, 0));
        benchmark::DoNotOptimize(cfg.size());
    }
    state.SetItemsProcessed(state.iterations() * (2 * (w.radius + w.margin) + 1));
}
BENCHMARK(BM_RealizeCauchyWindow)->Arg(1000)->Arg(10000);

void BM_PsiKernel(benchmark::State& state) {
    ProcessSpec spec;
    spec.law = PerturbationLaw::make_stable(1.0, 1.0);
    Window w;
    w.dim = 1;
    w.radius = 20000;
    w.margin = 40000;
    const auto cfg = realize(spec, w, SiteRng(17, 0)).blind();
    for (auto _ : state) benchmark::DoNotOptimize(psi(cfg, 4096.0));
    state.SetItemsProcessed(state.iterations() * cfg.size());
}
BENCHMARK(BM_PsiKernel);

void BM_BinomialShiftTv(benchmark::State& state) {
    for (auto _ : state)
        benchmark::DoNotOptimize(binomial_shift_tv(state.range(0), 1.0 / 3.0).tv);
}
BENCHMARK(BM_BinomialShiftTv)->Arg(1000)->Arg(1000000);

void BM_CouplingTranscript(benchmark::State& state) {
    const auto law = PerturbationLaw::make_power_tail(1.5, 1);
    const auto ann = build_annuli(1, 12);
    const auto mix = mixture_table(law, ann);
    std::uint64_t r = 0;
    for (auto _ : state) {
        const auto tr = run_coupling(ann, mix, SiteRng(derive_seed(17, ++r), 0));
        benchmark::DoNotOptimize(tr.success);
    }
}
BENCHMARK(BM_CouplingTranscript);

void BM_ChainStatisticDeleted(benchmark::State& state) {
    ProcessSpec spec;
    spec.law = PerturbationLaw::make_gaussian(0.05, 3);
    Window w;
    w.dim = 3;
    w.radius = state.range(0);
    w.margin = 1;
    const auto cfg =
        realize(delete_sites(spec, {Site::zero(3)}), w, SiteRng(17, 0)).blind();
    for (auto _ : state)
        benchmark::DoNotOptimize(chain_displacement_statistic(cfg, int(w.radius / 2)).value);
}
BENCHMARK(BM_ChainStatisticDeleted)->Arg(12)->Arg(30);

}  // namespace

BENCHMARK_MAIN();
