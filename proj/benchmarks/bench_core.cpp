#include <benchmark/benchmark.h>

#include <random>

#include "qje/analysis.hpp"
#include "qje/evolution.hpp"
#include "qje/protocol.hpp"
#include "qje/readout.hpp"
#include "qje/thermo.hpp"

using namespace qje;

namespace {

Mat3 random_hermitian(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Mat3 h;
    for (int i = 0; i < 3; ++i) h(i, i) = u(rng);
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) {
            const cx v{u(rng), u(rng)};
            h(i, j) = v;
            h(j, i) = std::conj(v);
        }
    return h;
}

void BM_eigh(benchmark::State& state) {
    std::mt19937_64 rng(1);
    const Mat3 h = random_hermitian(rng);
    for (auto _ : state) benchmark::DoNotOptimize(eigh(h));
}
BENCHMARK(BM_eigh);

void BM_expm_step(benchmark::State& state) {
    const Schedule s{kLambdaDefault, 200e-6, RampKind::tent};
    const Mat3 h = h_of_t(70e-6, s);
    for (auto _ : state) benchmark::DoNotOptimize(expm_minus_iH_dt(h, 1e-8));
}
BENCHMARK(BM_expm_step);

void BM_propagate(benchmark::State& state) {
    const Schedule s{kLambdaDefault, 200e-6, RampKind::tent};
    const long n = state.range(0);
    for (auto _ : state) benchmark::DoNotOptimize(propagate(s, n));
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_propagate)->Arg(1000)->Arg(10000);

void BM_je_check(benchmark::State& state) {
    const Schedule s{kLambdaDefault, 200e-6, RampKind::tent};
    const double beta = 0.5 / std::abs(s.lambda);
    for (auto _ : state) benchmark::DoNotOptimize(je_check(s, beta, 4000));
}
BENCHMARK(BM_je_check);

void BM_adiabaticity(benchmark::State& state) {
    const Schedule s{kLambdaDefault, 200e-6, RampKind::tent};
    for (auto _ : state) benchmark::DoNotOptimize(adiabaticity_factor(s, 10001));
}
BENCHMARK(BM_adiabaticity);

void BM_noisy_joint(benchmark::State& state) {
    const Schedule s{kLambdaDefault, 200e-6, RampKind::tent};
    const double beta = 0.7 / std::abs(s.lambda);
    const auto p0 = gibbs_populations(eigh(h_of_t(0.0, s)), beta);
    const ConditionalMatrix cond =
        tpm_conditional(propagate(s, 4000).unitary, h_of_t(0.0, s), h_of_t(s.tau, s));
    const MeasurementChannel ch = measurement_channel(jump_model_from_fidelity(0.98));
    for (auto _ : state) benchmark::DoNotOptimize(noisy_joint_distribution(p0, cond, ch, true));
}
BENCHMARK(BM_noisy_joint);

void BM_fit_beta(benchmark::State& state) {
    const Mat3 h0 = cx{kLambdaDefault, 0.0} * spin1_operator(Axis::z);
    const auto pops = gibbs_populations(eigh(h0), 0.5 / std::abs(kLambdaDefault));
    for (auto _ : state) benchmark::DoNotOptimize(fit_beta(pops, h0));
}
BENCHMARK(BM_fit_beta);

void BM_simulate_trace(benchmark::State& state) {
    const TraceModel model;
    for (auto _ : state)
        benchmark::DoNotOptimize(simulate_trace(model, 10000, +1, +1, 42));
}
BENCHMARK(BM_simulate_trace);

}  // namespace

BENCHMARK_MAIN();
