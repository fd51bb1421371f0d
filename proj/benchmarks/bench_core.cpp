// Microbenchmarks for the hot paths: the soft backward pass, the forward
// visitation pass, and one full learner epoch, all at experiment scale
// (9x9 grid, horizon 50).
#include <benchmark/benchmark.h>

#include "mesc/experiments.hpp"
#include "mesc/learner.hpp"

namespace {

mesc::GridSpec reference_spec() {
    mesc::RandomGridParams params;
    params.seed = 3;
    return mesc::random_constrained_grid(params);
}

void bm_soft_backward(benchmark::State& state) {
    mesc::TabularMdp mdp = mesc::build_gridworld(reference_spec());
    for (auto _ : state)
        benchmark::DoNotOptimize(mesc::soft_backward(mdp, mdp.nominal_weights(), mdp.horizon()));
}
BENCHMARK(bm_soft_backward);

void bm_forward_visitation(benchmark::State& state) {
    mesc::TabularMdp mdp = mesc::build_gridworld(reference_spec());
    mesc::SoftPolicy pol = mesc::soft_backward(mdp, mdp.nominal_weights(), mdp.horizon());
    for (auto _ : state)
        benchmark::DoNotOptimize(mesc::forward_visitation(mdp, pol, mdp.horizon()));
}
BENCHMARK(bm_forward_visitation);

void bm_gradient(benchmark::State& state) {
    mesc::GridSpec spec = reference_spec();
    mesc::TabularMdp mdp = mesc::build_gridworld(spec);
    mesc::GroundTruth truth = mesc::make_ground_truth(mdp, spec);
    mesc::DemoSet demos =
        mesc::sample_demonstrations(mdp, truth.constrained_weights, 100, 1);
    mesc::WeightVector residual(mdp.feature_dim());
    for (auto _ : state)
        benchmark::DoNotOptimize(mesc::likelihood_gradient(mdp, demos, residual));
}
BENCHMARK(bm_gradient);

void bm_learn_epoch(benchmark::State& state) {
    mesc::GridSpec spec = reference_spec();
    mesc::TabularMdp mdp = mesc::build_gridworld(spec);
    mesc::GroundTruth truth = mesc::make_ground_truth(mdp, spec);
    mesc::DemoSet demos =
        mesc::sample_demonstrations(mdp, truth.constrained_weights, 100, 1);
    mesc::LearnConfig cfg;
    cfg.epochs = 1;
    for (auto _ : state) benchmark::DoNotOptimize(mesc::mesc_irl(mdp, demos, cfg));
}
BENCHMARK(bm_learn_epoch);

} // namespace

BENCHMARK_MAIN();
