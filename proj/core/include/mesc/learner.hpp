#pragma once

#include <functional>
#include <stdexcept>

#include "mesc/soft_dp.hpp"

namespace mesc {

struct LearnConfig {
    double learning_rate = 0.05;
    int epochs = 200;
    WeightVector init_residual; // empty means all zeros
    double l2_penalty = 0.0;
    std::uint64_t seed = 0; // recorded in outputs; learning itself is deterministic

    void validate() const;
};

struct LearnResult {
    WeightVector residual_weights;    // omega^R
    WeightVector constrained_weights; // omega^C = omega^N - omega^R
    std::vector<double> log_likelihood_trace;
    std::vector<double> gradient_norm_trace;
};

// Thrown when the log-likelihood turns non-finite (oversized learning rate).
struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Exact gradient of the mean demonstration log-likelihood with respect to
// the residual weights, at omega^C = nominal - residual. Matches central
// finite differences of the causal likelihood for stochastic dynamics too,
// where the plain feature-matching difference only agrees in expectation.
std::vector<double> likelihood_gradient(const TabularMdp& mdp, const DemoSet& demos,
                                        const WeightVector& residual);

// Invoked after each update; epoch is 1-based, and a leading call with
// epoch 0 reports the initial residual.
using EpochCallback = std::function<void(int epoch, const WeightVector& residual)>;

// Gradient ascent on the residual weights. Traces hold one entry per epoch,
// evaluated at the pre-update weights.
LearnResult mesc_irl(const TabularMdp& mdp, const DemoSet& demos, const LearnConfig& config,
                     const EpochCallback& checkpoint = nullptr);

} // namespace mesc
