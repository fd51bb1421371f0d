#pragma once

#include <set>

#include "mesc/probability.hpp"
#include "mesc/soft_dp.hpp"

namespace mesc {

// Ground-truth constraints, as a residual weight vector over the feature
// basis, with the true zeta values derived from it.
struct GroundTruth {
    WeightVector true_residual;      // nonnegative; -cost at each constrained feature
    PenaltyScale scale;              // pooled over nominal and true constrained worlds
    std::vector<double> feature_zeta;
    std::vector<double> transition_zeta; // indexed by transition_index
    std::vector<double> transition_cost; // nonpositive, -(true_residual . phi)

    // True constrained reward weights (nominal - true_residual).
    WeightVector constrained_weights;

    bool feature_constrained(int f) const { return true_residual[f] > 0.0; }
    int num_constrained_features() const;
};

GroundTruth make_ground_truth(const TabularMdp& mdp, const GridSpec& spec);

struct EvalConfig {
    double zeta_threshold = 0.6;
    double chi = 0.2;
    int kl_sample_count = 1000; // rollout count for mean_reward
    double hard_cost = -50.0;   // penalty used when imposing binarized constraints

    void validate() const;
};

// |{x in predicted : truth(x) unconstrained}| / max(1, #truth-constrained).
// Both sides range over feature indices; may exceed 1 and is not clamped.
double false_positive_rate_hard(const std::set<int>& predicted_features, const GroundTruth& truth);

// Soft rate over feature indices per the chi-gap rule.
double false_positive_rate_soft(const ConstraintReport& report, const GroundTruth& truth,
                                double chi);

// Estimated D_KL(P_demo || P_model): mean over demos of
// log(empirical frequency) - trajectory_log_prob. Infinite when a demo is
// infeasible under the model.
double kl_to_demos(const TabularMdp& mdp, const WeightVector& model_weights, const DemoSet& demos);

// Monte Carlo mean ground-truth trajectory reward of `policy` rolled out in
// the true world; deterministic given the seed.
double mean_reward(const TabularMdp& mdp_true, const WeightVector& true_weights,
                   const SoftPolicy& policy, int episodes, std::uint64_t seed);

// Nominal weights plus `cost` on each flagged state feature: the world used
// to score binarized hard-constraint predictions.
WeightVector harden_weights(const TabularMdp& mdp, const std::set<int>& flagged_state_features,
                            double cost);

} // namespace mesc
