#pragma once

#include <set>

#include "mesc/grid.hpp"

namespace mesc {

struct PenaltyScale {
    double sigma_nominal = 0.0;
    double sigma_constrained = 0.0;
    double sigma_pooled = 0.0;
};

struct ConstraintReport {
    std::vector<double> feature_zeta;       // length feature_dim
    std::vector<double> transition_zeta;    // indexed by transition_index
    std::vector<double> residual_rewards;   // per transition, omega^R . phi
    WeightVector residual_weights;
    PenaltyScale scale;
};

// Population standard deviations of the reward over all feasible
// transitions, in the nominal and constrained worlds, pooled as
// sqrt((sN^2 + sC^2)/2). Throws when the pooled value is zero.
PenaltyScale pooled_std(const TabularMdp& mdp, const WeightVector& nominal,
                        const WeightVector& constrained);

// sigmoid((r - sigma_pooled) / sigma_pooled)
double transition_constraint_prob(double residual_reward, const PenaltyScale& scale);

// Probability that the feature subset is constrained; the selected residual
// weights are summed when several indices fire together.
double feature_constraint_prob(const WeightVector& residual, const std::vector<int>& indices,
                               const PenaltyScale& scale);

// Full per-feature and per-transition zeta report for a learned residual.
ConstraintReport make_constraint_report(const TabularMdp& mdp, const WeightVector& residual);

// Feature indices whose zeta meets the threshold. The threshold must lie in
// the open interval (0, 1).
std::set<int> binarize_features(const ConstraintReport& report, double zeta_threshold);

// Transition indices whose zeta meets the threshold.
std::set<int> binarize_transitions(const ConstraintReport& report, double zeta_threshold);

} // namespace mesc
