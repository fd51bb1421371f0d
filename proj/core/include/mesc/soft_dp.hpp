#pragma once

#include "mesc/grid.hpp"

namespace mesc {

// Time-indexed maximum-causal-entropy policy: pi(t,s,a) = exp(q - v) with
// v the logsumexp of q over the state's available actions.
struct SoftPolicy {
    int horizon = 0;
    int num_states = 0;

    // Flat layout [t * S * 8 + s * 8 + action_index]; unused slots stay 0.
    std::vector<double> q;
    std::vector<double> pi;
    std::vector<double> v; // [t * S + s], t in [0, horizon]

    double& q_at(int t, int s, int ai) { return q[(static_cast<std::size_t>(t) * num_states + s) * kNumActions + ai]; }
    double q_at(int t, int s, int ai) const { return q[(static_cast<std::size_t>(t) * num_states + s) * kNumActions + ai]; }
    double& pi_at(int t, int s, int ai) { return pi[(static_cast<std::size_t>(t) * num_states + s) * kNumActions + ai]; }
    double pi_at(int t, int s, int ai) const { return pi[(static_cast<std::size_t>(t) * num_states + s) * kNumActions + ai]; }
    double& v_at(int t, int s) { return v[static_cast<std::size_t>(t) * num_states + s]; }
    double v_at(int t, int s) const { return v[static_cast<std::size_t>(t) * num_states + s]; }
};

// Expected transition-visitation frequencies under a policy.
struct VisitationTable {
    std::vector<double> d;   // indexed by TabularMdp::transition_index
    std::vector<double> rho; // [t * S + s], state occupancy per timestep
};

// Backward soft value iteration from t = horizon-1 down to 0 with
// v(horizon, .) = 0; logsumexp is max-shifted.
SoftPolicy soft_backward(const TabularMdp& mdp, const WeightVector& w, int horizon);

// Forward pass: rho(0,.) = start distribution, propagated through pi and P;
// d aggregates rho * pi * P over timesteps.
VisitationTable forward_visitation(const TabularMdp& mdp, const SoftPolicy& policy, int horizon);

// Exact log-probability of tau under the causal factorization
// sum_t [log pi(t,s_t,a_t) + log P(s_{t+1}|s_t,a_t)]. Trajectories ending at
// the goal before the horizon are absorbed with probability 1 thereafter
// (zero contribution). Returns -infinity for infeasible transitions.
double trajectory_log_prob(const TabularMdp& mdp, const SoftPolicy& policy, const Trajectory& tau);

// Mean of trajectory_features over the demo set; throws on an empty set.
std::vector<double> empirical_feature_expectation(const TabularMdp& mdp, const DemoSet& demos);

// Feature expectation under the model: sum over transitions of d * phi.
std::vector<double> model_feature_expectation(const TabularMdp& mdp, const VisitationTable& visits);

} // namespace mesc
