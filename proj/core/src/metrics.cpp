#include "mesc/metrics.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "mesc/rng.hpp"

namespace mesc {

int GroundTruth::num_constrained_features() const {
    int n = 0;
    for (double w : true_residual.values)
        if (w > 0.0) ++n;
    return n;
}

GroundTruth make_ground_truth(const TabularMdp& mdp, const GridSpec& spec) {
    GroundTruth gt;
    gt.true_residual = WeightVector(mdp.feature_dim());
    for (auto [s, cost] : spec.constrained_states)
        gt.true_residual[mdp.state_feature(s)] = -cost;
    for (auto [a, cost] : spec.constrained_actions)
        gt.true_residual[mdp.action_feature(a)] = -cost;
    for (auto [c, cost] : spec.constrained_colors)
        gt.true_residual[mdp.color_feature(c)] = -cost;

    gt.constrained_weights = mdp.nominal_weights() - gt.true_residual;
    gt.scale = pooled_std(mdp, mdp.nominal_weights(), gt.constrained_weights);

    gt.feature_zeta.resize(mdp.feature_dim());
    for (int f = 0; f < mdp.feature_dim(); ++f)
        gt.feature_zeta[f] = transition_constraint_prob(gt.true_residual[f], gt.scale);

    const auto& trans = mdp.transitions();
    gt.transition_zeta.resize(trans.size());
    gt.transition_cost.resize(trans.size());
    for (std::size_t i = 0; i < trans.size(); ++i) {
        double r = mdp.reward(gt.true_residual, trans[i].state, trans[i].action,
                              trans[i].next_state);
        gt.transition_cost[i] = -r;
        gt.transition_zeta[i] = transition_constraint_prob(r, gt.scale);
    }
    return gt;
}

void EvalConfig::validate() const {
    if (zeta_threshold <= 0.0 || zeta_threshold >= 1.0)
        throw std::invalid_argument("zeta_threshold must be in (0, 1)");
    if (chi < 0.0 || chi > 1.0) throw std::invalid_argument("chi must be in [0, 1]");
    if (kl_sample_count < 1) throw std::invalid_argument("kl_sample_count must be positive");
}

double false_positive_rate_hard(const std::set<int>& predicted_features,
                                const GroundTruth& truth) {
    int fp = 0;
    for (int f : predicted_features)
        if (!truth.feature_constrained(f)) ++fp;
    return static_cast<double>(fp) /
           static_cast<double>(std::max(1, truth.num_constrained_features()));
}

double false_positive_rate_soft(const ConstraintReport& report, const GroundTruth& truth,
                                double chi) {
    int fp = 0;
    for (std::size_t f = 0; f < report.feature_zeta.size(); ++f)
        if (!truth.feature_constrained(static_cast<int>(f)) &&
            report.feature_zeta[f] - truth.feature_zeta[f] > chi)
            ++fp;
    return static_cast<double>(fp) /
           static_cast<double>(std::max(1, truth.num_constrained_features()));
}

double kl_to_demos(const TabularMdp& mdp, const WeightVector& model_weights,
                   const DemoSet& demos) {
    if (demos.empty()) throw std::invalid_argument("empty demonstration set");
    SoftPolicy policy = soft_backward(mdp, model_weights, mdp.horizon());

    std::map<std::vector<int>, int> freq;
    std::vector<std::vector<int>> keys;
    keys.reserve(demos.size());
    for (const Trajectory& tau : demos) {
        std::vector<int> key;
        key.reserve(tau.size() * 3);
        for (const Step& st : tau.steps) {
            key.push_back(st.state);
            key.push_back(st.action);
            key.push_back(st.next_state);
        }
        ++freq[key];
        keys.push_back(std::move(key));
    }

    const double n = static_cast<double>(demos.size());
    double kl = 0.0;
    for (std::size_t i = 0; i < demos.size(); ++i) {
        double log_emp = std::log(static_cast<double>(freq[keys[i]]) / n);
        double log_model = trajectory_log_prob(mdp, policy, demos[i]);
        if (!std::isfinite(log_model)) return std::numeric_limits<double>::infinity();
        kl += log_emp - log_model;
    }
    return kl / n;
}

double mean_reward(const TabularMdp& mdp_true, const WeightVector& true_weights,
                   const SoftPolicy& policy, int episodes, std::uint64_t seed) {
    if (episodes < 1) throw std::invalid_argument("episodes must be >= 1");
    Rng rng(seed);
    const auto& start = mdp_true.spec.start_distribution;
    const double gamma = mdp_true.discount();
    double total = 0.0;

    for (int ep = 0; ep < episodes; ++ep) {
        int s = start[rng.next_categorical(static_cast<int>(start.size()),
                                           [&](int i) { return start[i].second; })].first;
        double ret = 0.0;
        double disc = 1.0;
        for (int t = 0; t < policy.horizon && s != mdp_true.goal(); ++t) {
            const auto& avail = mdp_true.available_actions(s);
            int ai = rng.next_categorical(static_cast<int>(avail.size()),
                                          [&](int i) { return policy.pi_at(t, s, i); });
            const auto& succ = mdp_true.successors(s, ai);
            int si = rng.next_categorical(static_cast<int>(succ.size()),
                                          [&](int i) { return succ[i].second; });
            int s2 = succ[si].first;
            ret += disc * mdp_true.reward(true_weights, s, avail[ai], s2);
            disc *= gamma;
            s = s2;
        }
        total += ret;
    }
    return total / static_cast<double>(episodes);
}

WeightVector harden_weights(const TabularMdp& mdp, const std::set<int>& flagged_state_features,
                            double cost) {
    WeightVector w = mdp.nominal_weights();
    for (int f : flagged_state_features) {
        if (f < 0 || f >= mdp.num_states())
            throw std::invalid_argument("harden_weights expects state feature indices");
        w[f] += cost;
    }
    return w;
}

} // namespace mesc
