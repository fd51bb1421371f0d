#include "mesc/probability.hpp"

#include <cmath>
#include <stdexcept>

namespace mesc {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double population_std(const TabularMdp& mdp, const WeightVector& w) {
    const auto& trans = mdp.transitions();
    double mean = 0.0;
    for (const Transition& tr : trans) mean += mdp.reward(w, tr.state, tr.action, tr.next_state);
    mean /= static_cast<double>(trans.size());
    double var = 0.0;
    for (const Transition& tr : trans) {
        double dev = mdp.reward(w, tr.state, tr.action, tr.next_state) - mean;
        var += dev * dev;
    }
    return std::sqrt(var / static_cast<double>(trans.size()));
}

} // namespace

PenaltyScale pooled_std(const TabularMdp& mdp, const WeightVector& nominal,
                        const WeightVector& constrained) {
    if (mdp.transitions().size() < 2) throw std::invalid_argument("too few transitions");
    PenaltyScale s;
    s.sigma_nominal = population_std(mdp, nominal);
    s.sigma_constrained = population_std(mdp, constrained);
    s.sigma_pooled = std::sqrt((s.sigma_nominal * s.sigma_nominal +
                                s.sigma_constrained * s.sigma_constrained) / 2.0);
    if (s.sigma_pooled <= 0.0)
        throw std::invalid_argument("degenerate reward landscape: pooled std is zero");
    return s;
}

double transition_constraint_prob(double residual_reward, const PenaltyScale& scale) {
    if (scale.sigma_pooled <= 0.0) throw std::invalid_argument("sigma_pooled must be positive");
    return sigmoid((residual_reward - scale.sigma_pooled) / scale.sigma_pooled);
}

double feature_constraint_prob(const WeightVector& residual, const std::vector<int>& indices,
                               const PenaltyScale& scale) {
    if (indices.empty()) throw std::invalid_argument("empty feature index set");
    double sum = 0.0;
    for (int i : indices) sum += residual[i];
    return transition_constraint_prob(sum, scale);
}

ConstraintReport make_constraint_report(const TabularMdp& mdp, const WeightVector& residual) {
    ConstraintReport rep;
    rep.residual_weights = residual;
    rep.scale = pooled_std(mdp, mdp.nominal_weights(), mdp.nominal_weights() - residual);

    const int k = mdp.feature_dim();
    rep.feature_zeta.resize(k);
    for (int f = 0; f < k; ++f)
        rep.feature_zeta[f] = transition_constraint_prob(residual[f], rep.scale);

    const auto& trans = mdp.transitions();
    rep.residual_rewards.resize(trans.size());
    rep.transition_zeta.resize(trans.size());
    for (std::size_t i = 0; i < trans.size(); ++i) {
        // residual has no goal bonus, so this is plain omega^R . phi
        double r = mdp.reward(residual, trans[i].state, trans[i].action, trans[i].next_state);
        rep.residual_rewards[i] = r;
        rep.transition_zeta[i] = transition_constraint_prob(r, rep.scale);
    }
    return rep;
}

namespace {

std::set<int> binarize(const std::vector<double>& zeta, double threshold) {
    if (threshold <= 0.0 || threshold >= 1.0)
        throw std::invalid_argument("zeta threshold must be in (0, 1)");
    std::set<int> out;
    for (std::size_t i = 0; i < zeta.size(); ++i)
        if (zeta[i] >= threshold) out.insert(static_cast<int>(i));
    return out;
}

} // namespace

std::set<int> binarize_features(const ConstraintReport& report, double zeta_threshold) {
    return binarize(report.feature_zeta, zeta_threshold);
}

std::set<int> binarize_transitions(const ConstraintReport& report, double zeta_threshold) {
    return binarize(report.transition_zeta, zeta_threshold);
}

} // namespace mesc
