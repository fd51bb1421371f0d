#include "mesc/learner.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mesc {

void LearnConfig::validate() const {
    if (learning_rate < 0.0) throw std::invalid_argument("learning_rate must be nonnegative");
    if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (l2_penalty < 0.0) throw std::invalid_argument("l2_penalty must be nonnegative");
}

namespace {

// Per-timestep demo counts n(t,s,a-index) and n(t,s), recorded transitions only.
struct DemoCounts {
    int horizon;
    int num_states;
    std::vector<double> n_sa; // [t*S*8 + s*8 + ai]
    std::vector<double> n_s;  // [t*S + s]
};

DemoCounts count_demos(const TabularMdp& mdp, const DemoSet& demos) {
    DemoCounts c;
    c.horizon = mdp.horizon();
    c.num_states = mdp.num_states();
    c.n_sa.assign(static_cast<std::size_t>(c.horizon) * c.num_states * kNumActions, 0.0);
    c.n_s.assign(static_cast<std::size_t>(c.horizon) * c.num_states, 0.0);
    for (const Trajectory& tau : demos) {
        if (tau.size() > static_cast<std::size_t>(c.horizon))
            throw std::invalid_argument("demo longer than horizon");
        int t = 0;
        for (const Step& st : tau.steps) {
            int ai = mdp.action_index(st.state, st.action);
            if (ai < 0 || mdp.transition_prob(st.state, st.action, st.next_state) <= 0.0)
                throw std::invalid_argument("demo contains infeasible transition");
            c.n_sa[(static_cast<std::size_t>(t) * c.num_states + st.state) * kNumActions + ai] += 1.0;
            c.n_s[static_cast<std::size_t>(t) * c.num_states + st.state] += 1.0;
            ++t;
        }
    }
    return c;
}

// Gradient of sum_demos log P(tau | omega^C) with respect to omega^C.
//
// d/dw log pi(t,s,a) = F(t,s,a) - sum_a' pi F(t,s,a') with
// F(t,s,a) = sum_s' P [phi + gamma * dV(t+1,s')]. Expanding the recursion
// turns the demo counts into a forward flow of correction mass nu(t,s); each
// effective mass m(t,s,a) contributes its expected successor features.
std::vector<double> gradient_wrt_constrained(const TabularMdp& mdp, const SoftPolicy& policy,
                                             const DemoCounts& counts) {
    const int S = mdp.num_states();
    const int T = policy.horizon;
    const double gamma = mdp.discount();
    std::vector<double> grad(mdp.feature_dim(), 0.0);
    std::vector<double> nu(S, 0.0), nu_next(S, 0.0);

    for (int t = 0; t < T; ++t) {
        std::fill(nu_next.begin(), nu_next.end(), 0.0);
        const bool have_counts = t < counts.horizon;
        for (int s = 0; s < S; ++s) {
            double ns = have_counts ? counts.n_s[static_cast<std::size_t>(t) * S + s] : 0.0;
            double flow = nu[s];
            if (ns == 0.0 && flow == 0.0) continue;
            const auto& avail = mdp.available_actions(s);
            for (int ai = 0; ai < static_cast<int>(avail.size()); ++ai) {
                double nsa = have_counts
                    ? counts.n_sa[(static_cast<std::size_t>(t) * S + s) * kNumActions + ai]
                    : 0.0;
                double m = nsa + (gamma * flow - ns) * policy.pi_at(t, s, ai);
                if (m == 0.0) continue;
                for (auto [s2, p] : mdp.successors(s, ai)) {
                    double mass = m * p;
                    auto ph = mdp.phi(s, avail[ai], s2);
                    for (int j = 0; j < ph.count; ++j) grad[ph.idx[j]] += mass;
                    nu_next[s2] += mass;
                }
            }
        }
        std::swap(nu, nu_next);
    }
    return grad;
}

} // namespace

std::vector<double> likelihood_gradient(const TabularMdp& mdp, const DemoSet& demos,
                                        const WeightVector& residual) {
    if (demos.empty()) throw std::invalid_argument("empty demonstration set");
    WeightVector constrained = mdp.nominal_weights() - residual;
    SoftPolicy policy = soft_backward(mdp, constrained, mdp.horizon());
    DemoCounts counts = count_demos(mdp, demos);
    std::vector<double> grad = gradient_wrt_constrained(mdp, policy, counts);
    // grad w.r.t. omega^R is the negation of the omega^C gradient; report the
    // per-demo mean.
    const double scale = -1.0 / static_cast<double>(demos.size());
    for (double& g : grad) g *= scale;
    return grad;
}

LearnResult mesc_irl(const TabularMdp& mdp, const DemoSet& demos, const LearnConfig& config,
                     const EpochCallback& checkpoint) {
    config.validate();
    if (demos.empty()) throw std::invalid_argument("empty demonstration set");
    for (const Trajectory& tau : demos) mdp.validate_trajectory(tau);

    const int k = mdp.feature_dim();
    WeightVector residual = config.init_residual.size() == 0 ? WeightVector(k)
                                                             : config.init_residual;
    if (residual.size() != static_cast<std::size_t>(k))
        throw std::invalid_argument("init_residual dimension mismatch");
    residual.goal_bonus = 0.0; // the goal bonus is part of the known nominal reward

    DemoCounts counts = count_demos(mdp, demos);
    LearnResult result;
    if (checkpoint) checkpoint(0, residual);

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        WeightVector constrained = mdp.nominal_weights() - residual;
        SoftPolicy policy = soft_backward(mdp, constrained, mdp.horizon());

        double ll = 0.0;
        for (const Trajectory& tau : demos) ll += trajectory_log_prob(mdp, policy, tau);
        if (!std::isfinite(ll))
            throw DivergenceError("log-likelihood became non-finite at epoch " +
                                  std::to_string(epoch));

        std::vector<double> grad = gradient_wrt_constrained(mdp, policy, counts);
        const double scale = -1.0 / static_cast<double>(demos.size());
        double norm2 = 0.0;
        for (int i = 0; i < k; ++i) {
            grad[i] *= scale;
            norm2 += grad[i] * grad[i];
        }
        result.log_likelihood_trace.push_back(ll);
        result.gradient_norm_trace.push_back(std::sqrt(norm2));

        for (int i = 0; i < k; ++i)
            residual[i] += config.learning_rate * (grad[i] - config.l2_penalty * residual[i]);
        if (checkpoint) checkpoint(epoch, residual);
    }

    result.residual_weights = residual;
    result.constrained_weights = mdp.nominal_weights() - residual;
    return result;
}

} // namespace mesc
