#include "mesc/soft_dp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mesc {

SoftPolicy soft_backward(const TabularMdp& mdp, const WeightVector& w, int horizon) {
    if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    const int S = mdp.num_states();
    const double gamma = mdp.discount();

    SoftPolicy pol;
    pol.horizon = horizon;
    pol.num_states = S;
    pol.q.assign(static_cast<std::size_t>(horizon) * S * kNumActions, 0.0);
    pol.pi.assign(static_cast<std::size_t>(horizon) * S * kNumActions, 0.0);
    pol.v.assign(static_cast<std::size_t>(horizon + 1) * S, 0.0);

    for (int t = horizon - 1; t >= 0; --t) {
        for (int s = 0; s < S; ++s) {
            const auto& avail = mdp.available_actions(s);
            const int na = static_cast<int>(avail.size());
            double qmax = -std::numeric_limits<double>::infinity();
            for (int ai = 0; ai < na; ++ai) {
                double q = 0.0;
                for (auto [s2, p] : mdp.successors(s, ai))
                    q += p * (mdp.reward(w, s, avail[ai], s2) + gamma * pol.v_at(t + 1, s2));
                pol.q_at(t, s, ai) = q;
                qmax = std::max(qmax, q);
            }
            double z = 0.0;
            for (int ai = 0; ai < na; ++ai) z += std::exp(pol.q_at(t, s, ai) - qmax);
            const double v = qmax + std::log(z);
            pol.v_at(t, s) = v;
            for (int ai = 0; ai < na; ++ai) pol.pi_at(t, s, ai) = std::exp(pol.q_at(t, s, ai) - v);
        }
    }
    return pol;
}

VisitationTable forward_visitation(const TabularMdp& mdp, const SoftPolicy& policy, int horizon) {
    if (policy.horizon != horizon || policy.num_states != mdp.num_states())
        throw std::invalid_argument("policy does not match mdp/horizon");
    const int S = mdp.num_states();

    VisitationTable vt;
    vt.d.assign(mdp.transitions().size(), 0.0);
    vt.rho.assign(static_cast<std::size_t>(horizon + 1) * S, 0.0);
    for (auto [s, p] : mdp.spec.start_distribution) vt.rho[s] += p;

    for (int t = 0; t < horizon; ++t) {
        for (int s = 0; s < S; ++s) {
            double occ = vt.rho[static_cast<std::size_t>(t) * S + s];
            if (occ == 0.0) continue;
            const auto& avail = mdp.available_actions(s);
            for (int ai = 0; ai < static_cast<int>(avail.size()); ++ai) {
                double flow = occ * policy.pi_at(t, s, ai);
                if (flow == 0.0) continue;
                for (auto [s2, p] : mdp.successors(s, ai)) {
                    double mass = flow * p;
                    vt.d[mdp.transition_index(s, avail[ai], s2)] += mass;
                    vt.rho[static_cast<std::size_t>(t + 1) * S + s2] += mass;
                }
            }
        }
    }
    return vt;
}

double trajectory_log_prob(const TabularMdp& mdp, const SoftPolicy& policy, const Trajectory& tau) {
    if (tau.size() > static_cast<std::size_t>(policy.horizon))
        throw std::invalid_argument("trajectory longer than policy horizon");
    double lp = 0.0;
    int t = 0;
    for (const Step& st : tau.steps) {
        int ai = mdp.action_index(st.state, st.action);
        double p = ai < 0 ? 0.0 : mdp.transition_prob(st.state, st.action, st.next_state);
        if (p <= 0.0) return -std::numeric_limits<double>::infinity();
        lp += std::log(policy.pi_at(t, st.state, ai)) + std::log(p);
        ++t;
    }
    // Steps after goal absorption keep the state fixed with marginal
    // probability 1, so a trajectory truncated at the goal needs no padding.
    return lp;
}

std::vector<double> empirical_feature_expectation(const TabularMdp& mdp, const DemoSet& demos) {
    if (demos.empty()) throw std::invalid_argument("empty demonstration set");
    std::vector<double> acc(mdp.feature_dim(), 0.0);
    for (const Trajectory& tau : demos)
        for (const Step& st : tau.steps) {
            auto p = mdp.phi(st.state, st.action, st.next_state);
            for (int i = 0; i < p.count; ++i) acc[p.idx[i]] += 1.0;
        }
    for (double& x : acc) x /= static_cast<double>(demos.size());
    return acc;
}

std::vector<double> model_feature_expectation(const TabularMdp& mdp, const VisitationTable& visits) {
    std::vector<double> acc(mdp.feature_dim(), 0.0);
    const auto& trans = mdp.transitions();
    for (std::size_t i = 0; i < trans.size(); ++i) {
        if (visits.d[i] == 0.0) continue;
        auto p = mdp.phi(trans[i].state, trans[i].action, trans[i].next_state);
        for (int j = 0; j < p.count; ++j) acc[p.idx[j]] += visits.d[i];
    }
    return acc;
}

} // namespace mesc
