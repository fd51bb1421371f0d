#include "mesc/grid.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <tuple>

namespace mesc {

const char* action_name(int action) {
    static const char* names[kNumActions] = {"N", "E", "S", "W", "NE", "SE", "SW", "NW"};
    return names[action];
}

void GridSpec::validate() const {
    if (width <= 0 || height <= 0) throw std::invalid_argument("grid dimensions must be positive");
    if (horizon <= 0) throw std::invalid_argument("horizon must be positive");
    if (discount < 0.0 || discount > 1.0) throw std::invalid_argument("discount must be in [0,1]");
    if (action_failure_prob < 0.0 || action_failure_prob > 1.0)
        throw std::invalid_argument("action_failure_prob must be in [0,1]");
    if (goal_state < 0 || goal_state >= num_states())
        throw std::invalid_argument("goal_state out of range");
    if (start_distribution.empty()) throw std::invalid_argument("empty start distribution");
    double total = 0.0;
    for (auto [s, p] : start_distribution) {
        if (s < 0 || s >= num_states()) throw std::invalid_argument("start state out of range");
        if (p < 0.0 || p > 1.0) throw std::invalid_argument("start probability out of range");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("start distribution does not sum to 1");
    for (auto& [s, c] : color_of_state) {
        (void)c;
        if (s < 0 || s >= num_states()) throw std::invalid_argument("colored state out of range");
    }
    for (auto& [s, cost] : constrained_states) {
        if (s < 0 || s >= num_states()) throw std::invalid_argument("constrained state out of range");
        if (cost > 0.0) throw std::invalid_argument("constraint costs must be nonpositive");
    }
    for (auto& [a, cost] : constrained_actions) {
        if (a < 0 || a >= kNumActions) throw std::invalid_argument("constrained action out of range");
        if (cost > 0.0) throw std::invalid_argument("constraint costs must be nonpositive");
    }
    for (auto& [c, cost] : constrained_colors) {
        (void)c;
        if (cost > 0.0) throw std::invalid_argument("constraint costs must be nonpositive");
    }
}

WeightVector WeightVector::operator-(const WeightVector& o) const {
    WeightVector r(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) r.values[i] = values[i] - o.values[i];
    r.goal_bonus = goal_bonus - o.goal_bonus;
    return r;
}

WeightVector WeightVector::operator+(const WeightVector& o) const {
    WeightVector r(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) r.values[i] = values[i] + o.values[i];
    r.goal_bonus = goal_bonus + o.goal_bonus;
    return r;
}

int TabularMdp::action_index(int state, int action) const {
    const auto& avail = available_[state];
    for (std::size_t i = 0; i < avail.size(); ++i)
        if (avail[i] == action) return static_cast<int>(i);
    return -1;
}

double TabularMdp::transition_prob(int state, int action, int next_state) const {
    int ai = action_index(state, action);
    if (ai < 0) return 0.0;
    for (auto [s2, p] : successors(state, ai))
        if (s2 == next_state) return p;
    return 0.0;
}

std::vector<double> TabularMdp::feature_vec(int state, int action, int next_state) const {
    std::vector<double> v(feature_dim(), 0.0);
    PhiIndices p = phi(state, action, next_state);
    for (int i = 0; i < p.count; ++i) v[p.idx[i]] += 1.0;
    return v;
}

int TabularMdp::transition_index(int state, int action, int next_state) const {
    auto it = transition_lookup_.find({state, action, next_state});
    return it == transition_lookup_.end() ? -1 : it->second;
}

void TabularMdp::validate_trajectory(const Trajectory& tau) const {
    if (tau.size() > static_cast<std::size_t>(horizon()))
        throw std::invalid_argument("trajectory longer than horizon");
    for (std::size_t i = 0; i < tau.size(); ++i) {
        const Step& st = tau.steps[i];
        if (i > 0 && tau.steps[i - 1].next_state != st.state)
            throw std::invalid_argument("trajectory does not chain");
        if (action_index(st.state, st.action) < 0)
            throw std::invalid_argument("trajectory uses unavailable action");
        if (transition_prob(st.state, st.action, st.next_state) <= 0.0)
            throw std::invalid_argument("trajectory contains infeasible transition");
    }
}

TabularMdp build_gridworld(const GridSpec& spec) {
    spec.validate();
    const int S = spec.num_states();
    const int W = spec.width;
    const int H = spec.height;
    const int goal = spec.goal_state;

    TabularMdp mdp;
    mdp.spec = spec;
    mdp.available_.assign(S, {});
    mdp.successors_.assign(static_cast<std::size_t>(S) * kNumActions, {});

    for (int s = 0; s < S; ++s) {
        if (s == goal) {
            // Absorbing goal: every action self-loops with probability 1.
            for (int a = 0; a < kNumActions; ++a) {
                mdp.available_[s].push_back(a);
                mdp.successors_[s * kNumActions + a] = {{goal, 1.0}};
            }
            continue;
        }
        int row = s / W, col = s % W;
        std::vector<int> avail;
        std::vector<int> intended(kNumActions, -1);
        for (int a = 0; a < kNumActions; ++a) {
            int r2 = row + kActionDRow[a], c2 = col + kActionDCol[a];
            if (r2 < 0 || r2 >= H || c2 < 0 || c2 >= W) continue; // off-grid moves removed
            avail.push_back(a);
            intended[a] = r2 * W + c2;
        }
        mdp.available_[s] = avail;
        const double fail = spec.action_failure_prob;
        for (int a : avail) {
            std::map<int, double> probs;
            probs[intended[a]] += 1.0 - fail;
            // On failure a uniformly random available action executes instead
            // (possibly the intended one).
            for (int b : avail) probs[intended[b]] += fail / static_cast<double>(avail.size());
            auto& out = mdp.successors_[s * kNumActions + a];
            for (auto [s2, p] : probs)
                if (p > 0.0) out.push_back({s2, p});
        }
    }

    for (int s = 0; s < S; ++s)
        if (mdp.available_[s].empty())
            throw std::invalid_argument("state with no available actions");

    // Canonical transition list.
    for (int s = 0; s < S; ++s)
        for (int a : mdp.available_[s])
            for (auto [s2, p] : mdp.successors_[s * kNumActions + a]) {
                mdp.transition_lookup_[{s, a, s2}] = static_cast<int>(mdp.transitions_.size());
                mdp.transitions_.push_back({s, a, s2, p});
            }

    // Nominal reward: -4 per cardinal move, -4*sqrt(2) per diagonal move,
    // +goal_bonus on transitions entering the goal.
    mdp.nominal_ = WeightVector(mdp.feature_dim());
    for (int a = 0; a < kNumActions; ++a)
        mdp.nominal_[mdp.action_feature(a)] = is_cardinal(a) ? -4.0 : -4.0 * std::sqrt(2.0);
    mdp.nominal_.goal_bonus = spec.goal_bonus;

    // Goal must be reachable from every start state.
    std::vector<bool> reach(S, false);
    std::deque<int> queue;
    for (auto [s, p] : spec.start_distribution)
        if (p > 0.0 && !reach[s]) {
            reach[s] = true;
            queue.push_back(s);
        }
    while (!queue.empty()) {
        int s = queue.front();
        queue.pop_front();
        for (int a : mdp.available_[s])
            for (auto [s2, p] : mdp.successors_[s * kNumActions + a])
                if (p > 0.0 && !reach[s2]) {
                    reach[s2] = true;
                    queue.push_back(s2);
                }
    }
    if (!reach[goal]) throw std::invalid_argument("goal unreachable from start distribution");

    return mdp;
}

std::vector<double> trajectory_features(const TabularMdp& mdp, const Trajectory& tau) {
    std::vector<double> acc(mdp.feature_dim(), 0.0);
    for (const Step& st : tau.steps) {
        auto p = mdp.phi(st.state, st.action, st.next_state);
        for (int i = 0; i < p.count; ++i) acc[p.idx[i]] += 1.0;
    }
    return acc;
}

} // namespace mesc
