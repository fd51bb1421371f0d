#pragma once

#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace mesc {

enum class Color : int { none = 0, blue = 1, green = 2 };

constexpr int kNumActions = 8;
constexpr int kNumColors = 3;

// Action layout: 0..3 cardinal (N, E, S, W), 4..7 diagonal (NE, SE, SW, NW).
constexpr std::array<int, kNumActions> kActionDRow = {-1, 0, 1, 0, -1, 1, 1, -1};
constexpr std::array<int, kNumActions> kActionDCol = {0, 1, 0, -1, 1, 1, -1, -1};
inline bool is_cardinal(int action) { return action < 4; }

const char* action_name(int action);

// Environment description: geometry, dynamics noise, reward constants, plus
// optional ground-truth constraint declarations used by the experiments.
struct GridSpec {
    int width = 9;
    int height = 9;
    std::vector<std::pair<int, double>> start_distribution; // (state, prob)
    int goal_state = 0;
    std::map<int, Color> color_of_state; // absent means Color::none
    double action_failure_prob = 0.1;
    int horizon = 50;
    double discount = 1.0;
    double goal_bonus = 10.0;

    // Ground-truth soft constraints (cost is a negative reward added to the
    // nominal world when the item is triggered).
    std::map<int, double> constrained_states;
    std::map<int, double> constrained_actions;
    std::map<Color, double> constrained_colors;

    int num_states() const { return width * height; }
    Color color(int state) const {
        auto it = color_of_state.find(state);
        return it == color_of_state.end() ? Color::none : it->second;
    }

    // Throws std::invalid_argument on any violated invariant.
    void validate() const;
};

// Reward weights over the one-hot transition features. The goal-entry bonus
// is not expressible in the indicator basis, so it rides along with the
// weight vector; learned residuals always carry a zero bonus.
struct WeightVector {
    std::vector<double> values;
    double goal_bonus = 0.0;

    WeightVector() = default;
    explicit WeightVector(std::size_t dim, double fill = 0.0) : values(dim, fill) {}

    std::size_t size() const { return values.size(); }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }

    WeightVector operator-(const WeightVector& o) const;
    WeightVector operator+(const WeightVector& o) const;
};

struct Transition {
    int state = 0;
    int action = 0; // global action id
    int next_state = 0;
    double prob = 0.0;
};

struct Step {
    int state;
    int action;
    int next_state;
};

struct Trajectory {
    std::vector<Step> steps;
    bool empty() const { return steps.empty(); }
    std::size_t size() const { return steps.size(); }
};

using DemoSet = std::vector<Trajectory>;

// Finite tabular MDP with one-hot transition features
// [destination state | action | destination color]. Immutable once built.
class TabularMdp {
  public:
    GridSpec spec; // retained for geometry, start distribution, goal handling

    int num_states() const { return spec.num_states(); }
    int goal() const { return spec.goal_state; }
    int horizon() const { return spec.horizon; }
    double discount() const { return spec.discount; }

    int feature_dim() const { return num_states() + kNumActions + kNumColors; }
    int state_feature(int state) const { return state; }
    int action_feature(int action) const { return num_states() + action; }
    int color_feature(Color c) const { return num_states() + kNumActions + static_cast<int>(c); }

    const std::vector<int>& available_actions(int state) const { return available_[state]; }
    int action_index(int state, int action) const; // -1 when unavailable

    // Successors of (state, action); action must be available.
    const std::vector<std::pair<int, double>>& successors(int state, int action_idx) const {
        return successors_[state * kNumActions + available_[state][action_idx]];
    }
    double transition_prob(int state, int action, int next_state) const;

    const WeightVector& nominal_weights() const { return nominal_; }

    // Feature one-hot indices of a transition; empty for goal self-loops,
    // whose features are identically zero (absorption carries no signal).
    struct PhiIndices {
        std::array<int, 3> idx{};
        int count = 0;
    };
    PhiIndices phi(int state, int action, int next_state) const {
        PhiIndices p;
        if (state == goal()) return p;
        p.idx = {state_feature(next_state), action_feature(action),
                 color_feature(spec.color(next_state))};
        p.count = 3;
        return p;
    }

    double reward(const WeightVector& w, int state, int action, int next_state) const {
        PhiIndices p = phi(state, action, next_state);
        double r = 0.0;
        for (int i = 0; i < p.count; ++i) r += w[p.idx[i]];
        if (p.count > 0 && next_state == goal()) r += w.goal_bonus;
        return r;
    }

    // Dense feature vector of a single transition.
    std::vector<double> feature_vec(int state, int action, int next_state) const;

    // Every feasible transition, in a fixed canonical order; `d` tables and
    // the reward-population statistics index into this list.
    const std::vector<Transition>& transitions() const { return transitions_; }
    int transition_index(int state, int action, int next_state) const; // -1 if infeasible

    // Checks chaining, availability, feasibility and length <= horizon.
    void validate_trajectory(const Trajectory& tau) const;

    friend TabularMdp build_gridworld(const GridSpec& spec);

  private:
    std::vector<std::vector<int>> available_;                      // per state
    std::vector<std::vector<std::pair<int, double>>> successors_;  // [s * 8 + a]
    std::vector<Transition> transitions_;
    std::map<std::tuple<int, int, int>, int> transition_lookup_;
    WeightVector nominal_;
};

// Row-major grid construction per GridSpec; throws std::invalid_argument on
// degenerate specs or a goal unreachable from every start state.
TabularMdp build_gridworld(const GridSpec& spec);

// Elementwise sum of the per-transition feature vectors of tau.
std::vector<double> trajectory_features(const TabularMdp& mdp, const Trajectory& tau);

} // namespace mesc
