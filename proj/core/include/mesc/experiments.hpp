#pragma once

#include <limits>
#include <optional>
#include <string>

#include <json.hpp>

#include "mesc/learner.hpp"
#include "mesc/metrics.hpp"

namespace mesc {

struct RandomGridParams {
    int width = 9;
    int height = 9;
    int n_blue = 6;
    int n_green = 6;
    int n_constrained_states = 6;
    double constraint_cost = -50.0;
    // optional color penalties (0 disables); these are what makes constraint
    // knowledge transferable across layouts
    double blue_cost = 0.0;
    double green_cost = 0.0;
    int min_start_goal_distance = 8;
    double action_failure_prob = 0.1;
    int horizon = 50;
    double discount = 1.0;
    double goal_bonus = 10.0;
    std::uint64_t seed = 0;

    void validate() const;
};

// Deterministic random grid: start/goal at Chebyshev distance >=
// min_start_goal_distance, colors and constrained states placed without
// replacement (colors may coincide with constraints; start and goal are
// excluded from both). Throws after bounded retries if no valid layout.
GridSpec random_constrained_grid(const RandomGridParams& params);

// Rollouts of the soft-optimal policy of `behavior_weights` through the mdp
// dynamics, truncated at goal entry or the horizon.
DemoSet sample_demonstrations(const TabularMdp& mdp, const WeightVector& behavior_weights,
                              int n, std::uint64_t seed);

// One evaluation record; NaN marks fields not applicable to the row.
struct ResultRow {
    std::string run_id;
    std::uint64_t grid_seed = 0;
    int demo_count = 0;
    int epoch = 0;
    double zeta = std::numeric_limits<double>::quiet_NaN();
    double chi = std::numeric_limits<double>::quiet_NaN();
    double fp_hard = std::numeric_limits<double>::quiet_NaN();
    double fp_soft = std::numeric_limits<double>::quiet_NaN();
    double kl = std::numeric_limits<double>::quiet_NaN();
    double mean_reward = std::numeric_limits<double>::quiet_NaN();
    double wall_time_ms = 0.0;
    std::string error;
};

std::string rows_to_csv(const std::vector<ResultRow>& rows);

struct SweepConfig {
    std::vector<int> demo_counts;
    int n_repeats = 10;
    int demos_per_set = 100;
    LearnConfig learn;
    std::vector<double> zeta_thresholds; // hard-constraint evaluation rows
    std::vector<double> chis;            // soft evaluation rows
    double hard_cost = -50.0;
    int mean_reward_episodes = 1000;
    std::uint64_t seed = 0;
    int workers = 1;

    std::optional<GridSpec> fixed_grid;        // same grid for every repeat
    std::optional<RandomGridParams> random_grid; // else one grid per repeat

    void validate() const;
};

struct ExperimentResult {
    std::vector<ResultRow> rows;
    nlohmann::json summary; // per-point means and standard deviations
    bool any_failed = false;
};

// One learned model per (repeat, demo count); hard rows score the binarized
// prediction imposed on the nominal world, soft rows score the learned soft
// model directly. KL is always measured against the repeat's full demo set.
ExperimentResult run_sweep(const SweepConfig& config);

struct TransferConfig {
    int n_grids = 50;
    int demos_per_grid = 50;
    std::vector<int> epoch_checkpoints; // must be sorted ascending
    LearnConfig learn;                  // base-grid training budget
    RandomGridParams grid_params;
    int mean_reward_episodes = 1000;
    std::uint64_t seed = 0;
    int workers = 1;

    void validate() const;
};

// For each grid pair: learn on the base grid, then train on the target grid
// twice (warm-started from the base residual, and from zero), recording KL
// and mean reward at every epoch checkpoint.
ExperimentResult run_transfer(const TransferConfig& config);

// Config parsing for the CLI (throws std::invalid_argument on bad schema).
SweepConfig sweep_config_from_json(const nlohmann::json& j);
TransferConfig transfer_config_from_json(const nlohmann::json& j);
RandomGridParams random_grid_params_from_json(const nlohmann::json& j);

} // namespace mesc
