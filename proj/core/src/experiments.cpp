#include "mesc/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "mesc/io.hpp"
#include "mesc/rng.hpp"

namespace mesc {

using nlohmann::json;

namespace {

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
    workers = std::max(1, std::min(workers, n));
    if (workers == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                int i = next.fetch_add(1);
                if (i >= n) return;
                fn(i);
            }
        });
    for (auto& th : pool) th.join();
}

std::string fmt_double(double x) {
    if (std::isnan(x)) return "";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::string fmt_fixed(double x, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, x);
    return buf;
}

int chebyshev(int s1, int s2, int width) {
    int dr = std::abs(s1 / width - s2 / width);
    int dc = std::abs(s1 % width - s2 % width);
    return std::max(dr, dc);
}

struct Welford {
    int n = 0;
    double mean = 0.0, m2 = 0.0;
    void add(double x) {
        ++n;
        double d = x - mean;
        mean += d / n;
        m2 += d * (x - mean);
    }
    double std_dev() const { return n > 1 ? std::sqrt(m2 / n) : 0.0; }
};

} // namespace

void RandomGridParams::validate() const {
    if (width <= 0 || height <= 0) throw std::invalid_argument("grid dimensions must be positive");
    if (n_blue < 0 || n_green < 0 || n_constrained_states < 0)
        throw std::invalid_argument("placement counts must be nonnegative");
    if (constraint_cost > 0.0) throw std::invalid_argument("constraint_cost must be nonpositive");
    if (blue_cost > 0.0 || green_cost > 0.0)
        throw std::invalid_argument("color costs must be nonpositive");
    if (min_start_goal_distance < 0) throw std::invalid_argument("negative start/goal distance");
    // start + goal excluded from placement; colors may overlap constraints
    int placeable = width * height - 2;
    if (n_blue + n_green > placeable || n_constrained_states > placeable)
        throw std::invalid_argument("placement counts exceed available cells");
    if (horizon <= 0) throw std::invalid_argument("horizon must be positive");
}

GridSpec random_constrained_grid(const RandomGridParams& params) {
    params.validate();
    const int S = params.width * params.height;
    Rng rng(params.seed);

    constexpr int kMaxAttempts = 64;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        int start = static_cast<int>(rng.next_below(S));
        std::vector<int> goal_candidates;
        for (int s = 0; s < S; ++s)
            if (s != start && chebyshev(start, s, params.width) >= params.min_start_goal_distance)
                goal_candidates.push_back(s);
        if (goal_candidates.empty()) continue;
        int goal = goal_candidates[rng.next_below(goal_candidates.size())];

        std::vector<bool> endpoint(S, false);
        endpoint[start] = endpoint[goal] = true;
        std::vector<int> colored =
            sample_without_replacement(rng, S, params.n_blue + params.n_green, endpoint);
        std::vector<int> constrained =
            sample_without_replacement(rng, S, params.n_constrained_states, endpoint);

        GridSpec spec;
        spec.width = params.width;
        spec.height = params.height;
        spec.start_distribution = {{start, 1.0}};
        spec.goal_state = goal;
        for (int i = 0; i < params.n_blue; ++i) spec.color_of_state[colored[i]] = Color::blue;
        for (int i = params.n_blue; i < params.n_blue + params.n_green; ++i)
            spec.color_of_state[colored[i]] = Color::green;
        for (int s : constrained) spec.constrained_states[s] = params.constraint_cost;
        if (params.blue_cost != 0.0) spec.constrained_colors[Color::blue] = params.blue_cost;
        if (params.green_cost != 0.0) spec.constrained_colors[Color::green] = params.green_cost;
        spec.action_failure_prob = params.action_failure_prob;
        spec.horizon = params.horizon;
        spec.discount = params.discount;
        spec.goal_bonus = params.goal_bonus;

        try {
            build_gridworld(spec); // reachability check
        } catch (const std::invalid_argument&) {
            continue;
        }
        return spec;
    }
    throw std::runtime_error("random_constrained_grid: no valid layout found");
}

DemoSet sample_demonstrations(const TabularMdp& mdp, const WeightVector& behavior_weights,
                              int n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("demonstration count must be >= 1");
    SoftPolicy policy = soft_backward(mdp, behavior_weights, mdp.horizon());
    Rng rng(seed);
    const auto& start = mdp.spec.start_distribution;

    DemoSet demos;
    demos.reserve(n);
    for (int i = 0; i < n; ++i) {
        Trajectory tau;
        int s = start[rng.next_categorical(static_cast<int>(start.size()),
                                           [&](int j) { return start[j].second; })].first;
        for (int t = 0; t < mdp.horizon() && s != mdp.goal(); ++t) {
            const auto& avail = mdp.available_actions(s);
            int ai = rng.next_categorical(static_cast<int>(avail.size()),
                                          [&](int j) { return policy.pi_at(t, s, j); });
            const auto& succ = mdp.successors(s, ai);
            int si = rng.next_categorical(static_cast<int>(succ.size()),
                                          [&](int j) { return succ[j].second; });
            tau.steps.push_back({s, avail[ai], succ[si].first});
            s = succ[si].first;
        }
        demos.push_back(std::move(tau));
    }
    return demos;
}

std::string rows_to_csv(const std::vector<ResultRow>& rows) {
    std::ostringstream out;
    out << "run_id,grid_seed,demo_count,epoch,zeta,chi,fp_hard,fp_soft,kl,mean_reward,"
           "wall_time_ms,error\n";
    for (const ResultRow& r : rows) {
        std::string err = r.error;
        std::replace(err.begin(), err.end(), ',', ';');
        std::replace(err.begin(), err.end(), '\n', ' ');
        out << r.run_id << ',' << r.grid_seed << ',' << r.demo_count << ',' << r.epoch << ','
            << fmt_double(r.zeta) << ',' << fmt_double(r.chi) << ',' << fmt_double(r.fp_hard)
            << ',' << fmt_double(r.fp_soft) << ',' << fmt_double(r.kl) << ','
            << fmt_double(r.mean_reward) << ',' << fmt_double(r.wall_time_ms) << ',' << err
            << '\n';
    }
    return out.str();
}

void SweepConfig::validate() const {
    if (demo_counts.empty()) throw std::invalid_argument("demo_counts must be nonempty");
    for (int m : demo_counts)
        if (m < 1) throw std::invalid_argument("demo counts must be positive");
    if (n_repeats < 1) throw std::invalid_argument("n_repeats must be positive");
    if (demos_per_set < *std::max_element(demo_counts.begin(), demo_counts.end()))
        throw std::invalid_argument("demos_per_set smaller than largest demo count");
    if (zeta_thresholds.empty() && chis.empty())
        throw std::invalid_argument("no evaluation thresholds configured");
    if (!fixed_grid && !random_grid) throw std::invalid_argument("no grid source configured");
    learn.validate();
}

namespace {

struct SweepPointStats {
    Welford fp, kl, reward;
};

} // namespace

ExperimentResult run_sweep(const SweepConfig& config) {
    config.validate();
    const int R = config.n_repeats;
    std::vector<std::vector<ResultRow>> per_repeat(R);
    std::atomic<bool> any_failed{false};

    parallel_for(R, config.workers, [&](int rep) {
        std::uint64_t grid_seed = derive_seed(config.seed, static_cast<std::uint64_t>(rep));
        std::uint64_t demo_seed = derive_seed(config.seed, 1000 + static_cast<std::uint64_t>(rep));
        auto& rows = per_repeat[rep];
        char rid[64];

        try {
            GridSpec spec;
            if (config.fixed_grid) {
                spec = *config.fixed_grid;
            } else {
                RandomGridParams params = *config.random_grid;
                params.seed = grid_seed;
                spec = random_constrained_grid(params);
            }
            TabularMdp mdp = build_gridworld(spec);
            GroundTruth truth = make_ground_truth(mdp, spec);
            DemoSet all_demos =
                sample_demonstrations(mdp, truth.constrained_weights, config.demos_per_set,
                                      demo_seed);

            for (int m : config.demo_counts) {
                auto t0 = std::chrono::steady_clock::now();
                DemoSet demos(all_demos.begin(), all_demos.begin() + m);
                LearnConfig lc = config.learn;
                lc.seed = demo_seed;
                LearnResult learned = mesc_irl(mdp, demos, lc);
                ConstraintReport report = make_constraint_report(mdp, learned.residual_weights);

                for (double zeta : config.zeta_thresholds) {
                    std::set<int> flagged;
                    for (int f : binarize_features(report, zeta))
                        if (f < mdp.num_states()) flagged.insert(f);
                    WeightVector hardened = harden_weights(mdp, flagged, config.hard_cost);
                    SoftPolicy pol = soft_backward(mdp, hardened, mdp.horizon());

                    ResultRow row;
                    std::snprintf(rid, sizeof(rid), "rep%02d_m%03d_zeta%s", rep, m,
                                  fmt_fixed(zeta, 2).c_str());
                    row.run_id = rid;
                    row.grid_seed = grid_seed;
                    row.demo_count = m;
                    row.epoch = lc.epochs;
                    row.zeta = zeta;
                    row.fp_hard = false_positive_rate_hard(flagged, truth);
                    row.kl = kl_to_demos(mdp, hardened, all_demos);
                    row.mean_reward = mean_reward(mdp, truth.constrained_weights, pol,
                                                  config.mean_reward_episodes,
                                                  derive_seed(config.seed, 7000 + rep));
                    row.wall_time_ms = std::chrono::duration<double, std::milli>(
                                           std::chrono::steady_clock::now() - t0)
                                           .count();
                    rows.push_back(std::move(row));
                }

                double soft_kl = std::numeric_limits<double>::quiet_NaN();
                double soft_reward = std::numeric_limits<double>::quiet_NaN();
                if (!config.chis.empty()) {
                    soft_kl = kl_to_demos(mdp, learned.constrained_weights, all_demos);
                    SoftPolicy pol = soft_backward(mdp, learned.constrained_weights,
                                                   mdp.horizon());
                    soft_reward = mean_reward(mdp, truth.constrained_weights, pol,
                                              config.mean_reward_episodes,
                                              derive_seed(config.seed, 7000 + rep));
                }
                for (double chi : config.chis) {
                    ResultRow row;
                    std::snprintf(rid, sizeof(rid), "rep%02d_m%03d_chi%s", rep, m,
                                  fmt_fixed(chi, 2).c_str());
                    row.run_id = rid;
                    row.grid_seed = grid_seed;
                    row.demo_count = m;
                    row.epoch = lc.epochs;
                    row.chi = chi;
                    row.fp_soft = false_positive_rate_soft(report, truth, chi);
                    row.kl = soft_kl;
                    row.mean_reward = soft_reward;
                    row.wall_time_ms = std::chrono::duration<double, std::milli>(
                                           std::chrono::steady_clock::now() - t0)
                                           .count();
                    rows.push_back(std::move(row));
                }
            }
        } catch (const std::exception& e) {
            any_failed = true;
            ResultRow row;
            std::snprintf(rid, sizeof(rid), "rep%02d", rep);
            row.run_id = rid;
            row.grid_seed = grid_seed;
            row.error = e.what();
            rows.push_back(std::move(row));
        }
    });

    ExperimentResult result;
    result.any_failed = any_failed;
    for (auto& rows : per_repeat)
        for (auto& row : rows) result.rows.push_back(std::move(row));

    // Summary: per (demo count, kind, threshold) means over repeats.
    std::map<std::tuple<int, std::string, double>, SweepPointStats> stats;
    for (const ResultRow& row : result.rows) {
        if (!row.error.empty()) continue;
        bool hard = !std::isnan(row.zeta);
        auto& st = stats[{row.demo_count, hard ? "hard" : "soft", hard ? row.zeta : row.chi}];
        st.fp.add(hard ? row.fp_hard : row.fp_soft);
        if (std::isfinite(row.kl)) st.kl.add(row.kl);
        if (!std::isnan(row.mean_reward)) st.reward.add(row.mean_reward);
    }
    json points = json::array();
    for (const auto& [key, st] : stats) {
        points.push_back({{"demo_count", std::get<0>(key)},
                          {"kind", std::get<1>(key)},
                          {"threshold", std::get<2>(key)},
                          {"fp_mean", st.fp.mean},
                          {"fp_std", st.fp.std_dev()},
                          {"kl_mean", st.kl.mean},
                          {"kl_std", st.kl.std_dev()},
                          {"mean_reward_mean", st.reward.mean},
                          {"mean_reward_std", st.reward.std_dev()},
                          {"n", st.fp.n}});
    }
    result.summary = {{"points", points}};
    return result;
}

void TransferConfig::validate() const {
    if (n_grids < 1) throw std::invalid_argument("n_grids must be positive");
    if (demos_per_grid < 1) throw std::invalid_argument("demos_per_grid must be positive");
    if (epoch_checkpoints.empty()) throw std::invalid_argument("epoch_checkpoints must be nonempty");
    if (!std::is_sorted(epoch_checkpoints.begin(), epoch_checkpoints.end()))
        throw std::invalid_argument("epoch_checkpoints must be ascending");
    if (epoch_checkpoints.front() < 0) throw std::invalid_argument("negative epoch checkpoint");
    grid_params.validate();
    learn.validate();
}

ExperimentResult run_transfer(const TransferConfig& config) {
    config.validate();
    const int N = config.n_grids;
    std::vector<std::vector<ResultRow>> per_pair(N);
    std::atomic<bool> any_failed{false};
    const int target_epochs = std::max(1, config.epoch_checkpoints.back());

    parallel_for(N, config.workers, [&](int pair) {
        auto& rows = per_pair[pair];
        std::uint64_t base_seed = derive_seed(config.seed, 2 * pair);
        std::uint64_t target_seed = derive_seed(config.seed, 2 * pair + 1);
        char rid[64];
        try {
            RandomGridParams pa = config.grid_params;
            pa.seed = base_seed;
            GridSpec spec_a = random_constrained_grid(pa);
            RandomGridParams pb = config.grid_params;
            pb.seed = target_seed;
            GridSpec spec_b = random_constrained_grid(pb);

            TabularMdp mdp_a = build_gridworld(spec_a);
            TabularMdp mdp_b = build_gridworld(spec_b);
            GroundTruth truth_a = make_ground_truth(mdp_a, spec_a);
            GroundTruth truth_b = make_ground_truth(mdp_b, spec_b);

            DemoSet demos_a = sample_demonstrations(mdp_a, truth_a.constrained_weights,
                                                    config.demos_per_grid,
                                                    derive_seed(config.seed, 5000 + 2 * pair));
            DemoSet demos_b = sample_demonstrations(mdp_b, truth_b.constrained_weights,
                                                    config.demos_per_grid,
                                                    derive_seed(config.seed, 5001 + 2 * pair));

            LearnResult base = mesc_irl(mdp_a, demos_a, config.learn);

            for (const char* variant : {"transfer", "cold"}) {
                LearnConfig lc = config.learn;
                lc.epochs = target_epochs;
                lc.init_residual = std::string(variant) == "transfer" ? base.residual_weights
                                                                      : WeightVector();
                auto t0 = std::chrono::steady_clock::now();
                std::uint64_t reward_seed = derive_seed(config.seed, 9000 + pair);

                auto checkpoint = [&](int epoch, const WeightVector& residual) {
                    if (!std::binary_search(config.epoch_checkpoints.begin(),
                                            config.epoch_checkpoints.end(), epoch))
                        return;
                    WeightVector constrained = mdp_b.nominal_weights() - residual;
                    SoftPolicy pol = soft_backward(mdp_b, constrained, mdp_b.horizon());
                    ResultRow row;
                    std::snprintf(rid, sizeof(rid), "pair%03d_%s", pair, variant);
                    row.run_id = rid;
                    row.grid_seed = target_seed;
                    row.demo_count = config.demos_per_grid;
                    row.epoch = epoch;
                    row.kl = kl_to_demos(mdp_b, constrained, demos_b);
                    row.mean_reward = mean_reward(mdp_b, truth_b.constrained_weights, pol,
                                                  config.mean_reward_episodes, reward_seed);
                    row.wall_time_ms = std::chrono::duration<double, std::milli>(
                                           std::chrono::steady_clock::now() - t0)
                                           .count();
                    rows.push_back(std::move(row));
                };
                mesc_irl(mdp_b, demos_b, lc, checkpoint);
            }
        } catch (const std::exception& e) {
            any_failed = true;
            ResultRow row;
            std::snprintf(rid, sizeof(rid), "pair%03d", pair);
            row.run_id = rid;
            row.grid_seed = target_seed;
            row.error = e.what();
            rows.push_back(std::move(row));
        }
    });

    ExperimentResult result;
    result.any_failed = any_failed;
    for (auto& rows : per_pair)
        for (auto& row : rows) result.rows.push_back(std::move(row));

    std::map<std::pair<std::string, int>, std::pair<Welford, Welford>> stats; // (kl, reward)
    for (const ResultRow& row : result.rows) {
        if (!row.error.empty()) continue;
        std::string variant = row.run_id.substr(row.run_id.find('_') + 1);
        auto& st = stats[{variant, row.epoch}];
        if (std::isfinite(row.kl)) st.first.add(row.kl);
        st.second.add(row.mean_reward);
    }
    json points = json::array();
    for (const auto& [key, st] : stats) {
        points.push_back({{"variant", key.first},
                          {"epoch", key.second},
                          {"kl_mean", st.first.mean},
                          {"kl_std", st.first.std_dev()},
                          {"mean_reward_mean", st.second.mean},
                          {"mean_reward_std", st.second.std_dev()},
                          {"n", st.first.n}});
    }
    result.summary = {{"points", points}};
    return result;
}

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const char* what) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw std::invalid_argument(std::string("unknown ") + what + " field: " + it.key());
}

LearnConfig learn_config_from_json(const json& j) {
    reject_unknown(j, {"learning_rate", "epochs", "l2_penalty", "seed"}, "learn config");
    LearnConfig lc;
    if (j.contains("learning_rate")) lc.learning_rate = j["learning_rate"].get<double>();
    if (j.contains("epochs")) lc.epochs = j["epochs"].get<int>();
    if (j.contains("l2_penalty")) lc.l2_penalty = j["l2_penalty"].get<double>();
    if (j.contains("seed")) lc.seed = j["seed"].get<std::uint64_t>();
    lc.validate();
    return lc;
}

} // namespace

RandomGridParams random_grid_params_from_json(const json& j) {
    reject_unknown(j,
                   {"width", "height", "n_blue", "n_green", "n_constrained_states",
                    "constraint_cost", "blue_cost", "green_cost", "min_start_goal_distance",
                    "action_failure_prob", "horizon", "discount", "goal_bonus", "seed"},
                   "random grid params");
    RandomGridParams p;
    if (j.contains("width")) p.width = j["width"].get<int>();
    if (j.contains("height")) p.height = j["height"].get<int>();
    if (j.contains("n_blue")) p.n_blue = j["n_blue"].get<int>();
    if (j.contains("n_green")) p.n_green = j["n_green"].get<int>();
    if (j.contains("n_constrained_states"))
        p.n_constrained_states = j["n_constrained_states"].get<int>();
    if (j.contains("constraint_cost")) p.constraint_cost = j["constraint_cost"].get<double>();
    if (j.contains("blue_cost")) p.blue_cost = j["blue_cost"].get<double>();
    if (j.contains("green_cost")) p.green_cost = j["green_cost"].get<double>();
    if (j.contains("min_start_goal_distance"))
        p.min_start_goal_distance = j["min_start_goal_distance"].get<int>();
    if (j.contains("action_failure_prob"))
        p.action_failure_prob = j["action_failure_prob"].get<double>();
    if (j.contains("horizon")) p.horizon = j["horizon"].get<int>();
    if (j.contains("discount")) p.discount = j["discount"].get<double>();
    if (j.contains("goal_bonus")) p.goal_bonus = j["goal_bonus"].get<double>();
    if (j.contains("seed")) p.seed = j["seed"].get<std::uint64_t>();
    p.validate();
    return p;
}

SweepConfig sweep_config_from_json(const json& j) {
    reject_unknown(j,
                   {"demo_counts", "n_repeats", "demos_per_set", "learn", "zeta_thresholds",
                    "chis", "hard_cost", "mean_reward_episodes", "seed", "workers", "grid"},
                   "sweep config");
    SweepConfig c;
    c.demo_counts = j.at("demo_counts").get<std::vector<int>>();
    if (j.contains("n_repeats")) c.n_repeats = j["n_repeats"].get<int>();
    if (j.contains("demos_per_set")) c.demos_per_set = j["demos_per_set"].get<int>();
    if (j.contains("learn")) c.learn = learn_config_from_json(j["learn"]);
    if (j.contains("zeta_thresholds"))
        c.zeta_thresholds = j["zeta_thresholds"].get<std::vector<double>>();
    if (j.contains("chis")) c.chis = j["chis"].get<std::vector<double>>();
    if (j.contains("hard_cost")) c.hard_cost = j["hard_cost"].get<double>();
    if (j.contains("mean_reward_episodes"))
        c.mean_reward_episodes = j["mean_reward_episodes"].get<int>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("workers")) c.workers = j["workers"].get<int>();

    const json& grid = j.at("grid");
    reject_unknown(grid, {"file", "spec", "random"}, "grid source");
    if (grid.contains("file"))
        c.fixed_grid = grid_spec_from_json(read_json_file(grid["file"].get<std::string>()));
    else if (grid.contains("spec"))
        c.fixed_grid = grid_spec_from_json(grid["spec"]);
    else if (grid.contains("random"))
        c.random_grid = random_grid_params_from_json(grid["random"]);
    c.validate();
    return c;
}

TransferConfig transfer_config_from_json(const json& j) {
    reject_unknown(j,
                   {"n_grids", "demos_per_grid", "epoch_checkpoints", "learn", "grid_params",
                    "mean_reward_episodes", "seed", "workers"},
                   "transfer config");
    TransferConfig c;
    if (j.contains("n_grids")) c.n_grids = j["n_grids"].get<int>();
    if (j.contains("demos_per_grid")) c.demos_per_grid = j["demos_per_grid"].get<int>();
    c.epoch_checkpoints = j.at("epoch_checkpoints").get<std::vector<int>>();
    if (j.contains("learn")) c.learn = learn_config_from_json(j["learn"]);
    if (j.contains("grid_params")) c.grid_params = random_grid_params_from_json(j["grid_params"]);
    if (j.contains("mean_reward_episodes"))
        c.mean_reward_episodes = j["mean_reward_episodes"].get<int>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("workers")) c.workers = j["workers"].get<int>();
    c.validate();
    return c;
}

} // namespace mesc
