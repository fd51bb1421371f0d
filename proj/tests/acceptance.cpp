// Acceptance gate: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Criteria exercise the public API end to end at the scale
// of the reference experiments (9x9 grids, 100-demo sets, 50 transfer pairs).
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mesc/experiments.hpp"
#include "mesc/io.hpp"
#include "mesc/learner.hpp"
#include "mesc/probability.hpp"
#include "mesc/rng.hpp"
#include "oracle.hpp"

using namespace mesc;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool ok, double seconds,
            const std::string& detail) {
    std::printf("%s %d %s (%.1fs)%s%s\n", ok ? "PASS" : "FAIL", id, name.c_str(), seconds,
                detail.empty() ? "" : ": ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

void run_criterion(int id, const std::string& name,
                   const std::function<bool(std::string&)>& fn) {
    auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
        ok = fn(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report(id, name, ok, secs, detail);
}

GridSpec small_square(int side, double fail, int horizon) {
    GridSpec spec;
    spec.width = side;
    spec.height = side;
    spec.start_distribution = {{0, 1.0}};
    spec.goal_state = side * side - 1;
    spec.action_failure_prob = fail;
    spec.horizon = horizon;
    return spec;
}

GridSpec load_reference_grid() {
    return grid_spec_from_json(read_json_file(fs::path(MESC_ASSET_DIR) / "reference_grid_9x9.json"));
}

int n_workers() {
    unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 4 : static_cast<int>(n);
}

// Mean log-likelihood of the demos, as the learner's gradient defines it.
double mean_ll(const TabularMdp& mdp, const DemoSet& demos, const WeightVector& residual) {
    WeightVector constrained = mdp.nominal_weights() - residual;
    SoftPolicy pol = soft_backward(mdp, constrained, mdp.horizon());
    double ll = 0.0;
    for (const Trajectory& tau : demos) ll += trajectory_log_prob(mdp, pol, tau);
    return ll / static_cast<double>(demos.size());
}

std::map<std::pair<int, double>, std::pair<double, double>> // (demo_count, thr) -> (fp, kl)
summary_points(const nlohmann::json& summary, const std::string& kind) {
    std::map<std::pair<int, double>, std::pair<double, double>> out;
    for (const auto& pt : summary.at("points"))
        if (pt.at("kind") == kind)
            out[{pt.at("demo_count").get<int>(), pt.at("threshold").get<double>()}] = {
                pt.at("fp_mean").get<double>(), pt.at("kl_mean").get<double>()};
    return out;
}

// --- criterion 1: gradient vs central finite differences -------------------

bool criterion_gradient(std::string& detail) {
    for (double fail : {0.0, 0.1}) {
        GridSpec spec = small_square(5, fail, 12);
        spec.constrained_states[12] = -50.0;
        TabularMdp mdp = build_gridworld(spec);
        GroundTruth truth = make_ground_truth(mdp, spec);
        DemoSet demos = sample_demonstrations(mdp, truth.constrained_weights, 20, 41);

        WeightVector residual(mdp.feature_dim());
        Rng rng(7);
        for (std::size_t i = 0; i < residual.size(); ++i)
            residual[i] = 4.0 * (rng.next_double() - 0.5);

        std::vector<double> grad = likelihood_gradient(mdp, demos, residual);
        const double step = 1e-5;
        for (int i = 0; i < mdp.feature_dim(); ++i) {
            WeightVector hi = residual, lo = residual;
            hi[i] += step;
            lo[i] -= step;
            double fd = (mean_ll(mdp, demos, hi) - mean_ll(mdp, demos, lo)) / (2.0 * step);
            double tol = std::max(1e-8, 1e-4 * std::abs(fd));
            if (std::abs(grad[i] - fd) > tol) {
                char buf[160];
                std::snprintf(buf, sizeof(buf),
                              "fail=%.2f coord %d: grad %.12g vs fd %.12g", fail, i, grad[i], fd);
                detail = buf;
                return false;
            }
        }
    }
    return true;
}

// --- criterion 2: visitation vs exhaustive enumeration ---------------------

bool criterion_visitation(std::string& detail) {
    struct Case { double fail; int horizon; } cases[] = {{0.0, 6}, {0.1, 3}};
    for (auto [fail, horizon] : cases) {
        TabularMdp mdp = build_gridworld(small_square(3, fail, horizon));
        SoftPolicy pol = soft_backward(mdp, mdp.nominal_weights(), horizon);
        VisitationTable vt = forward_visitation(mdp, pol, horizon);
        test::EnumResult oracle = test::enumerate_visitation(mdp, pol, horizon);
        for (std::size_t i = 0; i < vt.d.size(); ++i)
            if (std::abs(vt.d[i] - oracle.d[i]) > 1e-8) {
                detail = "transition visitation mismatch at index " + std::to_string(i);
                return false;
            }
        std::vector<double> feat = model_feature_expectation(mdp, vt);
        for (int f = 0; f < mdp.feature_dim(); ++f)
            if (std::abs(feat[f] - oracle.feat[f]) > 1e-8) {
                detail = "feature expectation mismatch at feature " + std::to_string(f);
                return false;
            }
    }
    return true;
}

// --- criterion 3: constraint probability formulas ---------------------------

// 1x2 strip whose single non-loop transition carries weight x on the east
// action feature; the other 8 transitions are goal self-loops with reward 0,
// so the population std is |x| * 2*sqrt(2)/9 and we can dial in any target.
WeightVector strip_weights(const TabularMdp& mdp, double target_std) {
    WeightVector w(mdp.feature_dim());
    w[mdp.action_feature(1)] = target_std * 9.0 / (2.0 * std::sqrt(2.0));
    return w;
}

bool criterion_probability(std::string& detail) {
    PenaltyScale unit;
    unit.sigma_pooled = 1.0;
    if (std::abs(transition_constraint_prob(0.0, unit) - 1.0 / (1.0 + std::exp(1.0))) > 1e-6) {
        detail = "zeta(0) != 1/(1+e)";
        return false;
    }
    unit.sigma_pooled = 3.7;
    if (transition_constraint_prob(unit.sigma_pooled, unit) != 0.5) {
        detail = "zeta(sigma) != 0.5";
        return false;
    }

    GridSpec strip;
    strip.width = 2;
    strip.height = 1;
    strip.start_distribution = {{0, 1.0}};
    strip.goal_state = 1;
    strip.action_failure_prob = 0.0;
    strip.horizon = 3;
    TabularMdp mdp = build_gridworld(strip);
    PenaltyScale scale = pooled_std(mdp, strip_weights(mdp, 3.0), strip_weights(mdp, 4.0));
    if (std::abs(scale.sigma_nominal - 3.0) > 1e-12 ||
        std::abs(scale.sigma_constrained - 4.0) > 1e-12 ||
        std::abs(scale.sigma_pooled - std::sqrt(12.5)) > 1e-12) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "pooled_std(3,4) = %.17g, want sqrt(12.5) = %.17g",
                      scale.sigma_pooled, std::sqrt(12.5));
        detail = buf;
        return false;
    }

    // rescaling both worlds and the residual by c leaves zeta unchanged
    GridSpec spec = small_square(4, 0.1, 10);
    TabularMdp grid = build_gridworld(spec);
    WeightVector residual(grid.feature_dim());
    residual[5] = 17.0;
    residual[grid.action_feature(2)] = 3.0;
    const double c = 12.5;
    WeightVector nominal = grid.nominal_weights();
    WeightVector nominal_c = nominal;
    WeightVector residual_c = residual;
    for (std::size_t i = 0; i < nominal.size(); ++i) {
        nominal_c[i] *= c;
        residual_c[i] *= c;
    }
    nominal_c.goal_bonus *= c;
    PenaltyScale s1 = pooled_std(grid, nominal, nominal - residual);
    PenaltyScale s2 = pooled_std(grid, nominal_c, nominal_c - residual_c);
    for (int f = 0; f < grid.feature_dim(); ++f) {
        double z1 = transition_constraint_prob(residual[f], s1);
        double z2 = transition_constraint_prob(residual_c[f], s2);
        if (std::abs(z1 - z2) > 1e-10) {
            detail = "zeta not scale invariant at feature " + std::to_string(f);
            return false;
        }
    }
    return true;
}

// --- criteria 4 and 6: hard recovery and threshold ordering ------------------

SweepConfig reference_sweep(const std::vector<int>& demo_counts,
                            const std::vector<double>& zetas) {
    SweepConfig cfg;
    cfg.demo_counts = demo_counts;
    cfg.n_repeats = 10;
    cfg.demos_per_set = 100;
    cfg.zeta_thresholds = zetas;
    // run the optimizer hot enough that constrained states actually cross the
    // binarization bar; the defaults stall well short of zeta = 0.6
    cfg.learn.learning_rate = 0.5;
    cfg.learn.epochs = 500;
    cfg.seed = 20240901;
    cfg.workers = n_workers();
    cfg.fixed_grid = load_reference_grid();
    return cfg;
}

bool criterion_hard_recovery(std::string& detail) {
    ExperimentResult res = run_sweep(reference_sweep({1, 100}, {0.6}));
    if (res.any_failed) {
        detail = "sweep runs failed";
        return false;
    }
    auto pts = summary_points(res.summary, "hard");
    auto [fp1, kl1] = pts.at({1, 0.6});
    auto [fp100, kl100] = pts.at({100, 0.6});
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "fp_hard mean %.4g at 100 demos (%.4g at 1), kl %.4g at 100 (%.4g at 1)",
                  fp100, fp1, kl100, kl1);
    detail = buf;
    return fp100 <= 0.05 && fp100 < fp1 && kl100 < kl1;
}

bool criterion_threshold_ordering(std::string& detail) {
    ExperimentResult res = run_sweep(reference_sweep({20}, {0.6, 0.7}));
    if (res.any_failed) {
        detail = "sweep runs failed";
        return false;
    }
    auto pts = summary_points(res.summary, "hard");
    auto [fp6, kl6] = pts.at({20, 0.6});
    auto [fp7, kl7] = pts.at({20, 0.7});
    char buf[200];
    std::snprintf(buf, sizeof(buf), "fp(0.7)=%.4g vs fp(0.6)=%.4g, kl(0.7)=%.4g vs kl(0.6)=%.4g",
                  fp7, fp6, kl7, kl6);
    detail = buf;
    return fp7 <= fp6 && kl7 >= kl6;
}

// --- criterion 5: soft recovery on random noisy grids ------------------------

bool criterion_soft_recovery(std::string& detail) {
    SweepConfig cfg;
    cfg.demo_counts = {1, 100};
    cfg.n_repeats = 10;
    cfg.demos_per_set = 100;
    cfg.chis = {0.2};
    cfg.seed = 424242;
    cfg.workers = n_workers();
    cfg.random_grid = RandomGridParams{}; // default 9x9 layout, 10% noise

    ExperimentResult res = run_sweep(cfg);
    if (res.any_failed) {
        detail = "sweep runs failed";
        return false;
    }
    auto pts = summary_points(res.summary, "soft");
    auto [fp1, kl1] = pts.at({1, 0.2});
    auto [fp100, kl100] = pts.at({100, 0.2});
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "fp_soft mean %.4g at 100 demos (%.4g at 1), kl %.4g at 100 (%.4g at 1)",
                  fp100, fp1, kl100, kl1);
    detail = buf;
    // fp_soft can already be zero with a single demo, so the trend check is
    // non-strict for fp and strict for KL.
    return fp100 <= 0.05 && fp100 <= fp1 && kl100 < kl1;
}

// --- criterion 7: transfer ---------------------------------------------------

bool criterion_transfer(std::string& detail) {
    TransferConfig cfg;
    cfg.n_grids = 50;
    cfg.demos_per_grid = 50;
    // dense checkpoints around the convergence knee so the faster-convergence
    // comparison is resolved at this granularity
    cfg.epoch_checkpoints = {0,  1,  2,  3,  5,   8,   12,  20,  30,  50, 70,
                             80, 84, 88, 92, 96, 100, 110, 120, 150, 200};
    cfg.learn.epochs = 200;
    // colored squares carry a penalty in both grids of a pair: color
    // knowledge is the transferable part of the residual
    cfg.grid_params.blue_cost = -50.0;
    cfg.grid_params.green_cost = -50.0;
    cfg.seed = 5150;
    cfg.workers = n_workers();

    ExperimentResult res = run_transfer(cfg);
    if (res.any_failed) {
        detail = "transfer runs failed";
        return false;
    }
    std::map<std::string, std::map<int, double>> kl; // variant -> epoch -> mean kl
    for (const auto& pt : res.summary.at("points"))
        kl[pt.at("variant").get<std::string>()][pt.at("epoch").get<int>()] =
            pt.at("kl_mean").get<double>();

    for (auto [epoch, k] : kl.at("transfer"))
        if (k > kl.at("cold").at(epoch)) {
            char buf[160];
            std::snprintf(buf, sizeof(buf), "transfer kl %.4g > cold kl %.4g at epoch %d", k,
                          kl.at("cold").at(epoch), epoch);
            detail = buf;
            return false;
        }

    // epochs to come within 5% of the variant's own final KL
    auto epochs_to_converge = [&](const std::map<int, double>& curve) {
        double final_kl = curve.rbegin()->second;
        double bound = final_kl + 0.05 * std::abs(final_kl);
        for (auto [epoch, k] : curve)
            if (k <= bound) return epoch;
        return curve.rbegin()->first;
    };
    int e_transfer = epochs_to_converge(kl.at("transfer"));
    int e_cold = epochs_to_converge(kl.at("cold"));
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "transfer within 5%% of final kl by epoch %d, cold by epoch %d", e_transfer,
                  e_cold);
    detail = buf;
    return e_transfer < e_cold;
}

// --- criterion 8: byte-identical CLI reruns ----------------------------------

int run_cli(const std::string& args) {
    std::string cmd = std::string("\"") + MESC_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return status == -1 ? -1 : WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) { return read_text_file(p); }

bool criterion_reproducibility(std::string& detail) {
    fs::path dir = fs::temp_directory_path() / ("mesc_accept_" + std::to_string(::getpid()));
    fs::create_directories(dir / "a");
    fs::create_directories(dir / "b");
    auto f = [&](const char* side, const char* name) { return (dir / side / name).string(); };

    for (const char* side : {"a", "b"}) {
        if (run_cli("gen-grid --seed 9 --out-grid " + f(side, "grid.json") + " --out-truth " +
                    f(side, "truth.json")) != 0 ||
            run_cli("sample-demos --grid " + f(side, "grid.json") + " --n 30 --seed 3 --out " +
                    f(side, "demos.jsonl")) != 0 ||
            run_cli("learn --grid " + f(side, "grid.json") + " --demos " +
                    f(side, "demos.jsonl") + " --epochs 25 --out-result " +
                    f(side, "result.json") + " --out-report " + f(side, "report.json")) != 0 ||
            run_cli("eval --grid " + f(side, "grid.json") + " --result " +
                    f(side, "result.json") + " --demos " + f(side, "demos.jsonl") +
                    " --episodes 100 --seed 5 --out " + f(side, "eval.csv")) != 0) {
            detail = "a CLI step exited nonzero";
            fs::remove_all(dir);
            return false;
        }
        nlohmann::json sweep_cfg = {
            {"demo_counts", {5, 10}}, {"n_repeats", 2},       {"demos_per_set", 10},
            {"learn", {{"epochs", 5}}}, {"zeta_thresholds", {0.6}}, {"chis", {0.2}},
            {"mean_reward_episodes", 50}, {"seed", 2},
            {"grid", {{"file", f(side, "grid.json")}}},
        };
        write_json_file(f(side, "sweep_cfg.json"), sweep_cfg);
        if (run_cli("sweep --config " + f(side, "sweep_cfg.json") + " --workers 3 --out-csv " +
                    f(side, "sweep.csv") + " --out-summary " + f(side, "summary.json")) != 0) {
            detail = "sweep exited nonzero";
            fs::remove_all(dir);
            return false;
        }
    }

    for (const char* name : {"grid.json", "truth.json", "demos.jsonl", "result.json",
                             "report.json", "eval.csv", "sweep.csv", "summary.json"})
        if (slurp(dir / "a" / name) != slurp(dir / "b" / name)) {
            detail = std::string("outputs differ: ") + name;
            fs::remove_all(dir);
            return false;
        }
    fs::remove_all(dir);
    return true;
}

// --- criterion 9: no phantom constraints from nominal demos ------------------

bool criterion_nominal_sanity(std::string& detail) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        RandomGridParams params;
        params.seed = seed;
        GridSpec spec = random_constrained_grid(params);
        TabularMdp mdp = build_gridworld(spec);
        DemoSet demos = sample_demonstrations(mdp, mdp.nominal_weights(), 100,
                                              derive_seed(seed, 77));
        LearnConfig lc;
        LearnResult res = mesc_irl(mdp, demos, lc);
        ConstraintReport rep = make_constraint_report(mdp, res.residual_weights);
        for (int fidx = 0; fidx < mdp.feature_dim(); ++fidx)
            if (rep.feature_zeta[fidx] >= 0.5) {
                char buf[160];
                std::snprintf(buf, sizeof(buf), "seed %" PRIu64 ": zeta[%d] = %.4g >= 0.5",
                              seed, fidx, rep.feature_zeta[fidx]);
                detail = buf;
                return false;
            }
    }
    return true;
}

} // namespace

int main() {
    run_criterion(1, "gradient matches central finite differences", criterion_gradient);
    run_criterion(2, "visitation matches exhaustive enumeration", criterion_visitation);
    run_criterion(3, "constraint probability formulas", criterion_probability);
    run_criterion(4, "hard constraint recovery improves with demos", criterion_hard_recovery);
    run_criterion(5, "soft recovery on random noisy grids", criterion_soft_recovery);
    run_criterion(6, "stricter threshold: fewer false positives, higher kl",
                  criterion_threshold_ordering);
    run_criterion(7, "transfer dominates cold start and converges faster", criterion_transfer);
    run_criterion(8, "seeded CLI runs are byte-identical", criterion_reproducibility);
    run_criterion(9, "nominal demos induce no phantom constraints", criterion_nominal_sanity);

    if (g_failures > 0) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
