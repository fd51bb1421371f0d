// Command-line front end: grid generation, demonstration sampling, learning,
// constraint reports, evaluation, and the sweep/transfer experiment harness.
//
// Exit codes: 0 success, 2 usage/validation, 3 generation failure,
// 4 numerical divergence, 5 per-run experiment failures.

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mesc/experiments.hpp"
#include "mesc/io.hpp"
#include "mesc/rng.hpp"

namespace {

enum class LogLevel { error = 0, info = 1, debug = 2 };

LogLevel log_level() {
    const char* env = std::getenv("MESC_LOG");
    if (!env) return LogLevel::error;
    std::string v = env;
    if (v == "debug") return LogLevel::debug;
    if (v == "info") return LogLevel::info;
    return LogLevel::error;
}

void log_info(const std::string& msg) {
    if (log_level() >= LogLevel::info) std::cerr << "[info] " << msg << "\n";
}

constexpr int kExitUsage = 2;
constexpr int kExitGeneration = 3;
constexpr int kExitDivergence = 4;
constexpr int kExitRunFailures = 5;

mesc::TabularMdp load_mdp(const std::string& path) {
    return mesc::build_gridworld(mesc::grid_spec_from_json(mesc::read_json_file(path)));
}

int cmd_gen_grid(const std::string& out_grid, const std::string& out_truth,
                 const mesc::RandomGridParams& params) {
    mesc::GridSpec spec;
    try {
        spec = mesc::random_constrained_grid(params);
    } catch (const std::runtime_error& e) {
        std::cerr << "generation failed: " << e.what() << "\n";
        return kExitGeneration;
    }
    mesc::TabularMdp mdp = mesc::build_gridworld(spec);
    mesc::GroundTruth truth = mesc::make_ground_truth(mdp, spec);
    mesc::write_json_file(out_grid, mesc::grid_spec_to_json(spec));
    mesc::write_json_file(out_truth, mesc::ground_truth_to_json(truth));
    log_info("wrote " + out_grid + " and " + out_truth);
    return 0;
}

int cmd_sample_demos(const std::string& grid_file, int n, std::uint64_t seed,
                     const std::string& out) {
    mesc::TabularMdp mdp = load_mdp(grid_file);
    mesc::GroundTruth truth =
        mesc::make_ground_truth(mdp, mesc::grid_spec_from_json(mesc::read_json_file(grid_file)));
    mesc::DemoSet demos = mesc::sample_demonstrations(mdp, truth.constrained_weights, n, seed);
    mesc::write_text_file(out, mesc::demo_set_to_jsonl(demos));
    log_info("wrote " + std::to_string(demos.size()) + " demonstrations to " + out);
    return 0;
}

int cmd_learn(const std::string& grid_file, const std::string& demos_file,
              mesc::LearnConfig config, const std::string& init_file,
              const std::string& out_result, const std::string& out_report) {
    mesc::TabularMdp mdp = load_mdp(grid_file);
    mesc::DemoSet demos = mesc::demo_set_from_jsonl(mesc::read_text_file(demos_file));
    if (!init_file.empty())
        config.init_residual =
            mesc::residual_from_learn_result_json(mesc::read_json_file(init_file));

    mesc::LearnResult result;
    try {
        result = mesc::mesc_irl(mdp, demos, config);
    } catch (const mesc::DivergenceError& e) {
        std::cerr << "learner diverged: " << e.what() << "\n";
        return kExitDivergence;
    }
    mesc::write_json_file(out_result, mesc::learn_result_to_json(result, mdp));
    mesc::ConstraintReport report = mesc::make_constraint_report(mdp, result.residual_weights);
    mesc::write_json_file(out_report, mesc::constraint_report_to_json(report, mdp));

    std::printf("final_log_likelihood %.17g\n", result.log_likelihood_trace.back());
    std::printf("final_gradient_norm %.17g\n", result.gradient_norm_trace.back());
    return 0;
}

int cmd_report(const std::string& grid_file, const std::string& result_file,
               const std::string& out, bool transitions) {
    mesc::TabularMdp mdp = load_mdp(grid_file);
    mesc::WeightVector residual =
        mesc::residual_from_learn_result_json(mesc::read_json_file(result_file));
    mesc::ConstraintReport report = mesc::make_constraint_report(mdp, residual);
    mesc::write_json_file(out, mesc::constraint_report_to_json(report, mdp, transitions));
    return 0;
}

int cmd_eval(const std::string& grid_file, const std::string& result_file,
             const std::string& demos_file, const mesc::EvalConfig& eval, std::uint64_t seed,
             const std::string& out) {
    eval.validate();
    mesc::GridSpec spec = mesc::grid_spec_from_json(mesc::read_json_file(grid_file));
    mesc::TabularMdp mdp = mesc::build_gridworld(spec);
    mesc::GroundTruth truth = mesc::make_ground_truth(mdp, spec);
    mesc::DemoSet demos = mesc::demo_set_from_jsonl(mesc::read_text_file(demos_file));
    mesc::WeightVector residual =
        mesc::residual_from_learn_result_json(mesc::read_json_file(result_file));
    mesc::ConstraintReport report = mesc::make_constraint_report(mdp, residual);

    std::vector<mesc::ResultRow> rows;

    std::set<int> flagged;
    for (int f : mesc::binarize_features(report, eval.zeta_threshold))
        if (f < mdp.num_states()) flagged.insert(f);
    mesc::WeightVector hardened = mesc::harden_weights(mdp, flagged, eval.hard_cost);
    mesc::SoftPolicy hard_pol = mesc::soft_backward(mdp, hardened, mdp.horizon());
    mesc::ResultRow hard_row;
    hard_row.run_id = "eval_hard";
    hard_row.demo_count = static_cast<int>(demos.size());
    hard_row.zeta = eval.zeta_threshold;
    hard_row.fp_hard = mesc::false_positive_rate_hard(flagged, truth);
    hard_row.kl = mesc::kl_to_demos(mdp, hardened, demos);
    hard_row.mean_reward = mesc::mean_reward(mdp, truth.constrained_weights, hard_pol,
                                             eval.kl_sample_count, seed);
    rows.push_back(hard_row);

    mesc::WeightVector learned = mdp.nominal_weights() - residual;
    mesc::SoftPolicy soft_pol = mesc::soft_backward(mdp, learned, mdp.horizon());
    mesc::ResultRow soft_row;
    soft_row.run_id = "eval_soft";
    soft_row.demo_count = static_cast<int>(demos.size());
    soft_row.chi = eval.chi;
    soft_row.fp_soft = mesc::false_positive_rate_soft(report, truth, eval.chi);
    soft_row.kl = mesc::kl_to_demos(mdp, learned, demos);
    soft_row.mean_reward = mesc::mean_reward(mdp, truth.constrained_weights, soft_pol,
                                             eval.kl_sample_count, seed);
    rows.push_back(soft_row);

    std::string csv = mesc::rows_to_csv(rows);
    if (out.empty())
        std::fputs(csv.c_str(), stdout);
    else
        mesc::write_text_file(out, csv);
    return 0;
}

int write_experiment_outputs(mesc::ExperimentResult result, const std::string& out_csv,
                             const std::string& out_summary) {
    // Timing is log-only: output files must be byte-identical across reruns
    // with the same seed, so the wall_time_ms column is left empty.
    double total_ms = 0.0;
    for (auto& row : result.rows) {
        total_ms += row.wall_time_ms;
        row.wall_time_ms = std::numeric_limits<double>::quiet_NaN();
    }
    log_info("total run time " + std::to_string(total_ms / 1000.0) + "s across rows");
    mesc::write_text_file(out_csv, mesc::rows_to_csv(result.rows));
    mesc::write_json_file(out_summary, result.summary);
    if (result.any_failed) {
        std::cerr << "some runs failed; see the error column in " << out_csv << "\n";
        return kExitRunFailures;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Soft constraint learning from demonstrations in gridworld MDPs"};
    app.require_subcommand(1);

    // gen-grid
    auto* gen = app.add_subcommand("gen-grid", "Generate a random constrained grid");
    mesc::RandomGridParams params;
    bool deterministic = false;
    gen->add_option("--seed", params.seed);
    gen->add_option("--width", params.width);
    gen->add_option("--height", params.height);
    gen->add_option("--n-blue", params.n_blue);
    gen->add_option("--n-green", params.n_green);
    gen->add_option("--n-constrained", params.n_constrained_states);
    gen->add_option("--cost", params.constraint_cost);
    gen->add_option("--blue-cost", params.blue_cost);
    gen->add_option("--green-cost", params.green_cost);
    gen->add_option("--min-distance", params.min_start_goal_distance);
    gen->add_option("--failure-prob", params.action_failure_prob);
    gen->add_flag("--deterministic", deterministic, "Set action failure probability to 0");
    gen->add_option("--horizon", params.horizon);
    std::string out_grid = "grid.json", out_truth = "truth.json";
    gen->add_option("--out-grid", out_grid);
    gen->add_option("--out-truth", out_truth);

    // sample-demos
    auto* sample = app.add_subcommand("sample-demos",
                                      "Sample demonstrations in the ground-truth world");
    std::string sd_grid, sd_out = "demos.jsonl";
    int sd_n = 100;
    std::uint64_t sd_seed = 0;
    sample->add_option("--grid", sd_grid)->required()->check(CLI::ExistingFile);
    sample->add_option("--n", sd_n);
    sample->add_option("--seed", sd_seed);
    sample->add_option("--out", sd_out);

    // learn
    auto* learn = app.add_subcommand("learn", "Learn residual constraint penalties");
    std::string ln_grid, ln_demos, ln_init, ln_result = "result.json", ln_report = "report.json";
    mesc::LearnConfig learn_cfg;
    learn->add_option("--grid", ln_grid)->required()->check(CLI::ExistingFile);
    learn->add_option("--demos", ln_demos)->required()->check(CLI::ExistingFile);
    learn->add_option("--epochs", learn_cfg.epochs);
    learn->add_option("--learning-rate", learn_cfg.learning_rate);
    learn->add_option("--l2", learn_cfg.l2_penalty);
    learn->add_option("--seed", learn_cfg.seed);
    learn->add_option("--init", ln_init, "Warm-start residual from a previous learn result")
        ->check(CLI::ExistingFile);
    learn->add_option("--out-result", ln_result);
    learn->add_option("--out-report", ln_report);

    // report
    auto* report = app.add_subcommand("report", "Constraint probabilities from a learn result");
    std::string rp_grid, rp_result, rp_out = "report.json";
    bool rp_transitions = false;
    report->add_option("--grid", rp_grid)->required()->check(CLI::ExistingFile);
    report->add_option("--result", rp_result)->required()->check(CLI::ExistingFile);
    report->add_option("--out", rp_out);
    report->add_flag("--transitions", rp_transitions, "Include per-transition zeta");

    // eval
    auto* eval = app.add_subcommand("eval", "Evaluate a learn result against ground truth");
    std::string ev_grid, ev_result, ev_demos, ev_out;
    mesc::EvalConfig eval_cfg;
    std::uint64_t ev_seed = 0;
    eval->add_option("--grid", ev_grid)->required()->check(CLI::ExistingFile);
    eval->add_option("--result", ev_result)->required()->check(CLI::ExistingFile);
    eval->add_option("--demos", ev_demos)->required()->check(CLI::ExistingFile);
    eval->add_option("--zeta-threshold", eval_cfg.zeta_threshold);
    eval->add_option("--chi", eval_cfg.chi);
    eval->add_option("--hard-cost", eval_cfg.hard_cost);
    eval->add_option("--episodes", eval_cfg.kl_sample_count);
    eval->add_option("--seed", ev_seed);
    eval->add_option("--out", ev_out, "CSV output path (stdout when omitted)");

    // sweep / transfer
    auto* sweep = app.add_subcommand("sweep", "Demonstration-count sweep experiment");
    std::string sw_config, sw_csv = "sweep.csv", sw_summary = "sweep_summary.json";
    int sw_workers = 0;
    sweep->add_option("--config", sw_config)->required()->check(CLI::ExistingFile);
    sweep->add_option("--out-csv", sw_csv);
    sweep->add_option("--out-summary", sw_summary);
    sweep->add_option("--workers", sw_workers, "Override the config's worker count");

    auto* transfer = app.add_subcommand("transfer", "Constraint transfer experiment");
    std::string tr_config, tr_csv = "transfer.csv", tr_summary = "transfer_summary.json";
    int tr_workers = 0;
    transfer->add_option("--config", tr_config)->required()->check(CLI::ExistingFile);
    transfer->add_option("--out-csv", tr_csv);
    transfer->add_option("--out-summary", tr_summary);
    transfer->add_option("--workers", tr_workers, "Override the config's worker count");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (gen->parsed()) {
            if (deterministic) params.action_failure_prob = 0.0;
            return cmd_gen_grid(out_grid, out_truth, params);
        }
        if (sample->parsed()) return cmd_sample_demos(sd_grid, sd_n, sd_seed, sd_out);
        if (learn->parsed())
            return cmd_learn(ln_grid, ln_demos, learn_cfg, ln_init, ln_result, ln_report);
        if (report->parsed()) return cmd_report(rp_grid, rp_result, rp_out, rp_transitions);
        if (eval->parsed()) return cmd_eval(ev_grid, ev_result, ev_demos, eval_cfg, ev_seed, ev_out);
        if (sweep->parsed()) {
            mesc::SweepConfig cfg =
                mesc::sweep_config_from_json(mesc::read_json_file(sw_config));
            if (sw_workers > 0) cfg.workers = sw_workers;
            log_info("running sweep with " + std::to_string(cfg.n_repeats) + " repeats");
            return write_experiment_outputs(mesc::run_sweep(cfg), sw_csv, sw_summary);
        }
        if (transfer->parsed()) {
            mesc::TransferConfig cfg =
                mesc::transfer_config_from_json(mesc::read_json_file(tr_config));
            if (tr_workers > 0) cfg.workers = tr_workers;
            log_info("running transfer over " + std::to_string(cfg.n_grids) + " grid pairs");
            return write_experiment_outputs(mesc::run_transfer(cfg), tr_csv, tr_summary);
        }
    } catch (const mesc::DivergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDivergence;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return 0;
}
