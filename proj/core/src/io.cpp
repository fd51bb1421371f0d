#include "mesc/io.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace mesc {

using nlohmann::json;

namespace {

Color color_from_name(const std::string& name) {
    if (name == "blue") return Color::blue;
    if (name == "green") return Color::green;
    if (name == "none") return Color::none;
    throw std::invalid_argument("unknown color: " + name);
}

const char* color_name(Color c) {
    switch (c) {
        case Color::blue: return "blue";
        case Color::green: return "green";
        default: return "none";
    }
}

int action_from_name(const std::string& name) {
    for (int a = 0; a < kNumActions; ++a)
        if (name == action_name(a)) return a;
    throw std::invalid_argument("unknown action: " + name);
}

} // namespace

json grid_spec_to_json(const GridSpec& spec) {
    json j;
    j["width"] = spec.width;
    j["height"] = spec.height;
    json start = json::array();
    for (auto [s, p] : spec.start_distribution) start.push_back({s, p});
    j["start"] = start;
    j["goal"] = spec.goal_state;
    json colors = json::object();
    for (auto [s, c] : spec.color_of_state)
        if (c != Color::none) colors[std::to_string(s)] = color_name(c);
    j["colors"] = colors;
    json cs = json::object();
    for (auto [s, cost] : spec.constrained_states) cs[std::to_string(s)] = cost;
    j["constrained_states"] = cs;
    json ca = json::object();
    for (auto [a, cost] : spec.constrained_actions) ca[action_name(a)] = cost;
    j["constrained_actions"] = ca;
    json cc = json::object();
    for (auto [c, cost] : spec.constrained_colors) cc[color_name(c)] = cost;
    j["constrained_colors"] = cc;
    j["action_failure_prob"] = spec.action_failure_prob;
    j["horizon"] = spec.horizon;
    j["discount"] = spec.discount;
    j["goal_bonus"] = spec.goal_bonus;
    return j;
}

GridSpec grid_spec_from_json(const json& j) {
    static const std::set<std::string> allowed = {
        "width", "height", "start", "goal", "colors", "constrained_states",
        "constrained_actions", "constrained_colors", "action_failure_prob",
        "horizon", "discount", "goal_bonus"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw std::invalid_argument("unknown GridSpec field: " + it.key());

    GridSpec spec;
    spec.width = j.at("width").get<int>();
    spec.height = j.at("height").get<int>();
    spec.goal_state = j.at("goal").get<int>();
    for (const auto& entry : j.at("start"))
        spec.start_distribution.push_back({entry.at(0).get<int>(), entry.at(1).get<double>()});
    if (j.contains("colors"))
        for (auto it = j["colors"].begin(); it != j["colors"].end(); ++it)
            spec.color_of_state[std::stoi(it.key())] = color_from_name(it.value().get<std::string>());
    if (j.contains("constrained_states"))
        for (auto it = j["constrained_states"].begin(); it != j["constrained_states"].end(); ++it)
            spec.constrained_states[std::stoi(it.key())] = it.value().get<double>();
    if (j.contains("constrained_actions"))
        for (auto it = j["constrained_actions"].begin(); it != j["constrained_actions"].end(); ++it)
            spec.constrained_actions[action_from_name(it.key())] = it.value().get<double>();
    if (j.contains("constrained_colors"))
        for (auto it = j["constrained_colors"].begin(); it != j["constrained_colors"].end(); ++it)
            spec.constrained_colors[color_from_name(it.key())] = it.value().get<double>();
    if (j.contains("action_failure_prob")) spec.action_failure_prob = j["action_failure_prob"].get<double>();
    if (j.contains("horizon")) spec.horizon = j["horizon"].get<int>();
    if (j.contains("discount")) spec.discount = j["discount"].get<double>();
    if (j.contains("goal_bonus")) spec.goal_bonus = j["goal_bonus"].get<double>();
    spec.validate();
    return spec;
}

std::string demo_set_to_jsonl(const DemoSet& demos) {
    std::ostringstream out;
    for (const Trajectory& tau : demos) {
        json line = json::array();
        for (const Step& st : tau.steps) line.push_back({st.state, st.action, st.next_state});
        out << line.dump() << "\n";
    }
    return out.str();
}

DemoSet demo_set_from_jsonl(const std::string& text) {
    DemoSet demos;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        Trajectory tau;
        for (const auto& triple : j)
            tau.steps.push_back({triple.at(0).get<int>(), triple.at(1).get<int>(),
                                 triple.at(2).get<int>()});
        demos.push_back(std::move(tau));
    }
    return demos;
}

json learn_result_to_json(const LearnResult& result, const TabularMdp& mdp) {
    json j;
    j["residual_weights"] = result.residual_weights.values;
    j["nominal_weights"] = mdp.nominal_weights().values;
    j["goal_bonus"] = mdp.nominal_weights().goal_bonus;
    j["log_likelihood_trace"] = result.log_likelihood_trace;
    j["gradient_norm_trace"] = result.gradient_norm_trace;
    return j;
}

WeightVector residual_from_learn_result_json(const json& j) {
    WeightVector w;
    w.values = j.at("residual_weights").get<std::vector<double>>();
    return w;
}

json constraint_report_to_json(const ConstraintReport& report, const TabularMdp& mdp,
                               bool include_transitions) {
    json j;
    j["feature_zeta"] = report.feature_zeta;
    j["residual_weights"] = report.residual_weights.values;
    j["sigma"] = {{"nominal", report.scale.sigma_nominal},
                  {"constrained", report.scale.sigma_constrained},
                  {"pooled", report.scale.sigma_pooled}};
    if (include_transitions) {
        json trans = json::array();
        const auto& list = mdp.transitions();
        for (std::size_t i = 0; i < list.size(); ++i)
            trans.push_back({{"s", list[i].state},
                             {"a", list[i].action},
                             {"s2", list[i].next_state},
                             {"residual", report.residual_rewards[i]},
                             {"zeta", report.transition_zeta[i]}});
        j["transitions"] = trans;
    }
    return j;
}

json ground_truth_to_json(const GroundTruth& truth) {
    json j;
    j["feature_residual"] = truth.true_residual.values;
    j["feature_zeta"] = truth.feature_zeta;
    j["sigma_pooled"] = truth.scale.sigma_pooled;
    return j;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path.string());
    out << content;
}

json read_json_file(const std::filesystem::path& path) {
    return json::parse(read_text_file(path));
}

void write_json_file(const std::filesystem::path& path, const json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

} // namespace mesc
