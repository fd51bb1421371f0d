#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "mesc/learner.hpp"
#include "mesc/metrics.hpp"

namespace mesc {

// GridSpec <-> JSON. Field names are normative; unknown fields are rejected.
nlohmann::json grid_spec_to_json(const GridSpec& spec);
GridSpec grid_spec_from_json(const nlohmann::json& j);

// Demonstrations as JSON lines, one trajectory per line: [[s,a,s'], ...].
std::string demo_set_to_jsonl(const DemoSet& demos);
DemoSet demo_set_from_jsonl(const std::string& text);

nlohmann::json learn_result_to_json(const LearnResult& result, const TabularMdp& mdp);
// Residual weights only; the constrained side is recomputed against the mdp.
WeightVector residual_from_learn_result_json(const nlohmann::json& j);

nlohmann::json constraint_report_to_json(const ConstraintReport& report, const TabularMdp& mdp,
                                         bool include_transitions = false);
nlohmann::json ground_truth_to_json(const GroundTruth& truth);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

} // namespace mesc
