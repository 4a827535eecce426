#pragma once

/// Run configuration: one JSON document whose keys mirror the domain types.
/// Files may give any subset of keys; the rest keep their defaults. Unknown
/// keys are rejected so typos do not silently fall back to defaults.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vam/data_pipeline.hpp"
#include "vam/engine.hpp"
#include "vam/evaluation.hpp"
#include "vam/mask_mdp.hpp"
#include "vam/policy.hpp"
#include "vam/rollout.hpp"

namespace vam::config {

inline constexpr int kConfigSchemaVersion = 1;

struct VerifierSettings {
  int depth = 10;
  verifier::RewardKind reward_kind = verifier::RewardKind::ExpectedScore;
};

struct CollectSettings {
  int pool_size = 16;
  int budget = 64;
  int max_plies = 200;
  int attempts = 3;
};

struct PruneSettings {
  int max_states = 0;  ///< 0 = every dataset record
};

struct EvalSettings {
  std::vector<int> depths{1, 5};
  int games_per_depth = 50;
  int max_plies = 200;
  int attempts = 3;
  int cap = 1000;
  prompt::TemplateKind game_prompt = prompt::TemplateKind::Baseline;
  prompt::TemplateKind puzzle_mode = prompt::TemplateKind::VamSelection;
};

struct Paths {
  std::string dataset;
  std::string buffer = "buffer.jsonl";
  std::string batch = "batch.jsonl";
  std::string reports = "reports";
};

struct RunConfig {
  std::uint64_t seed = 0;
  engine::EngineConfig opponent;  ///< skill 0, depth 1
  engine::EngineConfig analyzer;  ///< depth 20, movetime 1000; also the verifier engine
  VerifierSettings verifier;
  rollout::GrpoConfig grpo;
  mdp::MaskMdpConfig mask_mdp;
  policy::PolicyConfig policy;
  CollectSettings collect;
  PruneSettings prune;
  EvalSettings eval;
  Paths paths;

  RunConfig();
  /// Throws Error(ConfigError).
  void validate() const;

  /// policy config with the run seed and the grpo generation parameters.
  policy::PolicyConfig resolved_policy() const;
  eval::GameConfig game_config() const;
  data::PlayConfig play_config() const;
};

nlohmann::json to_json(const RunConfig& c);
/// Throws Error(ConfigError) on unknown keys or wrong types.
RunConfig from_json(const nlohmann::json& j);

/// "a.b.c=value"; value is parsed as JSON when possible, else taken as a string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Defaults, then the file (if any), then overrides in order.
RunConfig load(const std::optional<std::filesystem::path>& path, const std::vector<std::string>& overrides);

}  // namespace vam::config
