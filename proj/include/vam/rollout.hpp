#pragma once

/// Grouped sampling, iterative action-space pruning and batch export.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vam/chess.hpp"
#include "vam/policy.hpp"
#include "vam/prompt.hpp"
#include "vam/verifier.hpp"

namespace vam::rollout {

struct GrpoConfig {
  int group_size = 8;
  int max_rounds = 4;
  double clip_eps = 0.2;
  double kl_coef = 1e-3;
  double std_floor = 1e-8;
  double temperature = 1.0;
  double top_p = 1.0;
  int max_response_tokens = 2000;

  /// Throws Error(ConfigError).
  void validate() const;
};

struct RolloutGroup {
  chess::Position base_position;
  std::vector<chess::UciMove> mask_snapshot;
  std::string prompt_text;
  std::vector<std::string> outputs;
  std::vector<prompt::ParsedOutput> parsed;
  std::vector<double> rewards;
  std::vector<double> advantages;
  int round_index = 1;
};

struct PruneTrace {
  std::vector<RolloutGroup> groups;
  verifier::TargetAction target;
  std::optional<int> target_found_round;
  int rounds_used = 0;
};

/// G raw outputs for one request. Throws Error(InvalidArgument) for G < 1 and
/// Error(LengthMismatch) when the policy returns the wrong count.
std::vector<std::string> sample_group(policy::Policy& policy, const policy::PolicyRequest& request, int group_size);

/// One trace of the prune-and-resample loop on position s, starting from
/// mask m0. Every round renders a selection prompt for the current mask,
/// rewards outputs against that mask, and removes the distinct valid sampled
/// moves unless the target was among them. Groups of size 1 get zero
/// advantages. Throws Error(EmptyMask) for an empty m0, Error(UnknownMove)
/// when m0 is not covered by vm or contains an illegal move.
PruneTrace prune_and_sample(policy::Policy& policy, const chess::Position& s, const verifier::ValueMap& vm,
                            std::vector<chess::UciMove> m0, const GrpoConfig& cfg, double penalty);

/// Distinct valid moves of a group in ascending order.
std::vector<chess::UciMove> distinct_valid(const RolloutGroup& g);

nlohmann::json group_to_json(const RolloutGroup& g);

/// One line per group across all traces, keys sorted, in trace order.
/// Truncates the file. Throws Error(IoFailure).
std::size_t export_batch(const std::vector<PruneTrace>& traces, const std::filesystem::path& path);

}  // namespace vam::rollout
