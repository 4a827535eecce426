#pragma once

/// Dataset loading and validation, engine-play collection, the
/// rejection-sampling filter and buffer persistence.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vam/engine.hpp"
#include "vam/policy.hpp"
#include "vam/records.hpp"

namespace vam::data {

/// Empty when the record is consistent: FEN parses, legal list equals the
/// position's legal set, values in [0, 1] keyed by exactly the legal set,
/// allowed moves a non-empty subset of it, solution legal.
std::vector<std::string> validate_record(const TrainingRecord& r);

/// Loads and validates every line. Throws Error(IoFailure), or
/// Error(SchemaError) listing each bad line by number.
std::vector<TrainingRecord> load_dataset(const std::filesystem::path& path);

/// Appends (or, with append=false, replaces) records, one per line.
void persist_buffer(const std::vector<TrainingRecord>& records, const std::filesystem::path& path, bool append = true);
/// Like load_dataset, but an unterminated last line is a truncated write and
/// errors report byte offsets.
std::vector<TrainingRecord> load_buffer(const std::filesystem::path& path);

/// Copy of r whose solution is the value-map argmax over its allowed moves
/// (or the legal set). Throws Error(SchemaError) without a value map.
TrainingRecord with_argmax_solution(TrainingRecord r);

struct PlayConfig {
  int pool_size = 16;
  int max_plies = 200;
  int attempts = 3;  ///< model outputs tried per move before forfeiting
  int verifier_depth = 10;
  verifier::RewardKind reward_kind = verifier::RewardKind::ExpectedScore;
  std::uint64_t seed = 0;  ///< recorded in metadata

  /// Throws Error(ConfigError).
  void validate() const;
};

struct CollectStats {
  std::size_t games_started = 0;
  std::size_t games_finished = 0;  ///< ended by rule, mate or the ply cap
  std::size_t forfeits = 0;
  std::size_t invalid_outputs = 0;
};

struct CollectResult {
  std::vector<TrainingRecord> records;
  CollectStats stats;
};

/// Pool of games from the start position; the model plays White in even
/// slots and Black in odd ones, the opponent plays best_move at its
/// configured depth. Each sweep records every slot's position (either side
/// to move) with a verifier value map, stopping at exactly `budget` records,
/// then steps every slot once. Model moves use the baseline prompt; after
/// `attempts` invalid outputs the game is forfeited. Finished games restart.
CollectResult collect_by_play(policy::Policy& play_policy, engine::EngineHandle& opponent,
                              engine::EngineHandle& verifier, const PlayConfig& cfg, std::size_t budget);

struct SftExample {
  std::string fen;
  std::string prompt;
  std::string generation;
  std::string solution_uci;
};

struct FilterResult {
  std::vector<SftExample> accepted;
  std::size_t generations = 0;
  double acceptance_rate = 0.0;  ///< accepted / generations
};

/// Baseline-prompt generations kept only when they parse to the solution.
/// Throws Error(MissingSolution) if any record lacks one.
FilterResult rejection_filter(const std::vector<TrainingRecord>& records, policy::Policy& policy,
                              int samples_per_prompt);

}  // namespace vam::data
