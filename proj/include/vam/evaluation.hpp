#pragma once

/// Puzzle pass@1 and full-game ACPL evaluation.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vam/engine.hpp"
#include "vam/policy.hpp"
#include "vam/prompt.hpp"
#include "vam/records.hpp"

namespace vam::eval {

inline constexpr int kMateScore = 1000;
inline constexpr int kDefaultCap = 1000;

/// max(0, before - after), clamped to cap.
double cpl(double e_before, double e_after, int cap = kDefaultCap);

/// Centipawns for `mover`, given an evaluation reported for `reported_for`
/// (the side to move of the analyzed position). Mate maps to +-1000, then
/// the magnitude is clamped to cap.
double to_mover_pov(const engine::EngineEval& e, chess::Color reported_for, chess::Color mover, int cap = kDefaultCap);

enum class GameResult { Win, Loss, Draw, Forfeit };
std::string_view to_string(GameResult r) noexcept;

struct MoveAnalysis {
  int ply = 0;  ///< 0-based ply index in the game
  chess::Color mover = chess::Color::White;
  chess::UciMove move;
  double e_before = 0.0;
  double e_after = 0.0;
  double cpl = 0.0;
  int attempts = 1;             ///< outputs needed for a valid move
  bool before_time_bound = false;  ///< movetime stopped the search first
  bool after_time_bound = false;
};

struct GameRecord {
  chess::Color model_color = chess::Color::White;
  int opponent_depth = 1;
  GameResult result = GameResult::Draw;
  bool capped = false;  ///< stopped by the ply cap
  int plies = 0;
  std::vector<chess::UciMove> uci_moves;  ///< every ply, both sides
  std::vector<MoveAnalysis> moves;        ///< model moves only
  int invalid_outputs = 0;

  /// Mean CPL of the model's moves; cap when it made none.
  double acpl(int cap = kDefaultCap) const;
};

struct GameConfig {
  int max_plies = 200;
  int attempts = 3;
  int cap = kDefaultCap;
  int analyzer_depth = 20;
  std::optional<int> analyzer_movetime_ms = 1000;
  prompt::TemplateKind prompt_kind = prompt::TemplateKind::Baseline;
  /// Value maps for policies that read them.
  engine::EngineHandle* value_engine = nullptr;
  int value_depth = 10;
  verifier::RewardKind reward_kind = verifier::RewardKind::ExpectedScore;

  void validate() const;
};

/// One game from the start position. The opponent plays best_move at its
/// configured depth; each model move is analyzed before and after with
/// independent analyzer queries.
GameRecord play_game(policy::Policy& policy, engine::EngineHandle& opponent, chess::Color model_color,
                     engine::EngineHandle& analyzer, const GameConfig& cfg);

struct AcplSummary {
  double overall_acpl = 0.0;  ///< mean of per-game ACPL
  double acpl_per_move = 0.0;  ///< total CPL / model moves (forfeits with no moves count as one move at cap)
  int games = 0;
  int forfeits = 0;
  int wins = 0;
  int draws = 0;
  int losses = 0;
  int model_moves = 0;
};

AcplSummary summarize(const std::vector<GameRecord>& games, int cap = kDefaultCap);

struct AcplReport {
  AcplSummary overall;
  std::map<int, AcplSummary> per_depth;
  std::vector<GameRecord> games;
};

AcplReport build_report(std::vector<GameRecord> games, int cap = kDefaultCap);

/// Color-balanced schedule (half White, half Black per depth) shuffled with
/// the seed. Throws Error(InvalidArgument) for an odd or zero count.
std::vector<std::pair<int, chess::Color>> game_schedule(const std::vector<int>& depths, int games_per_depth,
                                                        std::uint64_t seed);

/// Plays the schedule sequentially. The opponent for depth d is a fresh
/// engine from `opponent_cfg` with search_depth = d.
AcplReport eval_games(policy::Policy& policy, const engine::EngineConfig& opponent_cfg, engine::EngineHandle& analyzer,
                      const std::vector<int>& depths, int games_per_depth, std::uint64_t seed, const GameConfig& cfg);

struct PuzzleRow {
  std::string fen;
  std::string solution_uci;
  std::string output;
  std::string verdict;
  bool pass = false;
  std::optional<double> selected_value;
};

struct PuzzleResult {
  std::size_t total = 0;
  double pass1_rate = 0.0;
  double format_rate = 0.0;
  double legality_rate = 0.0;
  double mask_rate = 0.0;
  std::optional<double> mean_selected_value;
  std::vector<PuzzleRow> rows;
};

/// One generation per puzzle. In selection mode the mask is the record's
/// allowed moves, else the legal set. Throws Error(MissingSolution).
PuzzleResult eval_puzzles(policy::Policy& policy, const std::vector<data::TrainingRecord>& puzzles,
                          prompt::TemplateKind mode);

inline constexpr int kReportSchemaVersion = 1;

nlohmann::json to_json(const PuzzleResult& r);
nlohmann::json to_json(const AcplReport& r);
nlohmann::json to_json(const GameRecord& g);

/// Writes <stem>.json (with the resolved config under "config") and CSV
/// files next to it: <stem>.csv for puzzles, <stem>_games.csv and
/// <stem>_moves.csv for games. Throws Error(IoFailure).
void write_puzzle_report(const PuzzleResult& r, const nlohmann::json& config, const std::filesystem::path& json_path);
void write_acpl_report(const AcplReport& r, const nlohmann::json& config, const std::filesystem::path& json_path);

}  // namespace vam::eval
