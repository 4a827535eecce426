#pragma once

/// Engine-derived verifier scores mu(s, a) in [0, 1], the three reward
/// variants, and target-action selection.

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "vam/chess.hpp"
#include "vam/engine.hpp"

namespace vam::verifier {

enum class RewardKind { ExpectedScore, WinRate, Rank };

std::string_view to_string(RewardKind kind) noexcept;
/// Accepts "expected_score", "win_rate", "rank". Throws Error(ConfigError).
RewardKind parse_reward_kind(std::string_view text);

struct ValueMap {
  std::map<chess::UciMove, double> scores;
  RewardKind reward_kind = RewardKind::ExpectedScore;
  int source_depth = 0;

  bool contains(const chess::UciMove& m) const { return scores.count(m) > 0; }
  /// Throws Error(UnknownMove).
  double at(const chess::UciMove& m) const;
  std::vector<chess::UciMove> moves() const;
};

/// p_W + p_D / 2. Throws Error(UnnormalizedWdl).
double mu_exp(const engine::Wdl& wdl);
/// p_W. Throws Error(UnnormalizedWdl).
double mu_win(const engine::Wdl& wdl);

/// Linear rank transform of expected scores: best gets 1, worst 0, and rank i
/// (1-based, descending score, ties broken by ascending UCI string) gets
/// 1 - (i-1)/(k-1). A single move gets 1.
ValueMap mu_rank(const std::map<chess::UciMove, double>& exp_scores);

/// Ordering used for every "best move" decision: higher score first, then
/// lexicographically smaller UCI string.
bool better(const chess::UciMove& a, double score_a, const chess::UciMove& b, double score_b);

struct TargetAction {
  chess::UciMove move;
  double score = 0.0;
  int tie_count = 1;  ///< moves in the mask sharing the maximum score
};

/// Argmax of vm over mask, ties to the smallest UCI string. Throws
/// Error(EmptyMask) or Error(UnknownMove).
TargetAction target_action(const ValueMap& vm, const std::vector<chess::UciMove>& mask);

/// Scores every legal move of p with the engine and converts to the
/// requested variant. Rank is computed from expected scores.
ValueMap build_value_map(engine::EngineHandle& h, const chess::Position& p, RewardKind kind, int depth);

/// Same conversion from precomputed engine scores.
ValueMap value_map_from_scores(const engine::MoveScores& scores, RewardKind kind, int depth);

}  // namespace vam::verifier
