#include "vam/verifier.hpp"

#include <algorithm>
#include <cmath>

#include "vam/error.hpp"

namespace vam::verifier {

using chess::UciMove;

std::string_view to_string(RewardKind kind) noexcept {
  switch (kind) {
    case RewardKind::ExpectedScore: return "expected_score";
    case RewardKind::WinRate: return "win_rate";
    case RewardKind::Rank: return "rank";
  }
  return "expected_score";
}

RewardKind parse_reward_kind(std::string_view text) {
  if (text == "expected_score") return RewardKind::ExpectedScore;
  if (text == "win_rate") return RewardKind::WinRate;
  if (text == "rank") return RewardKind::Rank;
  throw Error(ErrorKind::ConfigError, "unknown reward kind '" + std::string(text) + "'");
}

double ValueMap::at(const UciMove& m) const {
  const auto it = scores.find(m);
  if (it == scores.end()) throw Error(ErrorKind::UnknownMove, m.str() + " has no verifier score");
  return it->second;
}

std::vector<UciMove> ValueMap::moves() const {
  std::vector<UciMove> out;
  out.reserve(scores.size());
  for (const auto& [m, _] : scores) out.push_back(m);
  return out;
}

namespace {

void check_wdl(const engine::Wdl& wdl) {
  if (!wdl.normalized()) {
    throw Error(ErrorKind::UnnormalizedWdl, "wdl (" + std::to_string(wdl.win) + ", " + std::to_string(wdl.draw) +
                                                ", " + std::to_string(wdl.loss) + ")");
  }
}

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

}  // namespace

double mu_exp(const engine::Wdl& wdl) {
  check_wdl(wdl);
  return clamp01(wdl.win + wdl.draw / 2.0);
}

double mu_win(const engine::Wdl& wdl) {
  check_wdl(wdl);
  return clamp01(wdl.win);
}

bool better(const UciMove& a, double score_a, const UciMove& b, double score_b) {
  if (score_a != score_b) return score_a > score_b;
  return a < b;
}

ValueMap mu_rank(const std::map<UciMove, double>& exp_scores) {
  std::vector<std::pair<UciMove, double>> order(exp_scores.begin(), exp_scores.end());
  std::sort(order.begin(), order.end(),
            [](const auto& x, const auto& y) { return better(x.first, x.second, y.first, y.second); });
  ValueMap vm;
  vm.reward_kind = RewardKind::Rank;
  const auto k = order.size();
  for (std::size_t i = 0; i < k; ++i) {
    const double value = k == 1 ? 1.0 : 1.0 - static_cast<double>(i) / static_cast<double>(k - 1);
    vm.scores.emplace(order[i].first, value);
  }
  return vm;
}

TargetAction target_action(const ValueMap& vm, const std::vector<UciMove>& mask) {
  if (mask.empty()) throw Error(ErrorKind::EmptyMask, "target action needs a nonempty mask");
  const UciMove* best = nullptr;
  double best_score = 0.0;
  for (const auto& m : mask) {
    const double s = vm.at(m);
    if (!best || better(m, s, *best, best_score)) {
      best = &m;
      best_score = s;
    }
  }
  const auto ties = std::count_if(mask.begin(), mask.end(), [&](const UciMove& m) { return vm.at(m) == best_score; });
  return TargetAction{*best, best_score, static_cast<int>(ties)};
}

ValueMap value_map_from_scores(const engine::MoveScores& scores, RewardKind kind, int depth) {
  std::map<UciMove, double> values;
  for (const auto& [m, eval] : scores) {
    const engine::Wdl wdl = engine::resolve_wdl(eval);
    values.emplace(m, kind == RewardKind::WinRate ? mu_win(wdl) : mu_exp(wdl));
  }
  ValueMap vm;
  if (kind == RewardKind::Rank) {
    vm = mu_rank(values);
  } else {
    vm.scores = std::move(values);
  }
  vm.reward_kind = kind;
  vm.source_depth = depth;
  return vm;
}

ValueMap build_value_map(engine::EngineHandle& h, const chess::Position& p, RewardKind kind, int depth) {
  if (chess::game_outcome(p).terminal()) throw Error(ErrorKind::TerminalPosition, p.fen());
  return value_map_from_scores(h.score_moves(p, chess::legal_moves(p), depth), kind, depth);
}

}  // namespace vam::verifier
