#include <doctest.h>

#include "support.hpp"
#include "vam/error.hpp"
#include "vam/verifier.hpp"

using namespace vam;
using namespace vam::verifier;
using chess::UciMove;

namespace {

UciMove mv(const char* s) { return UciMove::parse(s); }

}  // namespace

TEST_CASE("expected score and win rate") {
  CHECK(mu_exp({0.2, 0.6, 0.2}) == 0.5);
  CHECK(mu_exp({1, 0, 0}) == 1.0);
  CHECK(mu_exp({0, 0, 1}) == 0.0);
  CHECK(mu_win({0.25, 0.5, 0.25}) == 0.25);
  CHECK_THROWS_AS(mu_exp({0.5, 0.5, 0.5}), Error);
  CHECK_THROWS_AS(mu_win({-0.1, 0.6, 0.5}), Error);
}

TEST_CASE("rank transform") {
  const auto r = mu_rank({{mv("a2a3"), 0.9}, {mv("b2b3"), 0.5}, {mv("c2c3"), 0.1}});
  CHECK(r.at(mv("a2a3")) == 1.0);
  CHECK(r.at(mv("b2b3")) == 0.5);
  CHECK(r.at(mv("c2c3")) == 0.0);
  CHECK(r.reward_kind == RewardKind::Rank);

  CHECK(mu_rank({{mv("e2e4"), 0.3}}).at(mv("e2e4")) == 1.0);

  // ties keep distinct ranks, smaller string first
  const auto t = mu_rank({{mv("h2h3"), 0.5}, {mv("a2a3"), 0.5}, {mv("d2d4"), 0.7}});
  CHECK(t.at(mv("d2d4")) == 1.0);
  CHECK(t.at(mv("a2a3")) == 0.5);
  CHECK(t.at(mv("h2h3")) == 0.0);
}

TEST_CASE("target action") {
  ValueMap vm;
  vm.scores = {{mv("a2a3"), 0.4}, {mv("b2b3"), 0.7}, {mv("c2c3"), 0.7}, {mv("d2d3"), 0.1}};
  const auto all = vm.moves();
  const auto t = target_action(vm, all);
  CHECK(t.move == mv("b2b3"));
  CHECK(t.tie_count == 2);
  CHECK(t.score == 0.7);
  CHECK(target_action(vm, {mv("d2d3"), mv("a2a3")}).move == mv("a2a3"));
  CHECK_THROWS_AS(target_action(vm, {}), Error);
  CHECK_THROWS_AS(target_action(vm, {mv("e2e4")}), Error);
  CHECK_THROWS_AS(vm.at(mv("e2e4")), Error);
  CHECK(better(mv("a2a3"), 0.5, mv("b2b3"), 0.5));
  CHECK(better(mv("b2b3"), 0.6, mv("a2a3"), 0.5));
}

TEST_CASE("reward kind names") {
  CHECK(parse_reward_kind("expected_score") == RewardKind::ExpectedScore);
  CHECK(parse_reward_kind("win_rate") == RewardKind::WinRate);
  CHECK(parse_reward_kind("rank") == RewardKind::Rank);
  CHECK(to_string(RewardKind::WinRate) == "win_rate");
  CHECK_THROWS_AS(parse_reward_kind("elo"), Error);
}

TEST_CASE("value maps from engine scores") {
  engine::MoveScores scores;
  scores.emplace(mv("a2a3"), engine::EngineEval::centipawns(0, engine::Wdl{0.1, 0.8, 0.1}));
  scores.emplace(mv("b2b3"), engine::EngineEval::mate_in(2));
  scores.emplace(mv("c2c3"), engine::EngineEval::centipawns(-400));
  const auto e = value_map_from_scores(scores, RewardKind::ExpectedScore, 7);
  CHECK(e.source_depth == 7);
  CHECK(e.at(mv("a2a3")) == doctest::Approx(0.5));
  CHECK(e.at(mv("b2b3")) == 1.0);
  CHECK(e.at(mv("c2c3")) == doctest::Approx(1.0 - 1.0 / 1.1));
  const auto w = value_map_from_scores(scores, RewardKind::WinRate, 7);
  CHECK(w.at(mv("a2a3")) == doctest::Approx(0.1));
  const auto r = value_map_from_scores(scores, RewardKind::Rank, 7);
  CHECK(r.at(mv("b2b3")) == 1.0);
  CHECK(r.at(mv("c2c3")) == 0.0);
}

TEST_CASE("build value map through an engine") {
  engine::EngineConfig cfg;
  cfg.executable_path = test::fake_engine("wdl");
  auto h = engine::EngineHandle::start(cfg);
  const chess::Position start;
  const auto vm = build_value_map(*h, start, RewardKind::ExpectedScore, 3);
  CHECK(vm.scores.size() == 20);
  // every child reports W/D/L 0.6/0.3/0.1 for the opponent
  for (const auto& [m, x] : vm.scores) CHECK(x == doctest::Approx(0.1 + 0.15));
  CHECK_THROWS_AS(build_value_map(*h, chess::parse_fen("7k/5Q2/6K1/8/8/8/8/8 b - - 0 1"), RewardKind::Rank, 3), Error);
}
