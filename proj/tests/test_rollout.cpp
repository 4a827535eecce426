#include <doctest.h>

#include "support.hpp"
#include "vam/error.hpp"
#include "vam/rollout.hpp"

using namespace vam;
using namespace vam::rollout;
using chess::UciMove;

namespace {

std::vector<UciMove> moves(std::initializer_list<const char*> xs) {
  std::vector<UciMove> out;
  for (const char* x : xs) out.push_back(UciMove::parse(x));
  return out;
}

// b1c3 is the best of the first four start-position moves.
verifier::ValueMap values() {
  verifier::ValueMap vm;
  for (const auto& m : chess::legal_moves(chess::Position{})) vm.scores.emplace(m, 0.3);
  vm.scores[UciMove::parse("b1c3")] = 0.8;
  vm.scores[UciMove::parse("a2a4")] = 0.5;
  return vm;
}

GrpoConfig cfg(int g, int rounds) {
  GrpoConfig c;
  c.group_size = g;
  c.max_rounds = rounds;
  return c;
}

}  // namespace

TEST_CASE("config defaults and validation") {
  GrpoConfig c;
  CHECK(c.group_size == 8);
  CHECK(c.max_rounds == 4);
  CHECK(c.clip_eps == 0.2);
  CHECK(c.kl_coef == 1e-3);
  CHECK(c.max_response_tokens == 2000);
  CHECK_NOTHROW(c.validate());
  CHECK_THROWS_AS(cfg(1, 4).validate(), Error);
  CHECK_THROWS_AS(cfg(8, 0).validate(), Error);
}

TEST_CASE("scripted pruning finds the target in the second round") {
  policy::RoundRobinScript rr;
  const auto t = prune_and_sample(rr, chess::Position{}, values(), moves({"b1c3", "a2a3", "b1a3", "a2a4"}), cfg(2, 4), 1.0);
  CHECK(t.target.move == UciMove::parse("b1c3"));
  REQUIRE(t.groups.size() == 2);
  CHECK(t.groups[0].mask_snapshot == moves({"a2a3", "a2a4", "b1a3", "b1c3"}));
  CHECK(distinct_valid(t.groups[0]) == moves({"a2a3", "a2a4"}));
  CHECK(t.groups[0].rewards == std::vector<double>{0.3, 0.5});
  CHECK(t.groups[0].advantages[0] == doctest::Approx(-1.0));
  CHECK(t.groups[0].advantages[1] == doctest::Approx(1.0));
  CHECK(t.groups[1].mask_snapshot == moves({"b1a3", "b1c3"}));
  CHECK(t.groups[1].round_index == 2);
  CHECK(t.target_found_round == 2);
  CHECK(t.rounds_used == 2);
  CHECK(t.groups[1].prompt_text.find("Allowed moves (UCI): b1a3, b1c3\n") != std::string::npos);
}

TEST_CASE("greedy finds the target at once") {
  policy::GreedyOracle g;
  const auto legal = chess::legal_moves(chess::Position{});
  const auto t = prune_and_sample(g, chess::Position{}, values(), legal, cfg(8, 4), 1.0);
  CHECK(t.rounds_used == 1);
  CHECK(t.target_found_round == 1);
  CHECK(t.groups[0].advantages == std::vector<double>(8, 0.0));
}

TEST_CASE("malformed outputs never shrink the mask") {
  policy::SoftmaxOracle broken(1.0, 1.0, 3);
  const auto m0 = moves({"a2a3", "b1c3", "h2h4"});
  const auto t = prune_and_sample(broken, chess::Position{}, values(), m0, cfg(4, 4), 1.0);
  CHECK(t.rounds_used == 4);
  CHECK_FALSE(t.target_found_round);
  for (const auto& g : t.groups) {
    CHECK(g.mask_snapshot == m0);
    CHECK(g.rewards == std::vector<double>(4, -1.0));
  }
}

TEST_CASE("a pruned move is penalized when sampled again") {
  policy::FixedOutputs f({"<uci_move>a2a3</uci_move>"});
  const auto t = prune_and_sample(f, chess::Position{}, values(), moves({"a2a3", "b1c3"}), cfg(2, 3), 0.7);
  REQUIRE(t.groups.size() == 3);
  CHECK(t.groups[0].rewards == std::vector<double>{0.3, 0.3});
  CHECK(t.groups[1].mask_snapshot == moves({"b1c3"}));
  CHECK(t.groups[1].rewards == std::vector<double>{-0.7, -0.7});
  CHECK(t.groups[1].parsed[0].verdict_string() == "out_of_mask:a2a3");
  CHECK(t.groups[2].mask_snapshot == moves({"b1c3"}));
}

TEST_CASE("single-sample groups and argument checks") {
  policy::RoundRobinScript rr;
  const auto t = prune_and_sample(rr, chess::Position{}, values(), moves({"a2a3", "b1c3"}), cfg(1, 4), 1.0);
  CHECK(t.target_found_round == 2);
  CHECK(t.groups[0].advantages == std::vector<double>{0.0});
  CHECK_THROWS_AS(prune_and_sample(rr, chess::Position{}, values(), {}, cfg(2, 2), 1.0), Error);
  CHECK_THROWS_AS(prune_and_sample(rr, chess::Position{}, values(), moves({"e2e5"}), cfg(2, 2), 1.0), Error);

  policy::FixedOutputs f({"x"});
  policy::PolicyRequest req{"p", chess::legal_moves(chess::Position{}), std::nullopt, nullptr};
  CHECK(sample_group(f, req, 3).size() == 3);
  CHECK_THROWS_AS(sample_group(f, req, 0), Error);
}

TEST_CASE("batch export") {
  const auto dir = test::scratch("rollout_export");
  policy::RoundRobinScript rr;
  const auto t = prune_and_sample(rr, chess::Position{}, values(), moves({"b1c3", "a2a3", "b1a3", "a2a4"}), cfg(2, 4), 1.0);
  CHECK(export_batch({t}, dir / "a.jsonl") == 2);
  CHECK(export_batch({t}, dir / "b.jsonl") == 2);
  const auto a = test::slurp(dir / "a.jsonl");
  CHECK(a == test::slurp(dir / "b.jsonl"));
  CHECK(std::count(a.begin(), a.end(), '\n') == 2);
  const auto first = nlohmann::json::parse(a.substr(0, a.find('\n')));
  CHECK(first["round_index"] == 1);
  CHECK(first["verdicts"][0] == "valid:a2a3");
  CHECK(first["mask"].size() == 4);
  for (const char* key : {"fen", "mask", "prompt", "outputs", "verdicts", "rewards", "advantages", "round_index"}) {
    CHECK(first.contains(key));
  }
  CHECK(export_batch({}, dir / "empty.jsonl") == 0);
  CHECK(test::slurp(dir / "empty.jsonl").empty());
  CHECK_THROWS_AS(export_batch({t}, dir / "missing" / "x.jsonl"), Error);
}
