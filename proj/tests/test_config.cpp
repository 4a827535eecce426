#include <doctest.h>

#include <fstream>
#include <functional>

#include "support.hpp"
#include "vam/config.hpp"
#include "vam/error.hpp"

using namespace vam;
using namespace vam::config;
using nlohmann::json;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("defaults") {
  const RunConfig c;
  CHECK(c.grpo.group_size == 8);
  CHECK(c.grpo.max_rounds == 4);
  CHECK(c.grpo.clip_eps == 0.2);
  CHECK(c.grpo.kl_coef == 1e-3);
  CHECK(c.grpo.max_response_tokens == 2000);
  CHECK(c.verifier.depth == 10);
  CHECK(c.verifier.reward_kind == verifier::RewardKind::ExpectedScore);
  CHECK(c.opponent.skill_level == 0);
  CHECK(c.opponent.search_depth == 1);
  CHECK(c.analyzer.search_depth == 20);
  CHECK(c.analyzer.movetime_ms == 1000);
  CHECK(c.collect.max_plies == 200);
  CHECK(c.collect.attempts == 3);
  CHECK(c.eval.depths == std::vector<int>{1, 5});
  CHECK(c.eval.games_per_depth == 50);
  CHECK(c.eval.cap == 1000);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("json round trip") {
  RunConfig c;
  c.seed = 42;
  c.grpo.group_size = 4;
  c.opponent.movetime_ms = 50;
  c.eval.puzzle_mode = prompt::TemplateKind::Baseline;
  const auto back = from_json(to_json(c));
  CHECK(to_json(back) == to_json(c));
  CHECK(back.seed == 42);
  CHECK(back.opponent.movetime_ms == 50);
  CHECK(from_json(json::object()).grpo.group_size == 8);
}

TEST_CASE("rejections") {
  CHECK(kind_of([] { from_json({{"grpo", {{"groupsize", 4}}}}); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { from_json({{"bogus", 1}}); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { from_json({{"grpo", {{"group_size", "eight"}}}}); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { from_json({{"grpo", {{"group_size", 1}}}}); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { from_json({{"schema_version", 2}}); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { from_json({{"eval", {{"games_per_depth", 3}}}}); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { from_json({{"verifier", {{"reward_kind", "nope"}}}}); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { from_json({{"engine", 3}}); }) == ErrorKind::ConfigError);
}

TEST_CASE("overrides") {
  json doc = json::object();
  apply_override(doc, "grpo.group_size=4");
  apply_override(doc, "engine.opponent.executable_path=/usr/bin/sf");
  apply_override(doc, "eval.depths=[3,7]");
  apply_override(doc, "policy.kind=\"uniform_random\"");
  const auto c = from_json(doc);
  CHECK(c.grpo.group_size == 4);
  CHECK(c.opponent.executable_path == "/usr/bin/sf");
  CHECK(c.eval.depths == std::vector<int>{3, 7});
  CHECK(c.policy.kind == "uniform_random");
  CHECK(kind_of([&] { apply_override(doc, "novalue"); }) == ErrorKind::ConfigError);
  CHECK(kind_of([&] { apply_override(doc, "a..b=1"); }) == ErrorKind::ConfigError);
}

TEST_CASE("load from file") {
  const auto dir = test::scratch("config");
  const auto path = dir / "run.json";
  std::ofstream(path) << R"({"seed": 9, "collect": {"budget": 12}})";
  const auto c = load(path, {"collect.budget=20"});
  CHECK(c.seed == 9);
  CHECK(c.collect.budget == 20);

  const auto pc = c.resolved_policy();
  CHECK(pc.seed == 9);
  CHECK(pc.generation.temperature == c.grpo.temperature);
  CHECK(c.play_config().seed == 9);
  CHECK(c.game_config().cap == 1000);

  CHECK(kind_of([&] { load(dir / "missing.json", {}); }) == ErrorKind::IoFailure);
  std::ofstream(dir / "bad.json") << "[1, 2]";
  CHECK(kind_of([&] { load(dir / "bad.json", {}); }) == ErrorKind::ConfigError);
  std::ofstream(dir / "junk.json") << "{not json";
  CHECK(kind_of([&] { load(dir / "junk.json", {}); }) == ErrorKind::ConfigError);
  CHECK(load(std::nullopt, {}).seed == 0);
}
