#include <doctest.h>

#include <fstream>

#include "support.hpp"
#include "vam/data_pipeline.hpp"
#include "vam/error.hpp"

using namespace vam;
using namespace vam::data;
using chess::UciMove;

namespace {

TrainingRecord start_record() {
  TrainingRecord r;
  r.fen = std::string(chess::kStartFen);
  std::map<std::string, double> vm;
  double x = 0.3;
  for (const auto& m : chess::legal_moves(chess::Position{})) {
    r.legal_moves_uci.push_back(m.str());
    vm[m.str()] = x;
    x += 0.01;
  }
  r.value_map = vm;
  r.solution_uci = "h2h4";  // the largest value above
  r.allowed_moves = std::vector<std::string>{"e2e4", "d2d4", "h2h4"};
  r.metadata.verifier_depth = 10;
  r.metadata.collection_seed = 5;
  return r;
}

void write(const test::fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

std::string line(const TrainingRecord& r) { return to_json(r).dump() + "\n"; }

ErrorKind kind_of(auto&& fn, std::string* msg = nullptr) {
  try {
    fn();
  } catch (const Error& e) {
    if (msg) *msg = e.what();
    return e.kind();
  }
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("record validation") {
  CHECK(validate_record(start_record()).empty());

  auto r = start_record();
  (*r.value_map)["e2e4"] = 1.5;
  CHECK(validate_record(r).size() == 1);

  r = start_record();
  r.allowed_moves->push_back("e2e5");
  CHECK(validate_record(r).size() == 1);

  r = start_record();
  r.solution_uci = "e7e5";
  CHECK(validate_record(r).size() == 1);

  r = start_record();
  r.legal_moves_uci.pop_back();
  CHECK_FALSE(validate_record(r).empty());

  r = start_record();
  (*r.value_map)["e2e5"] = 0.5;
  CHECK_FALSE(validate_record(r).empty());

  r = start_record();
  r.fen = "garbage";
  CHECK(validate_record(r).size() == 1);

  r = start_record();
  r.value_map.reset();
  r.allowed_moves.reset();
  r.solution_uci.reset();
  CHECK(validate_record(r).empty());
}

TEST_CASE("json round trip and alias") {
  const auto r = start_record();
  CHECK(record_from_json(to_json(r)) == r);
  auto j = to_json(r);
  j["allowed_moves"] = j["considered_moves_uci"];
  j.erase("considered_moves_uci");
  CHECK(record_from_json(j).allowed_moves == r.allowed_moves);
  j["extra_field"] = 1;  // unknown fields are ignored
  CHECK_NOTHROW(record_from_json(j));
  CHECK(kind_of([] { record_from_json(nlohmann::json{{"legal_moves_uci", nlohmann::json::array()}}); }) ==
        ErrorKind::SchemaError);
  CHECK(kind_of([] { record_from_json(nlohmann::json{{"fen", "x"}, {"legal_moves_uci", "e2e4"}}); }) ==
        ErrorKind::SchemaError);
}

TEST_CASE("dataset loading") {
  const auto dir = test::scratch("data_load");
  const auto good = start_record();
  write(dir / "ok.jsonl", line(good) + line(good) + "\n" + line(good));
  CHECK(load_dataset(dir / "ok.jsonl").size() == 3);

  auto bad_key = start_record();
  (*bad_key.value_map)["e2e5"] = 0.1;
  write(dir / "key.jsonl", line(good) + line(bad_key) + line(good));
  std::string msg;
  CHECK(kind_of([&] { load_dataset(dir / "key.jsonl"); }, &msg) == ErrorKind::SchemaError);
  CHECK(msg.find("key.jsonl:2") != std::string::npos);

  auto bad_solution = start_record();
  bad_solution.solution_uci = "a7a6";
  write(dir / "sol.jsonl", line(bad_solution));
  CHECK(kind_of([&] { load_dataset(dir / "sol.jsonl"); }, &msg) == ErrorKind::SchemaError);
  CHECK(msg.find("sol.jsonl:1") != std::string::npos);

  write(dir / "json.jsonl", line(good) + "{not json\n");
  CHECK(kind_of([&] { load_dataset(dir / "json.jsonl"); }) == ErrorKind::SchemaError);
  CHECK(kind_of([&] { load_dataset(dir / "absent.jsonl"); }) == ErrorKind::IoFailure);
}

TEST_CASE("buffer persistence") {
  const auto dir = test::scratch("data_buffer");
  auto a = start_record();
  auto b = start_record();
  b.fen = "rnbqkbnr/pppppppp/8/8/4P3/8/PPPP1PPP/RNBQKBNR b KQkq - 0 1";
  b.legal_moves_uci.clear();
  b.value_map->clear();
  for (const auto& m : chess::legal_moves(chess::parse_fen(b.fen))) {
    b.legal_moves_uci.push_back(m.str());
    (*b.value_map)[m.str()] = 0.5;
  }
  b.solution_uci.reset();
  b.allowed_moves.reset();
  b.source = RecordSource::EnginePlay;
  b.metadata.reward_kind = verifier::RewardKind::Rank;
  b.metadata.wdl_source = "engine";

  persist_buffer({a, b}, dir / "buf.jsonl", false);
  CHECK(load_buffer(dir / "buf.jsonl") == std::vector<TrainingRecord>{a, b});
  persist_buffer({b}, dir / "buf.jsonl");
  CHECK(load_buffer(dir / "buf.jsonl") == std::vector<TrainingRecord>{a, b, b});

  const auto text = test::slurp(dir / "buf.jsonl");
  write(dir / "cut.jsonl", text.substr(0, text.size() - 25));
  std::string msg;
  CHECK(kind_of([&] { load_buffer(dir / "cut.jsonl"); }, &msg) == ErrorKind::SchemaError);
  const auto offset = text.rfind('\n', text.size() - 2) + 1;  // start of the cut line
  CHECK(msg.find("byte offset " + std::to_string(offset)) != std::string::npos);
  CHECK(kind_of([&] { persist_buffer({a}, dir / "no" / "dir.jsonl"); }) == ErrorKind::IoFailure);
}

TEST_CASE("argmax solutions") {
  auto r = start_record();
  r.solution_uci.reset();
  CHECK(with_argmax_solution(r).solution_uci == "h2h4");
  r.allowed_moves = std::vector<std::string>{"a2a3", "b1c3"};
  CHECK(with_argmax_solution(r).solution_uci == "b1c3");
  r.value_map.reset();
  CHECK_THROWS_AS(with_argmax_solution(r), Error);
}

TEST_CASE("rejection filter") {
  std::vector<TrainingRecord> records(3, start_record());
  policy::GreedyOracle greedy;
  const auto all = rejection_filter(records, greedy, 4);
  CHECK(all.generations == 12);
  CHECK(all.accepted.size() == 12);
  CHECK(all.acceptance_rate == 1.0);
  CHECK(all.accepted[0].generation.find("h2h4") != std::string::npos);
  CHECK(all.accepted[0].prompt.find("Legal moves (UCI): a2a3,") != std::string::npos);

  for (auto& r : records) r.solution_uci = "a2a3";
  CHECK(rejection_filter(records, greedy, 2).acceptance_rate == 0.0);

  policy::SoftmaxOracle broken(1.0, 1.0, 1);
  CHECK(rejection_filter(records, broken, 2).accepted.empty());

  records[1].solution_uci.reset();
  CHECK(kind_of([&] { rejection_filter(records, greedy, 1); }) == ErrorKind::MissingSolution);
}

TEST_CASE("collection by engine play") {
  const auto path = test::engine_path();
  if (!path) {
    MESSAGE("no engine found; set VAM_ENGINE");
    return;
  }
  engine::EngineConfig ocfg;
  ocfg.executable_path = *path;
  ocfg.search_depth = 1;
  auto opponent = engine::EngineHandle::start(ocfg);
  engine::EngineConfig vcfg;
  vcfg.executable_path = *path;
  auto verifier = engine::EngineHandle::start(vcfg);
  PlayConfig cfg;
  cfg.pool_size = 1;
  cfg.verifier_depth = 4;
  cfg.seed = 11;

  policy::RoundRobinScript rr;
  const auto two = collect_by_play(rr, *opponent, *verifier, cfg, 2);
  REQUIRE(two.records.size() == 2);
  CHECK(chess::parse_fen(two.records[0].fen).ply_count() == 0);
  CHECK(chess::parse_fen(two.records[1].fen).ply_count() == 1);
  CHECK(two.records[1].fen == "rnbqkbnr/pppppppp/8/8/8/P7/1PPPPPPP/RNBQKBNR b KQkq - 0 1");
  for (const auto& r : two.records) {
    CHECK(validate_record(r).empty());
    CHECK(r.source == RecordSource::EnginePlay);
    CHECK(r.metadata.collection_seed == 11u);
    CHECK(r.metadata.verifier_depth == 4);
  }

  policy::RoundRobinScript rr1;
  CHECK(collect_by_play(rr1, *opponent, *verifier, cfg, 1).records.size() == 1);

  cfg.pool_size = 2;
  policy::SoftmaxOracle broken(1.0, 1.0, 2);
  const auto forfeits = collect_by_play(broken, *opponent, *verifier, cfg, 7);
  CHECK(forfeits.records.size() == 7);
  CHECK(forfeits.stats.forfeits >= 2);
  bool black_to_move = false;
  for (const auto& r : forfeits.records) {
    CHECK(validate_record(r).empty());
    black_to_move = black_to_move || chess::parse_fen(r.fen).side_to_move() == chess::Color::Black;
  }
  CHECK(black_to_move);  // the opponent moved first in the second slot

  CHECK_THROWS_AS(collect_by_play(rr, *opponent, *verifier, cfg, 0), Error);
}
