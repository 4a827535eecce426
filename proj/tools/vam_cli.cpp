// vam: collection, pruned sampling, export and evaluation runs.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vam/config.hpp"
#include "vam/data_pipeline.hpp"
#include "vam/error.hpp"
#include "vam/evaluation.hpp"
#include "vam/rollout.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> overrides;
};

vam::config::RunConfig resolve(const Common& c) {
  auto overrides = c.overrides;
  if (c.seed) overrides.push_back("seed=" + std::to_string(*c.seed));
  std::optional<fs::path> path;
  if (!c.config_path.empty()) path = c.config_path;
  return vam::config::load(path, overrides);
}

// The verifier shares the analyzer's engine but is depth-limited only, so
// value maps do not depend on wall-clock time.
vam::engine::EngineConfig verifier_engine(const vam::config::RunConfig& cfg) {
  auto e = cfg.analyzer;
  e.search_depth = cfg.verifier.depth;
  e.movetime_ms.reset();
  return e;
}

void write_meta(const fs::path& artifact, const vam::config::RunConfig& cfg, const json& extra) {
  json meta = {{"schema_version", vam::eval::kReportSchemaVersion}, {"config", vam::config::to_json(cfg)}};
  meta.update(extra);
  const fs::path path = artifact.string() + ".meta.json";
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw vam::Error(vam::ErrorKind::IoFailure, "cannot write " + path.string());
  out << meta.dump(2) << "\n";
}

fs::path report_path(const Common& c, const vam::config::RunConfig& cfg, const std::string& name) {
  if (!c.out.empty()) return c.out;
  fs::create_directories(cfg.paths.reports);
  return fs::path(cfg.paths.reports) / name;
}

void ensure_values(std::vector<vam::data::TrainingRecord>& records, const vam::config::RunConfig& cfg) {
  std::unique_ptr<vam::engine::EngineHandle> engine;
  for (auto& r : records) {
    if (r.value_map) continue;
    if (!engine) engine = vam::engine::EngineHandle::start(verifier_engine(cfg));
    const auto vm = vam::verifier::build_value_map(*engine, vam::chess::parse_fen(r.fen), cfg.verifier.reward_kind,
                                                   cfg.verifier.depth);
    std::map<std::string, double> values;
    for (const auto& [m, x] : vm.scores) values.emplace(m.str(), x);
    r.value_map = std::move(values);
    r.metadata.verifier_depth = cfg.verifier.depth;
    r.metadata.reward_kind = cfg.verifier.reward_kind;
  }
}

int cmd_collect(const Common& c, int budget, bool append) {
  const auto cfg = resolve(c);
  const fs::path out = c.out.empty() ? fs::path(cfg.paths.buffer) : fs::path(c.out);
  const std::size_t b = budget > 0 ? static_cast<std::size_t>(budget) : static_cast<std::size_t>(cfg.collect.budget);

  auto policy = vam::policy::make_policy(cfg.resolved_policy());
  auto opponent = vam::engine::EngineHandle::start(cfg.opponent);
  auto verifier = vam::engine::EngineHandle::start(verifier_engine(cfg));
  const auto result = vam::data::collect_by_play(*policy, *opponent, *verifier, cfg.play_config(), b);
  vam::data::persist_buffer(result.records, out, append);
  write_meta(out, cfg, {{"records", result.records.size()}});

  std::cout << "records " << result.records.size() << "\n"
            << "games started " << result.stats.games_started << ", finished " << result.stats.games_finished
            << ", forfeits " << result.stats.forfeits << "\n"
            << "invalid outputs " << result.stats.invalid_outputs << "\n"
            << "buffer " << out.string() << "\n";
  return 0;
}

int cmd_prune(const Common& c, const std::string& dataset_flag) {
  const auto cfg = resolve(c);
  const std::string dataset = dataset_flag.empty() ? cfg.paths.dataset : dataset_flag;
  if (dataset.empty()) throw vam::Error(vam::ErrorKind::ConfigError, "no dataset (paths.dataset or --dataset)");
  const fs::path out = c.out.empty() ? fs::path(cfg.paths.batch) : fs::path(c.out);

  auto records = vam::data::load_dataset(dataset);
  if (cfg.prune.max_states > 0 && records.size() > static_cast<std::size_t>(cfg.prune.max_states)) {
    records.resize(static_cast<std::size_t>(cfg.prune.max_states));
  }
  if (records.empty()) std::cerr << "warning: dataset " << dataset << " has no records\n";
  ensure_values(records, cfg);

  auto policy = vam::policy::make_policy(cfg.resolved_policy());
  std::vector<vam::rollout::PruneTrace> traces;
  std::map<int, int> rounds;
  int found = 0;
  for (const auto& r : records) {
    const auto p = vam::chess::parse_fen(r.fen);
    const auto vm = vam::data::typed_value_map(r);
    const auto m0 = vam::data::typed_moves(r.allowed_moves ? *r.allowed_moves : r.legal_moves_uci);
    traces.push_back(vam::rollout::prune_and_sample(*policy, p, vm, m0, cfg.grpo, cfg.mask_mdp.penalty));
    ++rounds[traces.back().rounds_used];
    if (traces.back().target_found_round) ++found;
  }
  const auto groups = vam::rollout::export_batch(traces, out);
  write_meta(out, cfg, {{"states", traces.size()}, {"groups", groups}});

  std::cout << "states " << traces.size() << ", groups " << groups << "\n";
  std::cout << "rounds histogram:";
  for (const auto& [r, n] : rounds) std::cout << " " << r << ":" << n;
  std::cout << "\n";
  const double rate = traces.empty() ? 0.0 : static_cast<double>(found) / static_cast<double>(traces.size());
  std::cout << "target found rate " << rate << "\n"
            << "batch " << out.string() << "\n";
  return 0;
}

int cmd_export(const Common& c, const std::string& input) {
  const auto cfg = resolve(c);
  const fs::path in = input.empty() ? fs::path(cfg.paths.buffer) : fs::path(input);
  if (c.out.empty()) throw vam::Error(vam::ErrorKind::InvalidArgument, "export needs --out");
  auto records = vam::data::load_buffer(in);
  for (auto& r : records) r = vam::data::with_argmax_solution(std::move(r));
  vam::data::persist_buffer(records, c.out, /*append=*/false);
  std::cout << "exported " << records.size() << " records to " << c.out << "\n";
  return 0;
}

int cmd_eval_puzzles(const Common& c, const std::string& dataset_flag, const std::string& mode_flag) {
  const auto cfg = resolve(c);
  const std::string dataset = dataset_flag.empty() ? cfg.paths.dataset : dataset_flag;
  if (dataset.empty()) throw vam::Error(vam::ErrorKind::ConfigError, "no dataset (paths.dataset or --dataset)");
  const auto mode = mode_flag.empty() ? cfg.eval.puzzle_mode : vam::prompt::parse_template_kind(mode_flag);

  auto puzzles = vam::data::load_dataset(dataset);
  auto policy = vam::policy::make_policy(cfg.resolved_policy());
  if (policy->needs_values()) ensure_values(puzzles, cfg);
  const auto result = vam::eval::eval_puzzles(*policy, puzzles, mode);
  const auto out = report_path(c, cfg, "puzzles.json");
  vam::eval::write_puzzle_report(result, vam::config::to_json(cfg), out);

  std::cout << "puzzles " << result.total << "\n"
            << "pass@1 " << result.pass1_rate << "\n"
            << "format " << result.format_rate << ", legality " << result.legality_rate << ", mask "
            << result.mask_rate << "\n";
  if (result.mean_selected_value) std::cout << "mean selected value " << *result.mean_selected_value << "\n";
  std::cout << "report " << out.string() << "\n";
  return 0;
}

int cmd_eval_games(const Common& c, std::vector<int> depths, int games) {
  auto cfg = resolve(c);
  if (!depths.empty()) cfg.eval.depths = depths;
  if (games > 0) cfg.eval.games_per_depth = games;
  cfg.validate();

  auto policy = vam::policy::make_policy(cfg.resolved_policy());
  auto analyzer = vam::engine::EngineHandle::start(cfg.analyzer);
  std::unique_ptr<vam::engine::EngineHandle> values;
  auto game_cfg = cfg.game_config();
  if (policy->needs_values()) {
    values = vam::engine::EngineHandle::start(verifier_engine(cfg));
    game_cfg.value_engine = values.get();
  }
  const auto report =
      vam::eval::eval_games(*policy, cfg.opponent, *analyzer, cfg.eval.depths, cfg.eval.games_per_depth, cfg.seed,
                            game_cfg);
  const auto out = report_path(c, cfg, "games.json");
  vam::eval::write_acpl_report(report, vam::config::to_json(cfg), out);

  std::cout << "games " << report.overall.games << " (forfeits " << report.overall.forfeits << ")\n"
            << "overall ACPL " << report.overall.overall_acpl << ", per move " << report.overall.acpl_per_move
            << "\n";
  for (const auto& [d, s] : report.per_depth) {
    std::cout << "  depth " << d << ": ACPL " << s.overall_acpl << ", W/D/L " << s.wins << "/" << s.draws << "/"
              << s.losses << "\n";
  }
  std::cout << "report " << out.string() << "\n";
  return 0;
}

int cmd_engine_check(const Common& c) {
  const auto cfg = resolve(c);
  bool ok = true;
  auto probe = [&](const char* label, const vam::engine::EngineConfig& ecfg) {
    auto e = ecfg;
    e.show_wdl = false;  // probe capability without requiring it
    auto h = vam::engine::EngineHandle::start(e);
    std::cout << label << ": handshake ok (" << h->engine_name() << ")\n";
    if (h->supports_wdl()) {
      std::cout << label << ": WDL supported\n";
    } else {
      std::cout << label << ": warning: no UCI_ShowWDL, value maps fall back to the logistic curve\n";
    }
    const vam::chess::Position start;
    const auto depth = std::min(e.search_depth, 10);
    const auto a = h->search(start, depth, std::nullopt);
    const auto b = h->search(start, depth, std::nullopt);
    const bool same = a.eval == b.eval && a.best_move == b.best_move;
    std::cout << label << ": determinism " << (same ? "ok" : "FAILED") << " (" << vam::engine::to_string(a.eval)
              << (same ? "" : " vs " + vam::engine::to_string(b.eval)) << ")\n";
    ok = ok && same;
  };
  probe("analyzer", cfg.analyzer);
  probe("opponent", cfg.opponent);
  if (!ok) {
    std::cerr << "engine-check: repeated identical queries disagreed\n";
    return 4;
  }
  return 0;
}

int exit_code(const vam::Error& e) {
  switch (e.family()) {
    case vam::ErrorFamily::Config: return 2;
    case vam::ErrorFamily::Io: return 3;
    case vam::ErrorFamily::Engine: return 4;
    case vam::ErrorFamily::Endpoint: return 5;
    case vam::ErrorFamily::Data: return 6;
    case vam::ErrorFamily::Usage: return 1;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"VAM chess harness"};
  app.require_subcommand(1);
  app.fallthrough();

  Common common;
  app.add_option("--config", common.config_path, "JSON run config");
  app.add_option("--seed", common.seed, "run seed (overrides config seed)");
  app.add_option("--out", common.out, "output file");
  app.add_option("--set", common.overrides, "config override key.path=value (repeatable)");

  int budget = 0;
  bool append = false;
  auto* collect = app.add_subcommand("collect", "collect engine-play positions into a buffer");
  collect->add_option("--budget", budget, "records to collect (default collect.budget)");
  collect->add_flag("--append", append, "append to an existing buffer");

  std::string dataset;
  auto* prune = app.add_subcommand("prune", "pruned group sampling over a dataset, writes a training batch");
  prune->add_option("--dataset", dataset, "dataset file (default paths.dataset)");

  std::string input;
  auto* exp = app.add_subcommand("export", "turn a buffer into a dataset with argmax solutions");
  exp->add_option("--in", input, "buffer file (default paths.buffer)");

  std::string mode;
  auto* puzzles = app.add_subcommand("eval-puzzles", "pass@1 on a puzzle set");
  puzzles->add_option("--dataset", dataset, "puzzle file (default paths.dataset)");
  puzzles->add_option("--mode", mode, "vam_selection | baseline");

  std::vector<int> depths;
  int games = 0;
  auto* eval_games = app.add_subcommand("eval-games", "full games against the engine opponent, ACPL report");
  eval_games->add_option("--depths", depths, "opponent depths")->delimiter(',');
  eval_games->add_option("--games", games, "games per depth (even)");

  auto* check = app.add_subcommand("engine-check", "handshake, WDL probe and determinism self-test");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*collect) return cmd_collect(common, budget, append);
    if (*prune) return cmd_prune(common, dataset);
    if (*exp) return cmd_export(common, input);
    if (*puzzles) return cmd_eval_puzzles(common, dataset, mode);
    if (*eval_games) return cmd_eval_games(common, depths, games);
    if (*check) return cmd_engine_check(common);
  } catch (const vam::Error& e) {
    std::cerr << "vam: " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "vam: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
