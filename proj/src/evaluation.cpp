#include "vam/evaluation.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "vam/error.hpp"

namespace vam::eval {

using chess::Color;
using chess::UciMove;
using nlohmann::json;

double cpl(double e_before, double e_after, int cap) {
  return std::min(static_cast<double>(cap), std::max(0.0, e_before - e_after));
}

double to_mover_pov(const engine::EngineEval& e, Color reported_for, Color mover, int cap) {
  double v = e.is_mate() ? (e.value > 0 ? kMateScore : -kMateScore) : e.value;
  if (reported_for != mover) v = -v;
  return std::clamp(v, -static_cast<double>(cap), static_cast<double>(cap));
}

std::string_view to_string(GameResult r) noexcept {
  switch (r) {
    case GameResult::Win: return "win";
    case GameResult::Loss: return "loss";
    case GameResult::Draw: return "draw";
    case GameResult::Forfeit: return "forfeit";
  }
  return "?";
}

double GameRecord::acpl(int cap) const {
  if (moves.empty()) return cap;
  double sum = 0.0;
  for (const auto& m : moves) sum += m.cpl;
  return sum / static_cast<double>(moves.size());
}

void GameConfig::validate() const {
  if (max_plies < 1) throw Error(ErrorKind::ConfigError, "eval.max_plies must be >= 1");
  if (attempts < 1) throw Error(ErrorKind::ConfigError, "eval.attempts must be >= 1");
  if (cap < 1) throw Error(ErrorKind::ConfigError, "eval.cap must be >= 1");
  if (analyzer_depth < 1) throw Error(ErrorKind::ConfigError, "eval.analyzer_depth must be >= 1");
  if (analyzer_movetime_ms && *analyzer_movetime_ms < 1) {
    throw Error(ErrorKind::ConfigError, "eval.analyzer_movetime_ms must be >= 1");
  }
}

// ── games ───────────────────────────────────────────────────────────────────

GameRecord play_game(policy::Policy& policy, engine::EngineHandle& opponent, Color model_color,
                     engine::EngineHandle& analyzer, const GameConfig& cfg) {
  cfg.validate();
  if (policy.needs_values() && !cfg.value_engine) {
    throw Error(ErrorKind::PolicyFailure, policy.name() + " needs a value engine");
  }
  GameRecord rec;
  rec.model_color = model_color;
  rec.opponent_depth = opponent.config().search_depth;
  chess::Game game;

  for (;;) {
    const auto outcome = game.outcome();
    if (outcome.terminal()) {
      if (outcome.kind == chess::OutcomeKind::Checkmate) {
        rec.result = outcome.winner == model_color ? GameResult::Win : GameResult::Loss;
      } else {
        rec.result = GameResult::Draw;
      }
      break;
    }
    if (game.plies() >= cfg.max_plies) {
      rec.result = GameResult::Draw;
      rec.capped = true;
      break;
    }

    const auto p = game.position();
    if (p.side_to_move() != model_color) {
      const auto m = opponent.best_move(p, opponent.config().search_depth);
      game.play(m);
      rec.uci_moves.push_back(m);
      continue;
    }

    const auto legal = chess::legal_moves(p);
    std::optional<verifier::ValueMap> vm;
    if (policy.needs_values()) vm = verifier::build_value_map(*cfg.value_engine, p, cfg.reward_kind, cfg.value_depth);
    std::optional<std::vector<UciMove>> mask;
    if (cfg.prompt_kind == prompt::TemplateKind::VamSelection) mask = legal;
    const auto text = prompt::build_prompt({cfg.prompt_kind, p.fen(), legal, mask});
    policy::PolicyRequest request{text, legal, mask, vm ? &*vm : nullptr};

    std::optional<UciMove> move;
    int attempts = 0;
    while (!move && attempts < cfg.attempts) {
      ++attempts;
      const auto outputs = policy.sample(request, 1);
      if (outputs.size() != 1) throw Error(ErrorKind::PolicyFailure, "policy returned no output");
      const auto parsed = prompt::parse_output(outputs.front(), legal, mask);
      if (parsed.valid()) {
        move = parsed.move;
      } else {
        ++rec.invalid_outputs;
      }
    }
    if (!move) {
      rec.result = GameResult::Forfeit;
      break;
    }

    MoveAnalysis a{game.plies(), model_color, *move};
    a.attempts = attempts;
    const auto before = analyzer.search(p, cfg.analyzer_depth, cfg.analyzer_movetime_ms);
    a.e_before = to_mover_pov(before.eval, model_color, model_color, cfg.cap);
    a.before_time_bound = before.movetime_bound;

    game.play(*move);
    rec.uci_moves.push_back(*move);
    const auto after_outcome = game.outcome();
    if (after_outcome.kind == chess::OutcomeKind::Checkmate) {
      a.e_after = std::min(kMateScore, cfg.cap);
    } else if (after_outcome.terminal()) {
      a.e_after = 0.0;
    } else {
      const auto after = analyzer.search(game.position(), cfg.analyzer_depth, cfg.analyzer_movetime_ms);
      a.e_after = to_mover_pov(after.eval, chess::opposite(model_color), model_color, cfg.cap);
      a.after_time_bound = after.movetime_bound;
    }
    a.cpl = cpl(a.e_before, a.e_after, cfg.cap);
    rec.moves.push_back(a);
  }
  rec.plies = game.plies();
  return rec;
}

AcplSummary summarize(const std::vector<GameRecord>& games, int cap) {
  AcplSummary s;
  double game_sum = 0.0;
  double cpl_sum = 0.0;
  int weight = 0;
  for (const auto& g : games) {
    ++s.games;
    switch (g.result) {
      case GameResult::Win: ++s.wins; break;
      case GameResult::Loss: ++s.losses; break;
      case GameResult::Draw: ++s.draws; break;
      case GameResult::Forfeit: ++s.forfeits; break;
    }
    game_sum += g.acpl(cap);
    s.model_moves += static_cast<int>(g.moves.size());
    if (g.moves.empty()) {
      cpl_sum += cap;
      ++weight;
    } else {
      for (const auto& m : g.moves) cpl_sum += m.cpl;
      weight += static_cast<int>(g.moves.size());
    }
  }
  if (s.games > 0) {
    s.overall_acpl = game_sum / s.games;
    s.acpl_per_move = cpl_sum / weight;
  }
  return s;
}

AcplReport build_report(std::vector<GameRecord> games, int cap) {
  AcplReport r;
  r.overall = summarize(games, cap);
  std::map<int, std::vector<GameRecord>> by_depth;
  for (const auto& g : games) by_depth[g.opponent_depth].push_back(g);
  for (const auto& [d, gs] : by_depth) r.per_depth[d] = summarize(gs, cap);
  r.games = std::move(games);
  return r;
}

std::vector<std::pair<int, Color>> game_schedule(const std::vector<int>& depths, int games_per_depth,
                                                 std::uint64_t seed) {
  if (games_per_depth < 2 || games_per_depth % 2 != 0) {
    throw Error(ErrorKind::InvalidArgument, "games_per_depth must be a positive even number");
  }
  std::vector<std::pair<int, Color>> out;
  for (const int d : depths) {
    std::vector<std::pair<int, Color>> block;
    for (int i = 0; i < games_per_depth; ++i) block.emplace_back(d, i % 2 == 0 ? Color::White : Color::Black);
    std::mt19937_64 gen(seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(d + 1)));
    std::shuffle(block.begin(), block.end(), gen);
    out.insert(out.end(), block.begin(), block.end());
  }
  return out;
}

AcplReport eval_games(policy::Policy& policy, const engine::EngineConfig& opponent_cfg, engine::EngineHandle& analyzer,
                      const std::vector<int>& depths, int games_per_depth, std::uint64_t seed, const GameConfig& cfg) {
  const auto schedule = game_schedule(depths, games_per_depth, seed);
  std::vector<GameRecord> games;
  std::unique_ptr<engine::EngineHandle> opponent;
  int opponent_depth = -1;
  for (const auto& [depth, color] : schedule) {
    if (!opponent || opponent_depth != depth) {
      auto ocfg = opponent_cfg;
      ocfg.search_depth = depth;
      opponent = engine::EngineHandle::start(ocfg);
      opponent_depth = depth;
    }
    games.push_back(play_game(policy, *opponent, color, analyzer, cfg));
  }
  return build_report(std::move(games), cfg.cap);
}

// ── puzzles ─────────────────────────────────────────────────────────────────

PuzzleResult eval_puzzles(policy::Policy& policy, const std::vector<data::TrainingRecord>& puzzles,
                          prompt::TemplateKind mode) {
  for (const auto& r : puzzles) {
    if (!r.solution_uci) throw Error(ErrorKind::MissingSolution, "puzzle " + r.fen + " has no solution_uci");
  }
  PuzzleResult out;
  std::vector<prompt::ParsedOutput> parsed_all;
  std::size_t passes = 0;
  double value_sum = 0.0;
  std::size_t value_count = 0;

  for (const auto& r : puzzles) {
    const auto p = chess::parse_fen(r.fen);
    const auto legal = chess::legal_moves(p);
    std::optional<std::vector<UciMove>> mask;
    if (mode == prompt::TemplateKind::VamSelection) {
      auto m = r.allowed_moves ? data::typed_moves(*r.allowed_moves) : legal;
      std::sort(m.begin(), m.end());
      mask = std::move(m);
    }
    std::optional<verifier::ValueMap> vm;
    if (r.value_map) vm = data::typed_value_map(r);
    const auto text = prompt::build_prompt({mode, p.fen(), legal, mask});
    policy::PolicyRequest request{text, legal, mask, vm ? &*vm : nullptr};
    const auto outputs = policy.sample(request, 1);
    if (outputs.size() != 1) throw Error(ErrorKind::PolicyFailure, "policy returned no output");

    const auto parsed = prompt::parse_output(outputs.front(), legal, mask);
    PuzzleRow row;
    row.fen = r.fen;
    row.solution_uci = *r.solution_uci;
    row.output = outputs.front();
    row.verdict = parsed.verdict_string();
    row.pass = parsed.valid() && parsed.move->str() == *r.solution_uci;
    if (parsed.valid() && vm && vm->contains(*parsed.move)) {
      row.selected_value = vm->at(*parsed.move);
      value_sum += *row.selected_value;
      ++value_count;
    }
    passes += row.pass ? 1 : 0;
    parsed_all.push_back(parsed);
    out.rows.push_back(std::move(row));
  }

  out.total = puzzles.size();
  if (out.total > 0) {
    out.pass1_rate = static_cast<double>(passes) / static_cast<double>(out.total);
    const auto stats = prompt::compliance_stats(parsed_all);
    out.format_rate = stats.format_rate;
    out.legality_rate = stats.legality_rate;
    out.mask_rate = stats.mask_rate;
  }
  if (value_count > 0) out.mean_selected_value = value_sum / static_cast<double>(value_count);
  return out;
}

// ── reports ─────────────────────────────────────────────────────────────────

namespace {

json summary_json(const AcplSummary& s) {
  return {{"overall_acpl", s.overall_acpl}, {"acpl_per_move", s.acpl_per_move}, {"games", s.games},
          {"forfeits", s.forfeits},         {"wins", s.wins},                   {"draws", s.draws},
          {"losses", s.losses},             {"model_moves", s.model_moves}};
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string num(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error(ErrorKind::IoFailure, "write failed for " + path.string());
}

std::filesystem::path sibling(const std::filesystem::path& json_path, const std::string& suffix) {
  auto p = json_path;
  p.replace_filename(json_path.stem().string() + suffix);
  return p;
}

json dump_safe_config(const json& config) { return config.is_null() ? json::object() : config; }

}  // namespace

json to_json(const GameRecord& g) {
  json moves = json::array();
  for (const auto& m : g.moves) {
    moves.push_back({{"ply", m.ply},
                     {"mover", chess::to_string(m.mover)},
                     {"uci", m.move.str()},
                     {"e_before", m.e_before},
                     {"e_after", m.e_after},
                     {"cpl", m.cpl},
                     {"attempts", m.attempts},
                     {"before_time_bound", m.before_time_bound},
                     {"after_time_bound", m.after_time_bound}});
  }
  std::vector<std::string> uci;
  for (const auto& m : g.uci_moves) uci.push_back(m.str());
  return {{"model_color", chess::to_string(g.model_color)},
          {"opponent_depth", g.opponent_depth},
          {"result", to_string(g.result)},
          {"capped", g.capped},
          {"plies", g.plies},
          {"acpl", g.acpl()},
          {"invalid_outputs", g.invalid_outputs},
          {"uci_moves", uci},
          {"moves", moves}};
}

json to_json(const AcplReport& r) {
  json per_depth = json::object();
  for (const auto& [d, s] : r.per_depth) per_depth[std::to_string(d)] = summary_json(s);
  json games = json::array();
  for (const auto& g : r.games) games.push_back(to_json(g));
  json j = summary_json(r.overall);
  j["per_depth"] = per_depth;
  j["game_records"] = games;
  return j;
}

json to_json(const PuzzleResult& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    json x = {{"fen", row.fen}, {"solution_uci", row.solution_uci}, {"output", row.output},
              {"verdict", row.verdict}, {"pass", row.pass}};
    x["selected_value"] = row.selected_value ? json(*row.selected_value) : json(nullptr);
    rows.push_back(x);
  }
  json j = {{"total", r.total},         {"pass1_rate", r.pass1_rate}, {"format_rate", r.format_rate},
            {"legality_rate", r.legality_rate}, {"mask_rate", r.mask_rate}, {"rows", rows}};
  j["mean_selected_value"] = r.mean_selected_value ? json(*r.mean_selected_value) : json(nullptr);
  return j;
}

void write_puzzle_report(const PuzzleResult& r, const json& config, const std::filesystem::path& json_path) {
  json j = to_json(r);
  j["schema_version"] = kReportSchemaVersion;
  j["config"] = dump_safe_config(config);
  write_text(json_path, j.dump(2, ' ', false, json::error_handler_t::replace) + "\n");

  std::string csv = "fen,solution_uci,verdict,pass,selected_value\n";
  for (const auto& row : r.rows) {
    csv += csv_field(row.fen) + "," + row.solution_uci + "," + csv_field(row.verdict) + "," +
           (row.pass ? "1" : "0") + "," + (row.selected_value ? num(*row.selected_value) : "") + "\n";
  }
  write_text(sibling(json_path, ".csv"), csv);
}

void write_acpl_report(const AcplReport& r, const json& config, const std::filesystem::path& json_path) {
  json j = to_json(r);
  j["schema_version"] = kReportSchemaVersion;
  j["config"] = dump_safe_config(config);
  write_text(json_path, j.dump(2) + "\n");

  std::string games = "game,model_color,opponent_depth,result,capped,plies,model_moves,acpl\n";
  std::string moves = "game,ply,mover,uci,e_before,e_after,cpl,attempts,before_time_bound,after_time_bound\n";
  for (std::size_t i = 0; i < r.games.size(); ++i) {
    const auto& g = r.games[i];
    games += std::to_string(i) + "," + std::string(chess::to_string(g.model_color)) + "," +
             std::to_string(g.opponent_depth) + "," + std::string(to_string(g.result)) + "," +
             (g.capped ? "1" : "0") + "," + std::to_string(g.plies) + "," + std::to_string(g.moves.size()) + "," +
             num(g.acpl()) + "\n";
    for (const auto& m : g.moves) {
      moves += std::to_string(i) + "," + std::to_string(m.ply) + "," + std::string(chess::to_string(m.mover)) + "," +
               m.move.str() + "," + num(m.e_before) + "," + num(m.e_after) + "," + num(m.cpl) + "," +
               std::to_string(m.attempts) + "," + (m.before_time_bound ? "1" : "0") + "," +
               (m.after_time_bound ? "1" : "0") + "\n";
    }
  }
  write_text(sibling(json_path, "_games.csv"), games);
  write_text(sibling(json_path, "_moves.csv"), moves);
}

}  // namespace vam::eval
