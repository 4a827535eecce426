#include "vam/data_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "vam/error.hpp"
#include "vam/prompt.hpp"

namespace vam::data {

using chess::UciMove;
using nlohmann::json;

std::vector<std::string> validate_record(const TrainingRecord& r) {
  std::vector<std::string> v;
  chess::Position p;
  try {
    p = chess::parse_fen(r.fen);
  } catch (const Error& e) {
    v.push_back("invalid fen: " + std::string(e.what()));
    return v;
  }
  std::set<std::string> legal;
  for (const auto& m : chess::legal_moves(p)) legal.insert(m.str());

  std::set<std::string> listed;
  for (const auto& m : r.legal_moves_uci) {
    if (!UciMove::is_valid_syntax(m)) v.push_back("legal_moves_uci: '" + m + "' is not strict UCI");
    if (!listed.insert(m).second) v.push_back("legal_moves_uci: duplicate '" + m + "'");
  }
  if (listed != legal) {
    for (const auto& m : listed) {
      if (!legal.count(m)) v.push_back("legal_moves_uci: '" + m + "' is not legal");
    }
    for (const auto& m : legal) {
      if (!listed.count(m)) v.push_back("legal_moves_uci: missing legal move '" + m + "'");
    }
  }

  if (r.value_map) {
    for (const auto& [k, x] : *r.value_map) {
      if (!legal.count(k)) v.push_back("value_map: key '" + k + "' is not a legal move");
      if (!std::isfinite(x) || x < 0.0 || x > 1.0) {
        std::ostringstream os;
        os << "value_map: '" << k << "' = " << x << " outside [0, 1]";
        v.push_back(os.str());
      }
    }
    for (const auto& m : legal) {
      if (!r.value_map->count(m)) v.push_back("value_map: no value for legal move '" + m + "'");
    }
  }
  if (r.allowed_moves) {
    if (r.allowed_moves->empty()) v.push_back("considered_moves_uci: empty");
    std::set<std::string> seen;
    for (const auto& m : *r.allowed_moves) {
      if (!legal.count(m)) v.push_back("considered_moves_uci: '" + m + "' is not a legal move");
      if (!seen.insert(m).second) v.push_back("considered_moves_uci: duplicate '" + m + "'");
    }
  }
  if (r.solution_uci && !legal.count(*r.solution_uci)) {
    v.push_back("solution_uci: '" + *r.solution_uci + "' is not a legal move");
  }
  return v;
}

namespace {

std::vector<TrainingRecord> parse_records(const std::filesystem::path& path, const std::vector<RawLine>& lines,
                                          bool with_offsets) {
  std::vector<TrainingRecord> out;
  std::vector<std::string> problems;
  for (const auto& line : lines) {
    std::string where = path.string() + ":" + std::to_string(line.line_number);
    if (with_offsets) where += " (byte offset " + std::to_string(line.byte_offset) + ")";
    try {
      auto r = record_from_json(json::parse(line.text));
      const auto v = validate_record(r);
      for (const auto& msg : v) problems.push_back(where + ": " + msg);
      if (v.empty()) out.push_back(std::move(r));
    } catch (const json::parse_error& e) {
      problems.push_back(where + ": not valid JSON (" + e.what() + ")");
    } catch (const Error& e) {
      problems.push_back(where + ": " + e.what());
    }
  }
  if (!problems.empty()) {
    std::string msg = std::to_string(problems.size()) + " problem(s)";
    const std::size_t shown = std::min<std::size_t>(problems.size(), 20);
    for (std::size_t i = 0; i < shown; ++i) msg += "\n  " + problems[i];
    if (shown < problems.size()) msg += "\n  ...";
    throw Error(ErrorKind::SchemaError, msg);
  }
  return out;
}

}  // namespace

std::vector<TrainingRecord> load_dataset(const std::filesystem::path& path) {
  return parse_records(path, read_lines(path, false), false);
}

std::vector<TrainingRecord> load_buffer(const std::filesystem::path& path) {
  return parse_records(path, read_lines(path, true), true);
}

void persist_buffer(const std::vector<TrainingRecord>& records, const std::filesystem::path& path, bool append) {
  std::vector<std::string> lines;
  lines.reserve(records.size());
  for (const auto& r : records) lines.push_back(to_json(r).dump());
  append_lines(path, lines, !append);
}

TrainingRecord with_argmax_solution(TrainingRecord r) {
  const auto vm = typed_value_map(r);
  const auto candidates = typed_moves(r.allowed_moves ? *r.allowed_moves : r.legal_moves_uci);
  r.solution_uci = verifier::target_action(vm, candidates).move.str();
  return r;
}

// ── engine play ─────────────────────────────────────────────────────────────

void PlayConfig::validate() const {
  if (pool_size < 1) throw Error(ErrorKind::ConfigError, "collect.pool_size must be >= 1");
  if (max_plies < 1) throw Error(ErrorKind::ConfigError, "collect.max_plies must be >= 1");
  if (attempts < 1) throw Error(ErrorKind::ConfigError, "collect.attempts must be >= 1");
  if (verifier_depth < 1) throw Error(ErrorKind::ConfigError, "collect.verifier_depth must be >= 1");
}

namespace {

struct Slot {
  chess::Game game;
  chess::Color model_color = chess::Color::White;
  verifier::ValueMap values;  // for the current position, filled each sweep
};

TrainingRecord make_record(const chess::Position& p, const chess::LegalMoveSet& legal, const verifier::ValueMap& vm,
                           const PlayConfig& cfg, bool engine_wdl) {
  TrainingRecord r;
  r.fen = p.fen();
  for (const auto& m : legal) r.legal_moves_uci.push_back(m.str());
  std::map<std::string, double> values;
  for (const auto& [m, x] : vm.scores) values.emplace(m.str(), x);
  r.value_map = std::move(values);
  r.source = RecordSource::EnginePlay;
  r.metadata.verifier_depth = cfg.verifier_depth;
  r.metadata.reward_kind = cfg.reward_kind;
  r.metadata.collection_seed = cfg.seed;
  r.metadata.wdl_source = engine_wdl ? "engine" : "logistic";
  return r;
}

}  // namespace

CollectResult collect_by_play(policy::Policy& play_policy, engine::EngineHandle& opponent,
                              engine::EngineHandle& verifier, const PlayConfig& cfg, std::size_t budget) {
  cfg.validate();
  if (budget < 1) throw Error(ErrorKind::InvalidArgument, "collection budget must be >= 1");
  const bool engine_wdl = verifier.config().show_wdl && verifier.supports_wdl();

  CollectResult result;
  std::vector<Slot> pool(static_cast<std::size_t>(cfg.pool_size));
  for (std::size_t i = 0; i < pool.size(); ++i) {
    pool[i].model_color = i % 2 == 0 ? chess::Color::White : chess::Color::Black;
  }
  result.stats.games_started = pool.size();

  auto restart = [&](Slot& slot) {
    slot.game = chess::Game{};
    ++result.stats.games_started;
  };

  while (result.records.size() < budget) {
    for (auto& slot : pool) {
      const auto& p = slot.game.position();
      const auto legal = chess::legal_moves(p);
      slot.values = verifier::build_value_map(verifier, p, cfg.reward_kind, cfg.verifier_depth);
      result.records.push_back(make_record(p, legal, slot.values, cfg, engine_wdl));
      if (result.records.size() >= budget) break;
    }
    if (result.records.size() >= budget) break;

    for (auto& slot : pool) {
      const auto& p = slot.game.position();
      std::optional<UciMove> move;
      if (p.side_to_move() == slot.model_color) {
        const auto legal = chess::legal_moves(p);
        const auto text = prompt::build_prompt({prompt::TemplateKind::Baseline, p.fen(), legal, std::nullopt});
        policy::PolicyRequest request{text, legal, std::nullopt, &slot.values};
        for (int attempt = 0; attempt < cfg.attempts && !move; ++attempt) {
          const auto outputs = play_policy.sample(request, 1);
          if (outputs.size() != 1) throw Error(ErrorKind::PolicyFailure, "policy returned no output");
          const auto parsed = prompt::parse_output(outputs.front(), legal, std::nullopt);
          if (parsed.valid()) {
            move = parsed.move;
          } else {
            ++result.stats.invalid_outputs;
          }
        }
        if (!move) {
          ++result.stats.forfeits;
          restart(slot);
          continue;
        }
      } else {
        move = opponent.best_move(p, opponent.config().search_depth);
      }
      slot.game.play(*move);
      if (slot.game.outcome().terminal() || slot.game.plies() >= cfg.max_plies) {
        ++result.stats.games_finished;
        restart(slot);
      }
    }
  }
  return result;
}

// ── rejection sampling ──────────────────────────────────────────────────────

FilterResult rejection_filter(const std::vector<TrainingRecord>& records, policy::Policy& policy,
                              int samples_per_prompt) {
  if (samples_per_prompt < 1) throw Error(ErrorKind::InvalidArgument, "samples_per_prompt must be >= 1");
  for (const auto& r : records) {
    if (!r.solution_uci) throw Error(ErrorKind::MissingSolution, "record " + r.fen + " has no solution_uci");
  }
  FilterResult out;
  for (const auto& r : records) {
    const auto p = chess::parse_fen(r.fen);
    const auto legal = chess::legal_moves(p);
    const auto text = prompt::build_prompt({prompt::TemplateKind::Baseline, p.fen(), legal, std::nullopt});
    std::optional<verifier::ValueMap> vm;
    if (r.value_map) vm = typed_value_map(r);
    policy::PolicyRequest request{text, legal, std::nullopt, vm ? &*vm : nullptr};
    for (const auto& gen : policy.sample(request, samples_per_prompt)) {
      ++out.generations;
      const auto parsed = prompt::parse_output(gen, legal, std::nullopt);
      if (parsed.valid() && parsed.move->str() == *r.solution_uci) {
        out.accepted.push_back({r.fen, text, gen, *r.solution_uci});
      }
    }
  }
  out.acceptance_rate = out.generations ? static_cast<double>(out.accepted.size()) / out.generations : 0.0;
  return out;
}

}  // namespace vam::data
