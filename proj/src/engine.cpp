#include "vam/engine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vam/error.hpp"

namespace vam::engine {

using chess::Position;
using chess::UciMove;

void EngineConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::ConfigError, "engine: " + what); };
  if (executable_path.empty()) fail("executable_path is empty");
  if (skill_level < 0 || skill_level > 20) fail("skill_level must be in 0..20");
  if (search_depth < 1) fail("search_depth must be >= 1");
  if (movetime_ms && *movetime_ms < 1) fail("movetime_ms must be positive");
  if (threads < 1) fail("threads must be >= 1");
  if (hash_mb < 1) fail("hash_mb must be >= 1");
  if (timeout.count() < 1) fail("timeout must be positive");
  if (retries < 0) fail("retries must be >= 0");
}

bool Wdl::normalized(double tol) const noexcept {
  return win >= 0 && draw >= 0 && loss >= 0 && std::abs(win + draw + loss - 1.0) <= tol;
}

EngineEval EngineEval::centipawns(int cp, std::optional<Wdl> wdl) {
  return EngineEval{Kind::Centipawns, cp, wdl, 0};
}

EngineEval EngineEval::mate_in(int moves, std::optional<Wdl> wdl) {
  if (moves == 0) throw Error(ErrorKind::ProtocolError, "mate distance 0");
  return EngineEval{Kind::Mate, moves, wdl, 0};
}

EngineEval EngineEval::from_parent() const {
  EngineEval out = *this;
  if (kind == Kind::Centipawns) {
    out.value = -value;
  } else {
    // The child side mating in n means the mover is mated in n; the child side
    // being mated in n means the mover mates in n + 1 counting its own move.
    out.value = value > 0 ? -value : -value + 1;
  }
  if (wdl) out.wdl = wdl->flipped();
  return out;
}

std::string to_string(const EngineEval& e) {
  std::ostringstream os;
  os << (e.is_mate() ? "mate " : "cp ") << e.value;
  if (e.wdl) os << " wdl " << e.wdl->win << '/' << e.wdl->draw << '/' << e.wdl->loss;
  return os.str();
}

Wdl logistic_wdl(int centipawns) {
  const double win = 1.0 / (1.0 + std::pow(10.0, -centipawns / 400.0));
  return {win, 0.0, 1.0 - win};
}

Wdl resolve_wdl(const EngineEval& e) {
  if (e.is_mate()) return e.value > 0 ? Wdl{1.0, 0.0, 0.0} : Wdl{0.0, 0.0, 1.0};
  if (e.wdl) return *e.wdl;
  return logistic_wdl(e.value);
}

InfoLine parse_info_line(const std::string& line) {
  std::istringstream in(line);
  std::string tok;
  in >> tok;
  if (tok != "info") throw Error(ErrorKind::ProtocolError, "not an info line: " + line);

  auto read_int = [&](const char* field) {
    std::string v;
    if (!(in >> v)) throw Error(ErrorKind::ProtocolError, std::string("missing ") + field + " in: " + line);
    try {
      std::size_t used = 0;
      const long long n = std::stoll(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return static_cast<int>(n);
    } catch (const std::exception&) {
      throw Error(ErrorKind::ProtocolError, std::string("bad ") + field + " '" + v + "' in: " + line);
    }
  };

  InfoLine info;
  std::optional<EngineEval::Kind> kind;
  int value = 0;
  std::optional<Wdl> wdl;
  while (in >> tok) {
    if (tok == "depth") {
      info.depth = read_int("depth");
    } else if (tok == "multipv") {
      info.multipv = read_int("multipv");
    } else if (tok == "score") {
      std::string k;
      in >> k;
      if (k == "cp") {
        kind = EngineEval::Kind::Centipawns;
      } else if (k == "mate") {
        kind = EngineEval::Kind::Mate;
      } else {
        throw Error(ErrorKind::ProtocolError, "bad score kind '" + k + "' in: " + line);
      }
      value = read_int("score");
    } else if (tok == "lowerbound" || tok == "upperbound") {
      info.bound = true;
    } else if (tok == "wdl") {
      const int w = read_int("wdl");
      const int d = read_int("wdl");
      const int l = read_int("wdl");
      const int total = w + d + l;
      if (w < 0 || d < 0 || l < 0 || total <= 0) throw Error(ErrorKind::ProtocolError, "bad wdl in: " + line);
      wdl = Wdl{static_cast<double>(w) / total, static_cast<double>(d) / total, static_cast<double>(l) / total};
    } else if (tok == "pv" || tok == "string") {
      break;
    }
  }
  if (kind) {
    if (*kind == EngineEval::Kind::Mate && value == 0) {
      throw Error(ErrorKind::ProtocolError, "mate 0 reported for a searched position: " + line);
    }
    EngineEval e = *kind == EngineEval::Kind::Mate ? EngineEval::mate_in(value, wdl) : EngineEval::centipawns(value, wdl);
    e.depth = info.depth;
    info.score = e;
  }
  return info;
}

// ── EngineHandle ────────────────────────────────────────────────────────────

EngineHandle::EngineHandle(EngineConfig cfg) : cfg_(std::move(cfg)) {}

EngineHandle::~EngineHandle() {
  if (proc_) {
    proc_->write_line("quit");
    proc_->terminate();
  }
}

std::unique_ptr<EngineHandle> EngineHandle::start(const EngineConfig& cfg) {
  cfg.validate();
  std::unique_ptr<EngineHandle> h(new EngineHandle(cfg));
  h->launch();
  h->handshake();
  return h;
}

void EngineHandle::launch() {
  proc_ = std::make_unique<Subprocess>(std::vector<std::string>{cfg_.executable_path});
}

void EngineHandle::send(const std::string& line) {
  if (!proc_->write_line(line)) throw Error(ErrorKind::ProtocolError, "engine closed its input");
}

std::string EngineHandle::read_until(const std::string& prefix, std::vector<std::string>* collected) {
  const auto deadline = std::chrono::steady_clock::now() + cfg_.timeout;
  for (;;) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) throw Error(ErrorKind::EngineTimeout, "waiting for '" + prefix + "'");
    auto line = proc_->read_line(left);
    if (!line) {
      if (proc_->eof()) throw Error(ErrorKind::ProtocolError, "engine exited while waiting for '" + prefix + "'");
      throw Error(ErrorKind::EngineTimeout, "waiting for '" + prefix + "'");
    }
    if (line->rfind(prefix, 0) == 0) return *line;
    if (collected) collected->push_back(*line);
  }
}

void EngineHandle::handshake() {
  std::vector<std::string> lines;
  try {
    send("uci");
    read_until("uciok", &lines);
  } catch (const Error& e) {
    throw Error(ErrorKind::HandshakeTimeout, std::string("no uciok from ") + cfg_.executable_path + " (" + e.what() + ")");
  }
  options_.clear();
  for (const auto& line : lines) {
    if (line.rfind("id name ", 0) == 0) name_ = line.substr(8);
    if (line.rfind("option name ", 0) == 0) {
      const auto type_pos = line.find(" type ");
      options_.insert(line.substr(12, type_pos == std::string::npos ? std::string::npos : type_pos - 12));
    }
  }
  if (cfg_.show_wdl && !supports_wdl()) {
    throw Error(ErrorKind::UnsupportedOption, "engine does not offer UCI_ShowWDL");
  }
  if (cfg_.skill_level != 20 && !options_.count("Skill Level")) {
    throw Error(ErrorKind::UnsupportedOption, "engine does not offer Skill Level");
  }
  if (options_.count("Threads")) send("setoption name Threads value " + std::to_string(cfg_.threads));
  if (options_.count("Hash")) send("setoption name Hash value " + std::to_string(cfg_.hash_mb));
  if (options_.count("Skill Level")) send("setoption name Skill Level value " + std::to_string(cfg_.skill_level));
  if (cfg_.show_wdl) send("setoption name UCI_ShowWDL value true");
  try {
    send("isready");
    read_until("readyok", nullptr);
  } catch (const Error& e) {
    throw Error(ErrorKind::HandshakeTimeout, std::string("no readyok (") + e.what() + ")");
  }
}

SearchResult EngineHandle::search_once(const Position& p, int depth, std::optional<int> movetime_ms) {
  send("ucinewgame");
  send("isready");
  read_until("readyok", nullptr);
  send("position fen " + p.fen());
  std::string go = "go depth " + std::to_string(depth);
  if (movetime_ms) go += " movetime " + std::to_string(*movetime_ms);
  send(go);

  std::vector<std::string> lines;
  const std::string best_line = read_until("bestmove", &lines);

  std::optional<EngineEval> last;
  for (const auto& line : lines) {
    if (line.rfind("info", 0) != 0) continue;
    const InfoLine info = parse_info_line(line);
    if (info.score && info.multipv == 1 && !info.bound) last = info.score;
  }
  if (!last) throw Error(ErrorKind::ProtocolError, "search returned no score for " + p.fen());

  SearchResult result{*last, std::nullopt, last->depth < depth};
  std::istringstream in(best_line);
  std::string tok;
  std::string move;
  in >> tok >> move;
  if (!move.empty() && move != "(none)" && move != "0000") {
    if (!UciMove::is_valid_syntax(move)) throw Error(ErrorKind::ProtocolError, "bad bestmove: " + best_line);
    result.best_move = UciMove::parse(move);
  }
  return result;
}

SearchResult EngineHandle::search(const Position& p, int depth, std::optional<int> movetime_ms) {
  if (depth < 1) throw Error(ErrorKind::InvalidArgument, "depth must be >= 1");
  if (p.generate_legal().empty()) throw Error(ErrorKind::TerminalPosition, p.fen());
  for (int attempt = 0;; ++attempt) {
    try {
      return search_once(p, depth, movetime_ms);
    } catch (const Error& e) {
      const bool retryable = e.kind() == ErrorKind::EngineTimeout || e.kind() == ErrorKind::ProtocolError;
      if (!retryable || attempt >= cfg_.retries) throw;
      // Start from a clean process; the old one may be mid-search or wedged.
      proc_->terminate();
      launch();
      handshake();
    }
  }
}

EngineEval EngineHandle::evaluate(const Position& p, int depth) {
  return search(p, depth, cfg_.movetime_ms).eval;
}

MoveScores EngineHandle::score_moves(const Position& p, const chess::LegalMoveSet& candidates, int depth) {
  const auto legal = chess::legal_moves(p);
  for (const auto& m : candidates) {
    if (!std::binary_search(legal.begin(), legal.end(), m)) {
      throw Error(ErrorKind::IllegalCandidate, m.str() + " in " + p.fen());
    }
  }
  MoveScores scores;
  for (const auto& m : candidates) {
    const Position child = chess::apply_move(p, m);
    const chess::Outcome outcome = chess::game_outcome(child);
    if (outcome.kind == chess::OutcomeKind::Checkmate) {
      scores.insert_or_assign(m, EngineEval::mate_in(1, Wdl{1.0, 0.0, 0.0}));
    } else if (outcome.terminal()) {
      scores.insert_or_assign(m, EngineEval::centipawns(0, Wdl{0.0, 1.0, 0.0}));
    } else {
      scores.insert_or_assign(m, evaluate(child, depth).from_parent());
    }
  }
  return scores;
}

UciMove EngineHandle::best_move(const Position& p, int depth) {
  const SearchResult r = search(p, depth, cfg_.movetime_ms);
  if (!r.best_move) throw Error(ErrorKind::NoBestMove, p.fen());
  if (!chess::is_legal(p, *r.best_move)) {
    throw Error(ErrorKind::ProtocolError, "engine proposed illegal move " + r.best_move->str());
  }
  return *r.best_move;
}

// ── EnginePool ──────────────────────────────────────────────────────────────

EnginePool::EnginePool(const EngineConfig& cfg, int size) : size_(size) {
  if (size < 1) throw Error(ErrorKind::ConfigError, "engine pool size must be >= 1");
  for (int i = 0; i < size; ++i) idle_.push_back(EngineHandle::start(cfg));
}

EnginePool::Lease EnginePool::acquire() {
  std::unique_lock lock(mutex_);
  available_.wait(lock, [&] { return !idle_.empty(); });
  auto handle = std::move(idle_.back());
  idle_.pop_back();
  return Lease(*this, std::move(handle));
}

void EnginePool::release(std::unique_ptr<EngineHandle> handle) {
  {
    std::lock_guard lock(mutex_);
    idle_.push_back(std::move(handle));
  }
  available_.notify_one();
}

EnginePool::Lease::~Lease() {
  if (handle_) pool_->release(std::move(handle_));
}

}  // namespace vam::engine
