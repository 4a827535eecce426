#pragma once

/// Client for external engines speaking the UCI text protocol.
///
/// Every query starts with `ucinewgame` so that results depend only on the
/// position and the search limits, never on hash contents left by earlier
/// queries. With Threads=1 and a fixed depth this makes analysis repeatable.

#include <chrono>
#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vam/chess.hpp"
#include "vam/subprocess.hpp"

namespace vam::engine {

struct EngineConfig {
  std::string executable_path;
  int skill_level = 20;  ///< 0..20
  int search_depth = 10;
  std::optional<int> movetime_ms;
  bool show_wdl = true;
  int threads = 1;
  int hash_mb = 16;
  std::chrono::milliseconds timeout{10000};  ///< per query
  int retries = 3;

  /// Throws Error(ConfigError).
  void validate() const;
};

struct Wdl {
  double win = 0.0;
  double draw = 0.0;
  double loss = 0.0;

  Wdl flipped() const noexcept { return {loss, draw, win}; }
  bool normalized(double tol = 1e-6) const noexcept;

  friend bool operator==(const Wdl&, const Wdl&) = default;
};

/// Engine score from one side's point of view.
struct EngineEval {
  enum class Kind { Centipawns, Mate };

  Kind kind = Kind::Centipawns;
  /// Centipawns, or signed moves-to-mate (never 0) for Kind::Mate.
  int value = 0;
  std::optional<Wdl> wdl;  ///< engine-reported, when available
  int depth = 0;           ///< depth actually reached by the search

  static EngineEval centipawns(int cp, std::optional<Wdl> wdl = std::nullopt);
  static EngineEval mate_in(int moves, std::optional<Wdl> wdl = std::nullopt);

  bool is_mate() const noexcept { return kind == Kind::Mate; }
  /// Same evaluation seen from the opponent, one ply earlier: the value of
  /// the move leading to the evaluated position, for the player who made it.
  EngineEval from_parent() const;

  friend bool operator==(const EngineEval&, const EngineEval&) = default;
};

std::string to_string(const EngineEval& e);

/// WDL for an evaluation: mate is decisive, otherwise the engine's own report,
/// otherwise the logistic expected-score curve with no draw mass.
Wdl resolve_wdl(const EngineEval& e);
/// p_W = 1 / (1 + 10^(-cp/400)).
Wdl logistic_wdl(int centipawns);

using MoveScores = std::map<chess::UciMove, EngineEval>;

/// Parsed `info` line; only the fields the harness uses.
struct InfoLine {
  int depth = 0;
  int multipv = 1;
  std::optional<EngineEval> score;
  bool bound = false;  ///< lowerbound/upperbound score
};

/// Parses a UCI `info` line. Throws Error(ProtocolError) on a malformed score.
InfoLine parse_info_line(const std::string& line);

struct SearchResult {
  EngineEval eval;
  std::optional<chess::UciMove> best_move;
  /// True when the search stopped before reaching the requested depth, i.e.
  /// the movetime ceiling was the binding limit.
  bool movetime_bound = false;
};

/// One engine process. Not thread-safe; use EnginePool for parallel work.
class EngineHandle {
 public:
  /// Spawns the engine and completes the handshake. Throws
  /// EngineSpawnFailure, HandshakeTimeout or UnsupportedOption.
  static std::unique_ptr<EngineHandle> start(const EngineConfig& cfg);
  ~EngineHandle();

  const EngineConfig& config() const noexcept { return cfg_; }
  bool supports_wdl() const noexcept { return options_.count("UCI_ShowWDL") > 0; }
  const std::string& engine_name() const noexcept { return name_; }

  /// Evaluation from the side to move. Throws TerminalPosition for positions
  /// with no legal moves, EngineTimeout, ProtocolError.
  EngineEval evaluate(const chess::Position& p, int depth);
  EngineEval evaluate(const chess::Position& p) { return evaluate(p, cfg_.search_depth); }
  SearchResult search(const chess::Position& p, int depth, std::optional<int> movetime_ms);

  /// One evaluation per candidate, each from the perspective of the player to
  /// move in p, computed by evaluating the child position. Throws
  /// IllegalCandidate when a candidate is not legal in p.
  MoveScores score_moves(const chess::Position& p, const chess::LegalMoveSet& candidates, int depth);

  /// Throws TerminalPosition, NoBestMove, EngineTimeout.
  chess::UciMove best_move(const chess::Position& p, int depth);

 private:
  explicit EngineHandle(EngineConfig cfg);
  void launch();
  void handshake();
  void send(const std::string& line);
  std::string read_until(const std::string& prefix, std::vector<std::string>* collected);
  SearchResult search_once(const chess::Position& p, int depth, std::optional<int> movetime_ms);

  EngineConfig cfg_;
  std::unique_ptr<Subprocess> proc_;
  std::set<std::string> options_;
  std::string name_;
};

/// Fixed set of engine handles with the same configuration.
class EnginePool {
 public:
  EnginePool(const EngineConfig& cfg, int size);

  class Lease {
   public:
    Lease(EnginePool& pool, std::unique_ptr<EngineHandle> handle) : pool_(&pool), handle_(std::move(handle)) {}
    Lease(Lease&&) = default;
    Lease& operator=(Lease&&) = delete;
    ~Lease();
    EngineHandle& operator*() const noexcept { return *handle_; }
    EngineHandle* operator->() const noexcept { return handle_.get(); }

   private:
    EnginePool* pool_;
    std::unique_ptr<EngineHandle> handle_;
  };

  /// Blocks until a handle is free.
  Lease acquire();
  int size() const noexcept { return size_; }

 private:
  void release(std::unique_ptr<EngineHandle> handle);

  std::mutex mutex_;
  std::condition_variable available_;
  std::vector<std::unique_ptr<EngineHandle>> idle_;
  int size_;
};

}  // namespace vam::engine
