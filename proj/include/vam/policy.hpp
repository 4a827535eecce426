#pragma once

/// Text policies. A policy turns one prompt into raw output strings; the
/// local oracle kinds additionally see the structured state so they can act
/// as scripted stand-ins for a language model.

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "vam/chess.hpp"
#include "vam/verifier.hpp"

namespace vam::policy {

struct PolicyRequest {
  std::string prompt;
  chess::LegalMoveSet legal;
  std::optional<std::vector<chess::UciMove>> mask;
  const verifier::ValueMap* values = nullptr;

  /// mask when present, else the legal set.
  const std::vector<chess::UciMove>& candidates() const { return mask ? *mask : legal; }
};

struct GenerationParams {
  double temperature = 1.0;
  double top_p = 1.0;
  int max_tokens = 2000;
};

class Policy {
 public:
  virtual ~Policy() = default;
  /// n raw outputs for one prompt.
  virtual std::vector<std::string> sample(const PolicyRequest& request, int n) = 0;
  /// True when the policy reads request.values; callers must then supply them.
  virtual bool needs_values() const { return false; }
  virtual std::string name() const = 0;
};

/// `<think>...</think><uci_move>m</uci_move>`
std::string format_move_output(const chess::UciMove& m);

/// Deterministic per-call generator: seeded from (seed, prompt, call index).
class CallRng {
 public:
  explicit CallRng(std::uint64_t seed) : seed_(seed) {}
  std::mt19937_64 next(const std::string& prompt);
  std::uint64_t calls() const noexcept { return calls_; }

 private:
  std::uint64_t seed_;
  std::uint64_t calls_ = 0;
};

/// Always the mu-argmax of the candidates (ties to the smallest UCI string).
class GreedyOracle final : public Policy {
 public:
  std::vector<std::string> sample(const PolicyRequest& request, int n) override;
  bool needs_values() const override { return true; }
  std::string name() const override { return "greedy_oracle"; }
};

/// Samples candidates with probability proportional to exp(mu / temperature);
/// with probability malformed_rate emits an unparsable output instead.
class SoftmaxOracle final : public Policy {
 public:
  SoftmaxOracle(double temperature, double malformed_rate, std::uint64_t seed);
  std::vector<std::string> sample(const PolicyRequest& request, int n) override;
  bool needs_values() const override { return true; }
  std::string name() const override { return "softmax_oracle"; }

 private:
  double temperature_;
  double malformed_rate_;
  CallRng rng_;
};

/// Cycles through the candidate list with a counter that persists across
/// calls: on {a,b,c} with n=2 it yields a,b then c,a.
class RoundRobinScript final : public Policy {
 public:
  std::vector<std::string> sample(const PolicyRequest& request, int n) override;
  std::string name() const override { return "round_robin_script"; }

 private:
  std::uint64_t counter_ = 0;
};

class UniformRandom final : public Policy {
 public:
  explicit UniformRandom(std::uint64_t seed) : rng_(seed) {}
  std::vector<std::string> sample(const PolicyRequest& request, int n) override;
  std::string name() const override { return "uniform_random"; }

 private:
  CallRng rng_;
};

/// Replays a fixed list of raw outputs in order, wrapping around.
class FixedOutputs final : public Policy {
 public:
  explicit FixedOutputs(std::vector<std::string> outputs);
  std::vector<std::string> sample(const PolicyRequest& request, int n) override;
  std::string name() const override { return "fixed_outputs"; }

 private:
  std::vector<std::string> outputs_;
  std::size_t next_ = 0;
};

/// HTTP generation endpoint. POSTs {prompt, n, temperature, top_p, max_tokens}
/// as JSON and expects {"outputs": [string, ...]} with exactly n entries.
class RemoteEndpoint final : public Policy {
 public:
  RemoteEndpoint(std::string url, GenerationParams params, int timeout_ms = 120000, int retries = 3,
                 int backoff_ms = 200);
  std::vector<std::string> sample(const PolicyRequest& request, int n) override;
  std::string name() const override { return "remote_endpoint"; }

 private:
  std::string base_;
  std::string path_;
  GenerationParams params_;
  int timeout_ms_;
  int retries_;
  int backoff_ms_;
};

struct PolicyConfig {
  std::string kind = "greedy_oracle";  ///< greedy_oracle | softmax_oracle | round_robin_script | uniform_random | remote_endpoint
  std::uint64_t seed = 0;
  double temperature = 1.0;
  double malformed_rate = 0.0;
  std::string url;
  GenerationParams generation;
  int timeout_ms = 120000;
  int retries = 3;

  void validate() const;
};

std::unique_ptr<Policy> make_policy(const PolicyConfig& cfg);

}  // namespace vam::policy
