#include "vam/policy.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "vam/error.hpp"

namespace vam::policy {

using chess::UciMove;

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Outputs that no parser configuration accepts.
const std::vector<std::string>& malformed_outputs() {
  static const std::vector<std::string> kOutputs = {
      "<think>I am not sure.</think>I resign.",
      "<think>Castle.</think><uci_move>O-O</uci_move>",
      "<think>Two options.</think><uci_move>a1a1</uci_move><uci_move>h8h8</uci_move>",
      "<think>Knight.</think><uci_move>Nf3</uci_move>",
      "<think>Opening.</think><uci_move>e2e4",
  };
  return kOutputs;
}

const std::vector<UciMove>& require_candidates(const PolicyRequest& request) {
  const auto& c = request.candidates();
  if (c.empty()) throw Error(ErrorKind::PolicyFailure, "no candidate moves");
  return c;
}

}  // namespace

std::string format_move_output(const UciMove& m) {
  return "<think>Choosing " + m.str() + ".</think><uci_move>" + m.str() + "</uci_move>";
}

std::mt19937_64 CallRng::next(const std::string& prompt) {
  const std::uint64_t s = splitmix(splitmix(seed_) ^ splitmix(fnv1a(prompt)) ^ splitmix(calls_ + 0x51ed27));
  ++calls_;
  return std::mt19937_64(s);
}

// ── GreedyOracle ────────────────────────────────────────────────────────────

std::vector<std::string> GreedyOracle::sample(const PolicyRequest& request, int n) {
  if (!request.values) throw Error(ErrorKind::PolicyFailure, "greedy oracle needs a value map");
  const auto target = verifier::target_action(*request.values, require_candidates(request));
  return std::vector<std::string>(static_cast<std::size_t>(std::max(n, 0)), format_move_output(target.move));
}

// ── SoftmaxOracle ───────────────────────────────────────────────────────────

SoftmaxOracle::SoftmaxOracle(double temperature, double malformed_rate, std::uint64_t seed)
    : temperature_(temperature), malformed_rate_(malformed_rate), rng_(seed) {
  if (!(temperature > 0.0)) throw Error(ErrorKind::ConfigError, "softmax temperature must be > 0");
  if (!(malformed_rate >= 0.0 && malformed_rate <= 1.0)) {
    throw Error(ErrorKind::ConfigError, "malformed_rate must be in [0, 1]");
  }
}

std::vector<std::string> SoftmaxOracle::sample(const PolicyRequest& request, int n) {
  const auto& candidates = require_candidates(request);
  std::vector<double> weights(candidates.size(), 1.0);
  if (request.values) {
    double top = -1e300;
    for (const auto& m : candidates) top = std::max(top, request.values->at(m));
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      weights[i] = std::exp((request.values->at(candidates[i]) - top) / temperature_);
    }
  }
  auto gen = rng_.next(request.prompt);
  std::bernoulli_distribution broken(malformed_rate_);
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  std::uniform_int_distribution<std::size_t> junk(0, malformed_outputs().size() - 1);
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) {
    if (broken(gen)) {
      out.push_back(malformed_outputs()[junk(gen)]);
    } else {
      out.push_back(format_move_output(candidates[pick(gen)]));
    }
  }
  return out;
}

// ── RoundRobinScript ────────────────────────────────────────────────────────

std::vector<std::string> RoundRobinScript::sample(const PolicyRequest& request, int n) {
  const auto& candidates = require_candidates(request);
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back(format_move_output(candidates[counter_++ % candidates.size()]));
  return out;
}

// ── UniformRandom ───────────────────────────────────────────────────────────

std::vector<std::string> UniformRandom::sample(const PolicyRequest& request, int n) {
  const auto& candidates = require_candidates(request);
  auto gen = rng_.next(request.prompt);
  std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back(format_move_output(candidates[pick(gen)]));
  return out;
}

// ── FixedOutputs ────────────────────────────────────────────────────────────

FixedOutputs::FixedOutputs(std::vector<std::string> outputs) : outputs_(std::move(outputs)) {
  if (outputs_.empty()) throw Error(ErrorKind::ConfigError, "fixed output list is empty");
}

std::vector<std::string> FixedOutputs::sample(const PolicyRequest&, int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back(outputs_[next_++ % outputs_.size()]);
  return out;
}

// ── RemoteEndpoint ──────────────────────────────────────────────────────────

RemoteEndpoint::RemoteEndpoint(std::string url, GenerationParams params, int timeout_ms, int retries, int backoff_ms)
    : params_(params), timeout_ms_(timeout_ms), retries_(retries), backoff_ms_(backoff_ms) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw Error(ErrorKind::ConfigError, "endpoint url needs a scheme: " + url);
  const auto slash = url.find('/', scheme + 3);
  base_ = url.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : url.substr(slash);
}

std::vector<std::string> RemoteEndpoint::sample(const PolicyRequest& request, int n) {
  const nlohmann::json body = {
      {"prompt", request.prompt},
      {"n", n},
      {"temperature", params_.temperature},
      {"top_p", params_.top_p},
      {"max_tokens", params_.max_tokens},
  };
  const std::string payload = body.dump();

  ErrorKind last_kind = ErrorKind::EndpointUnavailable;
  std::string last_error;
  for (int attempt = 0; attempt <= retries_; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms_ << (attempt - 1)));

    httplib::Client client(base_);
    client.set_connection_timeout(std::chrono::milliseconds(std::min(timeout_ms_, 10000)));
    client.set_read_timeout(std::chrono::milliseconds(timeout_ms_));
    client.set_write_timeout(std::chrono::milliseconds(timeout_ms_));
    auto res = client.Post(path_, payload, "application/json");
    if (!res) {
      last_kind = res.error() == httplib::Error::Read ? ErrorKind::GenerationTimeout : ErrorKind::EndpointUnavailable;
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_kind = ErrorKind::EndpointUnavailable;
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    try {
      const auto reply = nlohmann::json::parse(res->body);
      auto outputs = reply.at("outputs").get<std::vector<std::string>>();
      if (static_cast<int>(outputs.size()) != n) {
        last_error = "expected " + std::to_string(n) + " outputs, got " + std::to_string(outputs.size());
        last_kind = ErrorKind::EndpointUnavailable;
        continue;
      }
      return outputs;
    } catch (const nlohmann::json::exception& e) {
      last_kind = ErrorKind::EndpointUnavailable;
      last_error = std::string("bad reply: ") + e.what();
    }
  }
  throw Error(last_kind, base_ + path_ + ": " + last_error);
}

// ── Factory ─────────────────────────────────────────────────────────────────

void PolicyConfig::validate() const {
  static const std::vector<std::string> kKinds = {"greedy_oracle", "softmax_oracle", "round_robin_script",
                                                  "uniform_random", "remote_endpoint"};
  if (std::find(kKinds.begin(), kKinds.end(), kind) == kKinds.end()) {
    throw Error(ErrorKind::ConfigError, "unknown policy kind '" + kind + "'");
  }
  if (!(temperature > 0.0)) throw Error(ErrorKind::ConfigError, "policy.temperature must be > 0");
  if (!(malformed_rate >= 0.0 && malformed_rate <= 1.0)) {
    throw Error(ErrorKind::ConfigError, "policy.malformed_rate must be in [0, 1]");
  }
  if (kind == "remote_endpoint" && url.empty()) throw Error(ErrorKind::ConfigError, "policy.url is required");
}

std::unique_ptr<Policy> make_policy(const PolicyConfig& cfg) {
  cfg.validate();
  if (cfg.kind == "greedy_oracle") return std::make_unique<GreedyOracle>();
  if (cfg.kind == "softmax_oracle") return std::make_unique<SoftmaxOracle>(cfg.temperature, cfg.malformed_rate, cfg.seed);
  if (cfg.kind == "round_robin_script") return std::make_unique<RoundRobinScript>();
  if (cfg.kind == "uniform_random") return std::make_unique<UniformRandom>(cfg.seed);
  return std::make_unique<RemoteEndpoint>(cfg.url, cfg.generation, cfg.timeout_ms, cfg.retries);
}

}  // namespace vam::policy
