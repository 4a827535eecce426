#include "vam/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vam/error.hpp"

namespace vam::grpo {

namespace {

void same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw Error(ErrorKind::LengthMismatch, std::string(what) + ": " + std::to_string(a) + " vs " + std::to_string(b));
  }
  if (a == 0) throw Error(ErrorKind::LengthMismatch, std::string(what) + ": empty input");
}

}  // namespace

std::vector<double> advantages(std::span<const double> rewards, double std_floor) {
  if (rewards.size() < 2) throw Error(ErrorKind::GroupTooSmall, "group of " + std::to_string(rewards.size()));
  const double n = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  const double sd = std::sqrt(var / n);

  std::vector<double> out(rewards.size(), 0.0);
  if (sd < std_floor) return out;
  for (std::size_t i = 0; i < rewards.size(); ++i) out[i] = (rewards[i] - mean) / sd;
  return out;
}

double surrogate(std::span<const double> logp_new, std::span<const double> logp_old, std::span<const double> adv,
                 double clip_eps) {
  same_length(logp_new.size(), logp_old.size(), "surrogate logp");
  same_length(logp_new.size(), adv.size(), "surrogate advantages");
  double total = 0.0;
  for (std::size_t i = 0; i < adv.size(); ++i) {
    const double ratio = std::exp(logp_new[i] - logp_old[i]);
    const double clipped = std::clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps);
    total += std::min(ratio * adv[i], clipped * adv[i]);
  }
  return total / static_cast<double>(adv.size());
}

double kl_penalty(std::span<const double> logp_new, std::span<const double> logp_ref) {
  same_length(logp_new.size(), logp_ref.size(), "kl logp");
  double total = 0.0;
  for (std::size_t i = 0; i < logp_new.size(); ++i) {
    const double d = logp_ref[i] - logp_new[i];
    total += std::exp(d) - d - 1.0;
  }
  return total / static_cast<double>(logp_new.size());
}

double objective(std::span<const double> logp_new, std::span<const double> logp_old,
                 std::span<const double> logp_ref, std::span<const double> adv, double clip_eps, double kl_coef) {
  return surrogate(logp_new, logp_old, adv, clip_eps) - kl_coef * kl_penalty(logp_new, logp_ref);
}

}  // namespace vam::grpo
