#pragma once

/// Group-relative advantages, the clipped surrogate and the per-sample KL
/// estimator. Inputs are per-output scalars (callers may pass per-token means).

#include <span>
#include <vector>

namespace vam::grpo {

/// (r_i - mean) / std with the population standard deviation. All zeros when
/// std < std_floor. Throws Error(GroupTooSmall) for fewer than two rewards.
std::vector<double> advantages(std::span<const double> rewards, double std_floor = 1e-8);

/// mean_i min(rho_i A_i, clip(rho_i, 1-eps, 1+eps) A_i), rho_i = exp(new_i - old_i).
/// Throws Error(LengthMismatch).
double surrogate(std::span<const double> logp_new, std::span<const double> logp_old, std::span<const double> adv,
                 double clip_eps);

/// mean_i exp(ref_i - new_i) - (ref_i - new_i) - 1, which is never negative.
/// Throws Error(LengthMismatch).
double kl_penalty(std::span<const double> logp_new, std::span<const double> logp_ref);

/// surrogate - kl_coef * kl_penalty.
double objective(std::span<const double> logp_new, std::span<const double> logp_old,
                 std::span<const double> logp_ref, std::span<const double> adv, double clip_eps, double kl_coef);

}  // namespace vam::grpo
