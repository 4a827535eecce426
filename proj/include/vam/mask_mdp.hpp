#pragma once

/// Action-masking MDP: augmented (position, mask) states, the masked reward
/// with a fixed penalty, the done indicator and the mask-update step.

#include <functional>
#include <optional>
#include <vector>

#include "vam/chess.hpp"
#include "vam/prompt.hpp"
#include "vam/verifier.hpp"

namespace vam::mdp {

struct AugmentedState {
  chess::Position position;
  std::vector<chess::UciMove> mask;  ///< sorted, subset of legal_moves(position)

  /// State whose mask is the full legal set.
  static AugmentedState unmasked(chess::Position p);
};

struct MaskMdpConfig {
  double penalty = 1.0;
  double gamma = 0.99;  // kept for completeness; every algorithm here is one decision per prompt

  /// Throws Error(ConfigError).
  void validate() const;
};

struct StepResult {
  double reward = 0.0;
  bool done = true;
  std::optional<AugmentedState> next;
};

/// Mask-update kernel U: (successor position, action, old mask) -> new mask.
using MaskUpdate = std::function<std::vector<chess::UciMove>(const chess::Position&, const chess::UciMove&,
                                                             const std::vector<chess::UciMove>&)>;

/// Default kernel: the successor's full legal set.
MaskUpdate reset_to_legal();

bool in_mask(const std::vector<chess::UciMove>& mask, const chess::UciMove& m);

/// mu(s, a) for a Valid in-mask action, -penalty for anything else.
double masked_reward(const verifier::ValueMap& vm, const std::vector<chess::UciMove>& mask,
                     const prompt::ParsedOutput& action, double penalty);

/// True unless the action is a Valid move inside the mask.
bool done(const prompt::ParsedOutput& action, const std::vector<chess::UciMove>& mask);

StepResult step(const AugmentedState& st, const verifier::ValueMap& vm, const prompt::ParsedOutput& action,
                const MaskUpdate& update, const MaskMdpConfig& cfg);

}  // namespace vam::mdp
