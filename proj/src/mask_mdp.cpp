#include "vam/mask_mdp.hpp"

#include <algorithm>

#include "vam/error.hpp"

namespace vam::mdp {

using chess::UciMove;

AugmentedState AugmentedState::unmasked(chess::Position p) {
  auto mask = chess::legal_moves(p);
  return AugmentedState{std::move(p), std::move(mask)};
}

void MaskMdpConfig::validate() const {
  if (!(penalty > 0.0)) throw Error(ErrorKind::ConfigError, "mask_mdp.penalty must be > 0");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw Error(ErrorKind::ConfigError, "mask_mdp.gamma must be in [0, 1)");
}

MaskUpdate reset_to_legal() {
  return [](const chess::Position& next, const UciMove&, const std::vector<UciMove>&) {
    return chess::legal_moves(next);
  };
}

bool in_mask(const std::vector<UciMove>& mask, const UciMove& m) {
  return std::find(mask.begin(), mask.end(), m) != mask.end();
}

double masked_reward(const verifier::ValueMap& vm, const std::vector<UciMove>& mask,
                     const prompt::ParsedOutput& action, double penalty) {
  if (done(action, mask)) return -penalty;
  return vm.at(*action.move);
}

bool done(const prompt::ParsedOutput& action, const std::vector<UciMove>& mask) {
  return !(action.valid() && action.move && in_mask(mask, *action.move));
}

StepResult step(const AugmentedState& st, const verifier::ValueMap& vm, const prompt::ParsedOutput& action,
                const MaskUpdate& update, const MaskMdpConfig& cfg) {
  StepResult r;
  r.reward = masked_reward(vm, st.mask, action, cfg.penalty);
  r.done = done(action, st.mask);
  if (r.done) return r;

  chess::Position next = chess::apply_move(st.position, *action.move);
  const auto legal = chess::legal_moves(next);
  std::vector<UciMove> mask = update(next, *action.move, st.mask);
  std::sort(mask.begin(), mask.end());
  mask.erase(std::unique(mask.begin(), mask.end()), mask.end());
  // Whatever the kernel proposes, the new mask may only hold moves legal in the successor.
  std::erase_if(mask, [&](const UciMove& m) { return !std::binary_search(legal.begin(), legal.end(), m); });
  r.next = AugmentedState{std::move(next), std::move(mask)};
  return r;
}

}  // namespace vam::mdp
