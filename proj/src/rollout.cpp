#include "vam/rollout.hpp"

#include <algorithm>
#include <set>

#include "vam/error.hpp"
#include "vam/grpo.hpp"
#include "vam/mask_mdp.hpp"
#include "vam/records.hpp"

namespace vam::rollout {

using chess::UciMove;

void GrpoConfig::validate() const {
  if (group_size < 2) throw Error(ErrorKind::ConfigError, "grpo.group_size must be >= 2");
  if (max_rounds < 1) throw Error(ErrorKind::ConfigError, "grpo.max_rounds must be >= 1");
  if (!(clip_eps > 0.0)) throw Error(ErrorKind::ConfigError, "grpo.clip_eps must be > 0");
  if (!(kl_coef >= 0.0)) throw Error(ErrorKind::ConfigError, "grpo.kl_coef must be >= 0");
  if (!(std_floor >= 0.0)) throw Error(ErrorKind::ConfigError, "grpo.std_floor must be >= 0");
  if (!(temperature > 0.0)) throw Error(ErrorKind::ConfigError, "grpo.temperature must be > 0");
  if (!(top_p > 0.0 && top_p <= 1.0)) throw Error(ErrorKind::ConfigError, "grpo.top_p must be in (0, 1]");
  if (max_response_tokens < 1) throw Error(ErrorKind::ConfigError, "grpo.max_response_tokens must be >= 1");
}

std::vector<std::string> sample_group(policy::Policy& policy, const policy::PolicyRequest& request, int group_size) {
  if (group_size < 1) throw Error(ErrorKind::InvalidArgument, "group size must be >= 1");
  auto outputs = policy.sample(request, group_size);
  if (static_cast<int>(outputs.size()) != group_size) {
    throw Error(ErrorKind::LengthMismatch, policy.name() + " returned " + std::to_string(outputs.size()) +
                                               " outputs for a group of " + std::to_string(group_size));
  }
  return outputs;
}

std::vector<UciMove> distinct_valid(const RolloutGroup& g) {
  std::set<UciMove> seen;
  for (const auto& p : g.parsed) {
    if (p.valid()) seen.insert(*p.move);
  }
  return {seen.begin(), seen.end()};
}

PruneTrace prune_and_sample(policy::Policy& policy, const chess::Position& s, const verifier::ValueMap& vm,
                            std::vector<UciMove> m0, const GrpoConfig& cfg, double penalty) {
  if (cfg.max_rounds < 1) throw Error(ErrorKind::ConfigError, "max_rounds must be >= 1");
  std::sort(m0.begin(), m0.end());
  m0.erase(std::unique(m0.begin(), m0.end()), m0.end());
  const auto legal = chess::legal_moves(s);
  for (const auto& m : m0) {
    if (!std::binary_search(legal.begin(), legal.end(), m)) {
      throw Error(ErrorKind::UnknownMove, m.str() + " is not legal in " + s.fen());
    }
  }

  PruneTrace trace{{}, verifier::target_action(vm, m0), std::nullopt, 0};
  std::vector<UciMove> mask = std::move(m0);

  for (int round = 1; round <= cfg.max_rounds; ++round) {
    RolloutGroup g;
    g.base_position = s;
    g.mask_snapshot = mask;
    g.round_index = round;
    g.prompt_text = prompt::build_prompt({prompt::TemplateKind::VamSelection, s.fen(), legal, mask});

    policy::PolicyRequest request{g.prompt_text, legal, mask, &vm};
    g.outputs = sample_group(policy, request, cfg.group_size);
    for (const auto& out : g.outputs) {
      g.parsed.push_back(prompt::parse_output(out, legal, mask));
      g.rewards.push_back(mdp::masked_reward(vm, mask, g.parsed.back(), penalty));
    }
    g.advantages = g.rewards.size() >= 2 ? grpo::advantages(g.rewards, cfg.std_floor)
                                         : std::vector<double>(g.rewards.size(), 0.0);

    const auto valid = distinct_valid(g);
    trace.groups.push_back(std::move(g));
    trace.rounds_used = round;

    if (std::binary_search(valid.begin(), valid.end(), trace.target.move)) {
      trace.target_found_round = round;
      break;
    }
    std::vector<UciMove> kept;
    std::set_difference(mask.begin(), mask.end(), valid.begin(), valid.end(), std::back_inserter(kept));
    mask = std::move(kept);
  }
  return trace;
}

nlohmann::json group_to_json(const RolloutGroup& g) {
  nlohmann::json j;
  j["fen"] = g.base_position.fen();
  std::vector<std::string> mask;
  for (const auto& m : g.mask_snapshot) mask.push_back(m.str());
  j["mask"] = mask;
  j["prompt"] = g.prompt_text;
  j["outputs"] = g.outputs;
  std::vector<std::string> verdicts;
  for (const auto& p : g.parsed) verdicts.push_back(p.verdict_string());
  j["verdicts"] = verdicts;
  j["rewards"] = g.rewards;
  j["advantages"] = g.advantages;
  j["round_index"] = g.round_index;
  return j;
}

std::size_t export_batch(const std::vector<PruneTrace>& traces, const std::filesystem::path& path) {
  std::vector<std::string> lines;
  for (const auto& t : traces) {
    // remote outputs may hold invalid UTF-8
    for (const auto& g : t.groups) lines.push_back(group_to_json(g).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace));
  }
  data::append_lines(path, lines, /*truncate=*/true);
  return lines.size();
}

}  // namespace vam::rollout
