#include "vam/config.hpp"

#include <fstream>
#include <sstream>

#include "vam/error.hpp"

namespace vam::config {

using nlohmann::json;

RunConfig::RunConfig() {
  opponent.executable_path = "stockfish";
  analyzer.executable_path = "stockfish";
  opponent.skill_level = 0;
  opponent.search_depth = 1;
  analyzer.search_depth = 20;
  analyzer.movetime_ms = 1000;
}

policy::PolicyConfig RunConfig::resolved_policy() const {
  auto p = policy;
  p.seed = seed;
  p.generation.temperature = grpo.temperature;
  p.generation.top_p = grpo.top_p;
  p.generation.max_tokens = grpo.max_response_tokens;
  return p;
}

eval::GameConfig RunConfig::game_config() const {
  eval::GameConfig g;
  g.max_plies = eval.max_plies;
  g.attempts = eval.attempts;
  g.cap = eval.cap;
  g.analyzer_depth = analyzer.search_depth;
  g.analyzer_movetime_ms = analyzer.movetime_ms;
  g.prompt_kind = eval.game_prompt;
  g.value_depth = verifier.depth;
  g.reward_kind = verifier.reward_kind;
  return g;
}

data::PlayConfig RunConfig::play_config() const {
  data::PlayConfig p;
  p.pool_size = collect.pool_size;
  p.max_plies = collect.max_plies;
  p.attempts = collect.attempts;
  p.verifier_depth = verifier.depth;
  p.reward_kind = verifier.reward_kind;
  p.seed = seed;
  return p;
}

void RunConfig::validate() const {
  auto check_engine = [](const engine::EngineConfig& e, const char* name) {
    try {
      e.validate();
    } catch (const Error& err) {
      throw Error(ErrorKind::ConfigError, std::string(name) + ": " + err.what());
    }
  };
  check_engine(opponent, "opponent");
  check_engine(analyzer, "analyzer");
  if (verifier.depth < 1) throw Error(ErrorKind::ConfigError, "verifier.depth must be >= 1");
  grpo.validate();
  mask_mdp.validate();
  resolved_policy().validate();
  play_config().validate();
  game_config().validate();
  if (collect.budget < 1) throw Error(ErrorKind::ConfigError, "collect.budget must be >= 1");
  if (prune.max_states < 0) throw Error(ErrorKind::ConfigError, "prune.max_states must be >= 0");
  if (eval.depths.empty()) throw Error(ErrorKind::ConfigError, "eval.depths must not be empty");
  for (int d : eval.depths) {
    if (d < 1) throw Error(ErrorKind::ConfigError, "eval.depths entries must be >= 1");
  }
  if (eval.games_per_depth < 2 || eval.games_per_depth % 2) {
    throw Error(ErrorKind::ConfigError, "eval.games_per_depth must be a positive even number");
  }
}

namespace {

json engine_json(const engine::EngineConfig& e) {
  return {{"executable_path", e.executable_path},
          {"skill_level", e.skill_level},
          {"search_depth", e.search_depth},
          {"movetime_ms", e.movetime_ms ? json(*e.movetime_ms) : json(nullptr)},
          {"show_wdl", e.show_wdl},
          {"threads", e.threads},
          {"hash_mb", e.hash_mb},
          {"timeout_ms", e.timeout.count()},
          {"retries", e.retries}};
}

engine::EngineConfig engine_from(const json& j) {
  engine::EngineConfig e;
  e.executable_path = j.at("executable_path").get<std::string>();
  e.skill_level = j.at("skill_level").get<int>();
  e.search_depth = j.at("search_depth").get<int>();
  if (!j.at("movetime_ms").is_null()) e.movetime_ms = j.at("movetime_ms").get<int>();
  e.show_wdl = j.at("show_wdl").get<bool>();
  e.threads = j.at("threads").get<int>();
  e.hash_mb = j.at("hash_mb").get<int>();
  e.timeout = std::chrono::milliseconds(j.at("timeout_ms").get<long long>());
  e.retries = j.at("retries").get<int>();
  return e;
}

// Overlays `src` onto `dst`, refusing keys the defaults do not have. Null
// defaults (optional fields) accept any value.
void merge(json& dst, const json& src, const std::string& where) {
  if (!src.is_object()) throw Error(ErrorKind::ConfigError, where + " must be an object");
  for (const auto& [k, v] : src.items()) {
    const std::string key = where.empty() ? k : where + "." + k;
    if (!dst.contains(k)) throw Error(ErrorKind::ConfigError, "unknown config key '" + key + "'");
    if (dst[k].is_object()) {
      merge(dst[k], v, key);
    } else {
      dst[k] = v;
    }
  }
}

}  // namespace

json to_json(const RunConfig& c) {
  return {
      {"schema_version", kConfigSchemaVersion},
      {"seed", c.seed},
      {"engine", {{"opponent", engine_json(c.opponent)}, {"analyzer", engine_json(c.analyzer)}}},
      {"verifier", {{"depth", c.verifier.depth}, {"reward_kind", verifier::to_string(c.verifier.reward_kind)}}},
      {"grpo",
       {{"group_size", c.grpo.group_size},
        {"max_rounds", c.grpo.max_rounds},
        {"clip_eps", c.grpo.clip_eps},
        {"kl_coef", c.grpo.kl_coef},
        {"std_floor", c.grpo.std_floor},
        {"temperature", c.grpo.temperature},
        {"top_p", c.grpo.top_p},
        {"max_response_tokens", c.grpo.max_response_tokens}}},
      {"mask_mdp", {{"penalty", c.mask_mdp.penalty}, {"gamma", c.mask_mdp.gamma}}},
      {"policy",
       {{"kind", c.policy.kind},
        {"temperature", c.policy.temperature},
        {"malformed_rate", c.policy.malformed_rate},
        {"url", c.policy.url},
        {"timeout_ms", c.policy.timeout_ms},
        {"retries", c.policy.retries}}},
      {"collect",
       {{"pool_size", c.collect.pool_size},
        {"budget", c.collect.budget},
        {"max_plies", c.collect.max_plies},
        {"attempts", c.collect.attempts}}},
      {"prune", {{"max_states", c.prune.max_states}}},
      {"eval",
       {{"depths", c.eval.depths},
        {"games_per_depth", c.eval.games_per_depth},
        {"max_plies", c.eval.max_plies},
        {"attempts", c.eval.attempts},
        {"cap", c.eval.cap},
        {"game_prompt", prompt::to_string(c.eval.game_prompt)},
        {"puzzle_mode", prompt::to_string(c.eval.puzzle_mode)}}},
      {"paths",
       {{"dataset", c.paths.dataset},
        {"buffer", c.paths.buffer},
        {"batch", c.paths.batch},
        {"reports", c.paths.reports}}},
  };
}

RunConfig from_json(const json& input) {
  json doc = to_json(RunConfig{});
  merge(doc, input, "");
  if (doc["schema_version"] != kConfigSchemaVersion) {
    throw Error(ErrorKind::ConfigError, "unsupported config schema_version " + doc["schema_version"].dump());
  }
  RunConfig c;
  try {
    c.seed = doc["seed"].get<std::uint64_t>();
    c.opponent = engine_from(doc["engine"]["opponent"]);
    c.analyzer = engine_from(doc["engine"]["analyzer"]);
    c.verifier.depth = doc["verifier"]["depth"].get<int>();
    c.verifier.reward_kind = verifier::parse_reward_kind(doc["verifier"]["reward_kind"].get<std::string>());
    const auto& g = doc["grpo"];
    c.grpo.group_size = g["group_size"].get<int>();
    c.grpo.max_rounds = g["max_rounds"].get<int>();
    c.grpo.clip_eps = g["clip_eps"].get<double>();
    c.grpo.kl_coef = g["kl_coef"].get<double>();
    c.grpo.std_floor = g["std_floor"].get<double>();
    c.grpo.temperature = g["temperature"].get<double>();
    c.grpo.top_p = g["top_p"].get<double>();
    c.grpo.max_response_tokens = g["max_response_tokens"].get<int>();
    c.mask_mdp.penalty = doc["mask_mdp"]["penalty"].get<double>();
    c.mask_mdp.gamma = doc["mask_mdp"]["gamma"].get<double>();
    const auto& p = doc["policy"];
    c.policy.kind = p["kind"].get<std::string>();
    c.policy.temperature = p["temperature"].get<double>();
    c.policy.malformed_rate = p["malformed_rate"].get<double>();
    c.policy.url = p["url"].get<std::string>();
    c.policy.timeout_ms = p["timeout_ms"].get<int>();
    c.policy.retries = p["retries"].get<int>();
    const auto& col = doc["collect"];
    c.collect.pool_size = col["pool_size"].get<int>();
    c.collect.budget = col["budget"].get<int>();
    c.collect.max_plies = col["max_plies"].get<int>();
    c.collect.attempts = col["attempts"].get<int>();
    c.prune.max_states = doc["prune"]["max_states"].get<int>();
    const auto& e = doc["eval"];
    c.eval.depths = e["depths"].get<std::vector<int>>();
    c.eval.games_per_depth = e["games_per_depth"].get<int>();
    c.eval.max_plies = e["max_plies"].get<int>();
    c.eval.attempts = e["attempts"].get<int>();
    c.eval.cap = e["cap"].get<int>();
    c.eval.game_prompt = prompt::parse_template_kind(e["game_prompt"].get<std::string>());
    c.eval.puzzle_mode = prompt::parse_template_kind(e["puzzle_mode"].get<std::string>());
    const auto& paths = doc["paths"];
    c.paths.dataset = paths["dataset"].get<std::string>();
    c.paths.buffer = paths["buffer"].get<std::string>();
    c.paths.batch = paths["batch"].get<std::string>();
    c.paths.reports = paths["reports"].get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigError, std::string("bad config value: ") + e.what());
  }
  c.validate();
  return c;
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw Error(ErrorKind::ConfigError, "override '" + assignment + "' is not key.path=value");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json* node = &doc;
  std::size_t start = 0;
  for (;;) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw Error(ErrorKind::ConfigError, "bad override key '" + path + "'");
    if (!node->is_object()) *node = json::object();
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

RunConfig load(const std::optional<std::filesystem::path>& path, const std::vector<std::string>& overrides) {
  json doc = json::object();
  if (path) {
    std::ifstream in(*path);
    if (!in) throw Error(ErrorKind::IoFailure, "cannot open config " + path->string());
    std::stringstream buf;
    buf << in.rdbuf();
    doc = json::parse(buf.str(), nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
      throw Error(ErrorKind::ConfigError, path->string() + " is not a JSON object");
    }
  }
  for (const auto& o : overrides) apply_override(doc, o);
  return from_json(doc);
}

}  // namespace vam::config
