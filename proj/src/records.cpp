#include "vam/records.hpp"

#include <fstream>
#include <sstream>

#include "vam/error.hpp"

namespace vam::data {

using nlohmann::json;

namespace {

std::string_view source_name(RecordSource s) { return s == RecordSource::EnginePlay ? "engine_play" : "fixed_dataset"; }

[[noreturn]] void schema(const std::string& what) { throw Error(ErrorKind::SchemaError, what); }

std::vector<std::string> string_list(const json& j, const char* field) {
  if (!j.is_array()) schema(std::string(field) + " must be an array of strings");
  std::vector<std::string> out;
  for (const auto& item : j) {
    if (!item.is_string()) schema(std::string(field) + " must be an array of strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

}  // namespace

json to_json(const TrainingRecord& r) {
  json j;
  j["fen"] = r.fen;
  j["legal_moves_uci"] = r.legal_moves_uci;
  if (r.value_map) j["value_map"] = *r.value_map;
  if (r.solution_uci) j["solution_uci"] = *r.solution_uci;
  if (r.allowed_moves) j["considered_moves_uci"] = *r.allowed_moves;
  j["source"] = source_name(r.source);
  json meta = json::object();
  if (r.metadata.verifier_depth) meta["verifier_depth"] = *r.metadata.verifier_depth;
  meta["reward_kind"] = verifier::to_string(r.metadata.reward_kind);
  if (r.metadata.collection_seed) meta["collection_seed"] = *r.metadata.collection_seed;
  if (!r.metadata.wdl_source.empty()) meta["wdl_source"] = r.metadata.wdl_source;
  j["metadata"] = meta;
  return j;
}

TrainingRecord record_from_json(const json& j) {
  if (!j.is_object()) schema("record must be a JSON object");
  TrainingRecord r;
  if (!j.contains("fen") || !j["fen"].is_string()) schema("missing string field 'fen'");
  r.fen = j["fen"].get<std::string>();
  if (!j.contains("legal_moves_uci")) schema("missing field 'legal_moves_uci'");
  r.legal_moves_uci = string_list(j["legal_moves_uci"], "legal_moves_uci");

  if (j.contains("value_map") && !j["value_map"].is_null()) {
    const auto& vm = j["value_map"];
    if (!vm.is_object()) schema("value_map must be an object keyed by UCI strings");
    std::map<std::string, double> values;
    for (const auto& [k, v] : vm.items()) {
      if (!v.is_number()) schema("value_map['" + k + "'] is not a number");
      values.emplace(k, v.get<double>());
    }
    r.value_map = std::move(values);
  }
  if (j.contains("solution_uci") && !j["solution_uci"].is_null()) {
    if (!j["solution_uci"].is_string()) schema("solution_uci must be a string");
    r.solution_uci = j["solution_uci"].get<std::string>();
  }
  const char* allowed_key = j.contains("considered_moves_uci") ? "considered_moves_uci"
                            : j.contains("allowed_moves")     ? "allowed_moves"
                                                              : nullptr;
  if (allowed_key && !j[allowed_key].is_null()) r.allowed_moves = string_list(j[allowed_key], allowed_key);

  if (j.contains("source")) {
    const auto s = j["source"].is_string() ? j["source"].get<std::string>() : "";
    if (s == "engine_play") {
      r.source = RecordSource::EnginePlay;
    } else if (s == "fixed_dataset") {
      r.source = RecordSource::FixedDataset;
    } else {
      schema("unknown source '" + s + "'");
    }
  }
  if (j.contains("metadata")) {
    const auto& m = j["metadata"];
    if (!m.is_object()) schema("metadata must be an object");
    try {
      if (m.contains("verifier_depth")) r.metadata.verifier_depth = m["verifier_depth"].get<int>();
      if (m.contains("reward_kind")) r.metadata.reward_kind = verifier::parse_reward_kind(m["reward_kind"].get<std::string>());
      if (m.contains("collection_seed")) r.metadata.collection_seed = m["collection_seed"].get<std::uint64_t>();
      if (m.contains("wdl_source")) r.metadata.wdl_source = m["wdl_source"].get<std::string>();
    } catch (const json::exception& e) {
      schema(std::string("bad metadata: ") + e.what());
    } catch (const Error& e) {
      schema(e.what());
    }
  }
  return r;
}

std::vector<chess::UciMove> typed_moves(const std::vector<std::string>& moves) {
  std::vector<chess::UciMove> out;
  out.reserve(moves.size());
  for (const auto& m : moves) {
    if (!chess::UciMove::is_valid_syntax(m)) schema("'" + m + "' is not strict UCI");
    out.push_back(chess::UciMove::parse(m));
  }
  return out;
}

verifier::ValueMap typed_value_map(const TrainingRecord& r) {
  if (!r.value_map) schema("record for " + r.fen + " has no value_map");
  verifier::ValueMap vm;
  for (const auto& [k, v] : *r.value_map) {
    if (!chess::UciMove::is_valid_syntax(k)) schema("value_map key '" + k + "' is not strict UCI");
    vm.scores.emplace(chess::UciMove::parse(k), v);
  }
  vm.reward_kind = r.metadata.reward_kind;
  vm.source_depth = r.metadata.verifier_depth.value_or(0);
  return vm;
}

std::vector<RawLine> read_lines(const std::filesystem::path& path, bool require_final_newline) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string content = buf.str();

  std::vector<RawLine> lines;
  std::size_t offset = 0;
  std::size_t number = 0;
  while (offset < content.size()) {
    ++number;
    const auto nl = content.find('\n', offset);
    if (nl == std::string::npos && require_final_newline) {
      throw Error(ErrorKind::SchemaError, path.string() + ": truncated record at byte offset " +
                                              std::to_string(offset) + " (line " + std::to_string(number) + ")");
    }
    const std::size_t end = nl == std::string::npos ? content.size() : nl;
    std::string text = content.substr(offset, end - offset);
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") != std::string::npos) lines.push_back({number, offset, std::move(text)});
    offset = end + 1;
  }
  return lines;
}

void append_lines(const std::filesystem::path& path, const std::vector<std::string>& lines, bool truncate) {
  std::ofstream out(path, std::ios::binary | (truncate ? std::ios::trunc : std::ios::app));
  if (!out) throw Error(ErrorKind::IoFailure, "cannot open " + path.string() + " for writing");
  for (const auto& line : lines) out << line << '\n';
  out.flush();
  if (!out) throw Error(ErrorKind::IoFailure, "write failed for " + path.string());
}

}  // namespace vam::data
