#pragma once

/// Training/puzzle records and their line-delimited JSON encoding.
///
/// One record per line:
///   {"fen": ..., "legal_moves_uci": [...], "value_map": {"e2e4": 0.53, ...},
///    "solution_uci": "e2e4", "considered_moves_uci": [...],
///    "source": "fixed_dataset" | "engine_play",
///    "metadata": {"verifier_depth": 10, "reward_kind": "expected_score", "collection_seed": 7}}
/// `allowed_moves` is accepted as an alias of `considered_moves_uci` on input.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vam/verifier.hpp"

namespace vam::data {

enum class RecordSource { FixedDataset, EnginePlay };

struct RecordMetadata {
  std::optional<int> verifier_depth;
  verifier::RewardKind reward_kind = verifier::RewardKind::ExpectedScore;
  std::optional<std::uint64_t> collection_seed;
  std::string wdl_source;  ///< "engine" or "logistic"; empty when unknown

  friend bool operator==(const RecordMetadata&, const RecordMetadata&) = default;
};

/// Record fields are kept as raw strings so that files can be loaded and
/// then checked with validate_record.
struct TrainingRecord {
  std::string fen;
  std::vector<std::string> legal_moves_uci;
  std::optional<std::map<std::string, double>> value_map;
  std::optional<std::string> solution_uci;
  std::optional<std::vector<std::string>> allowed_moves;
  RecordSource source = RecordSource::FixedDataset;
  RecordMetadata metadata;

  friend bool operator==(const TrainingRecord&, const TrainingRecord&) = default;
};

nlohmann::json to_json(const TrainingRecord& r);
/// Throws Error(SchemaError) on missing or mistyped fields.
TrainingRecord record_from_json(const nlohmann::json& j);

/// Typed value map from a validated record. Throws Error(SchemaError) when the
/// record has none.
verifier::ValueMap typed_value_map(const TrainingRecord& r);
std::vector<chess::UciMove> typed_moves(const std::vector<std::string>& moves);

/// Reads a line-delimited file. Each entry is (1-based line number, byte
/// offset of the line start, line text). Blank lines are skipped. When
/// `require_final_newline` is set, an unterminated last line is reported as a
/// truncated record. Throws Error(IoFailure) or Error(SchemaError).
struct RawLine {
  std::size_t line_number;
  std::size_t byte_offset;
  std::string text;
};
std::vector<RawLine> read_lines(const std::filesystem::path& path, bool require_final_newline);

/// Appends lines, each terminated by '\n'. Throws Error(IoFailure).
void append_lines(const std::filesystem::path& path, const std::vector<std::string>& lines, bool truncate);

}  // namespace vam::data
