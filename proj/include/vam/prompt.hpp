#pragma once

/// Prompt rendering for the mask-conditioned selection and baseline
/// templates, and the strict `<uci_move>` output parser.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "vam/chess.hpp"

namespace vam::prompt {

enum class TemplateKind { VamSelection, Baseline };

std::string_view to_string(TemplateKind kind) noexcept;
/// Accepts "vam_selection" and "baseline". Throws Error(ConfigError).
TemplateKind parse_template_kind(std::string_view text);

/// Raw fixture text, byte for byte.
std::string_view template_text(TemplateKind kind) noexcept;

using TemplateValue = std::variant<std::string, std::vector<std::string>>;

/// Substitutes `{{ name }}` and `{{ name | join('sep') }}` placeholders.
/// Throws Error(TemplateError) on unknown names or type mismatches.
std::string render_template(std::string_view tpl, const std::map<std::string, TemplateValue>& vars);

struct PromptSpec {
  TemplateKind kind = TemplateKind::VamSelection;
  std::string fen;
  std::vector<chess::UciMove> legal_moves;
  std::optional<std::vector<chess::UciMove>> allowed_moves;
};

/// Throws Error(MissingAllowedMoves) for a selection prompt without
/// allowed_moves, Error(InvalidArgument) for empty lists or allowed moves
/// outside the legal list.
std::string build_prompt(const PromptSpec& spec);

enum class VerdictKind { Valid, Malformed, Illegal, OutOfMask };

enum class MalformedReason { None, MissingTag, MultipleTags, UnclosedTag, BadSyntax };

struct ParsedOutput {
  VerdictKind verdict = VerdictKind::Malformed;
  std::optional<chess::UciMove> move;  ///< set unless Malformed
  MalformedReason reason = MalformedReason::None;
  int raw_length_chars = 0;  ///< UTF-8 code points
  bool had_think_block = false;

  bool valid() const noexcept { return verdict == VerdictKind::Valid; }
  /// "valid:e2e4", "illegal:e2e5", "out_of_mask:d2d4", "malformed:missing_tag", ...
  std::string verdict_string() const;
};

/// Valid only when the text holds exactly one `<uci_move>...</uci_move>` pair
/// whose whitespace-trimmed payload is strict lowercase UCI, legal, and (when
/// a mask is given) in the mask. Failures are reported in that precedence.
ParsedOutput parse_output(std::string_view raw, const chess::LegalMoveSet& legal,
                          const std::optional<std::vector<chess::UciMove>>& mask);

struct ComplianceStats {
  double format_rate = 0.0;    ///< not Malformed
  double legality_rate = 0.0;  ///< Valid or OutOfMask
  double mask_rate = 0.0;      ///< Valid
};

/// Throws Error(EmptyList).
ComplianceStats compliance_stats(std::span<const ParsedOutput> outputs);

}  // namespace vam::prompt
