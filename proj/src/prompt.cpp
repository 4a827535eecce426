#include "vam/prompt.hpp"

#include <algorithm>

#include "vam/error.hpp"

namespace vam::prompt {

namespace detail {
extern const std::string_view kSelectionTemplate;
extern const std::string_view kBaselineTemplate;
}  // namespace detail

using chess::UciMove;

namespace {

constexpr std::string_view kOpenTag = "<uci_move>";
constexpr std::string_view kCloseTag = "</uci_move>";

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::size_t count_of(std::string_view haystack, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = haystack.find(needle); pos != std::string_view::npos; pos = haystack.find(needle, pos + 1)) ++n;
  return n;
}

int utf8_length(std::string_view s) {
  return static_cast<int>(std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

std::vector<std::string> to_strings(const std::vector<UciMove>& moves) {
  std::vector<std::string> out;
  out.reserve(moves.size());
  for (const auto& m : moves) out.push_back(m.str());
  return out;
}

std::string_view reason_string(MalformedReason r) {
  switch (r) {
    case MalformedReason::MissingTag: return "missing_tag";
    case MalformedReason::MultipleTags: return "multiple_tags";
    case MalformedReason::UnclosedTag: return "unclosed_tag";
    case MalformedReason::BadSyntax: return "bad_syntax";
    case MalformedReason::None: break;
  }
  return "none";
}

}  // namespace

std::string_view to_string(TemplateKind kind) noexcept {
  return kind == TemplateKind::VamSelection ? "vam_selection" : "baseline";
}

TemplateKind parse_template_kind(std::string_view text) {
  if (text == "vam_selection") return TemplateKind::VamSelection;
  if (text == "baseline") return TemplateKind::Baseline;
  throw Error(ErrorKind::ConfigError, "unknown prompt template '" + std::string(text) + "'");
}

std::string_view template_text(TemplateKind kind) noexcept {
  return kind == TemplateKind::VamSelection ? detail::kSelectionTemplate : detail::kBaselineTemplate;
}

std::string render_template(std::string_view tpl, const std::map<std::string, TemplateValue>& vars) {
  std::string out;
  out.reserve(tpl.size() + 256);
  std::size_t pos = 0;
  for (;;) {
    const auto open = tpl.find("{{", pos);
    if (open == std::string_view::npos) {
      out.append(tpl.substr(pos));
      return out;
    }
    const auto close = tpl.find("}}", open + 2);
    if (close == std::string_view::npos) throw Error(ErrorKind::TemplateError, "unterminated placeholder");
    out.append(tpl.substr(pos, open - pos));

    const std::string_view inner = tpl.substr(open + 2, close - open - 2);
    const auto bar = inner.find('|');
    const std::string name(trim(inner.substr(0, bar)));
    const auto it = vars.find(name);
    if (it == vars.end()) throw Error(ErrorKind::TemplateError, "unknown placeholder '" + name + "'");

    if (bar == std::string_view::npos) {
      const auto* text = std::get_if<std::string>(&it->second);
      if (!text) throw Error(ErrorKind::TemplateError, "list '" + name + "' used without join");
      out.append(*text);
    } else {
      const std::string_view filter = trim(inner.substr(bar + 1));
      // join('sep') or join("sep")
      if (filter.size() < 8 || filter.substr(0, 5) != "join(" || filter.back() != ')' ||
          (filter[5] != '\'' && filter[5] != '"') || filter[filter.size() - 2] != filter[5]) {
        throw Error(ErrorKind::TemplateError, "unsupported filter '" + std::string(filter) + "'");
      }
      const std::string_view sep = filter.substr(6, filter.size() - 8);
      const auto* items = std::get_if<std::vector<std::string>>(&it->second);
      if (!items) throw Error(ErrorKind::TemplateError, "join applied to scalar '" + name + "'");
      for (std::size_t i = 0; i < items->size(); ++i) {
        if (i) out.append(sep);
        out.append((*items)[i]);
      }
    }
    pos = close + 2;
  }
}

std::string build_prompt(const PromptSpec& spec) {
  if (spec.legal_moves.empty()) throw Error(ErrorKind::InvalidArgument, "legal move list is empty");
  std::map<std::string, TemplateValue> vars{
      {"FEN", spec.fen},
      {"legal_moves_uci_list", to_strings(spec.legal_moves)},
  };
  if (spec.kind == TemplateKind::VamSelection) {
    if (!spec.allowed_moves) throw Error(ErrorKind::MissingAllowedMoves, "selection prompt needs allowed_moves");
    if (spec.allowed_moves->empty()) throw Error(ErrorKind::InvalidArgument, "allowed_moves is empty");
    for (const auto& m : *spec.allowed_moves) {
      if (std::find(spec.legal_moves.begin(), spec.legal_moves.end(), m) == spec.legal_moves.end()) {
        throw Error(ErrorKind::InvalidArgument, "allowed move " + m.str() + " is not in the legal list");
      }
    }
    vars.emplace("considered_moves_uci_list", to_strings(*spec.allowed_moves));
  }
  return render_template(template_text(spec.kind), vars);
}

std::string ParsedOutput::verdict_string() const {
  switch (verdict) {
    case VerdictKind::Valid: return "valid:" + move->str();
    case VerdictKind::Illegal: return "illegal:" + move->str();
    case VerdictKind::OutOfMask: return "out_of_mask:" + move->str();
    case VerdictKind::Malformed: break;
  }
  return "malformed:" + std::string(reason_string(reason));
}

ParsedOutput parse_output(std::string_view raw, const chess::LegalMoveSet& legal,
                          const std::optional<std::vector<UciMove>>& mask) {
  ParsedOutput out;
  out.raw_length_chars = utf8_length(raw);
  const auto think_open = raw.find("<think>");
  out.had_think_block = think_open != std::string_view::npos &&
                        raw.find("</think>", think_open + 7) != std::string_view::npos;

  auto malformed = [&](MalformedReason r) {
    out.verdict = VerdictKind::Malformed;
    out.reason = r;
    return out;
  };

  const std::size_t opens = count_of(raw, kOpenTag);
  const std::size_t closes = count_of(raw, kCloseTag);
  if (opens == 0) return malformed(MalformedReason::MissingTag);
  if (opens > 1 || closes > 1) return malformed(MalformedReason::MultipleTags);
  const auto open = raw.find(kOpenTag);
  const auto close = raw.find(kCloseTag);
  if (close == std::string_view::npos || close < open) return malformed(MalformedReason::UnclosedTag);

  const std::string_view payload = trim(raw.substr(open + kOpenTag.size(), close - open - kOpenTag.size()));
  if (!UciMove::is_valid_syntax(payload)) return malformed(MalformedReason::BadSyntax);

  out.move = UciMove::parse(payload);
  if (std::find(legal.begin(), legal.end(), *out.move) == legal.end()) {
    out.verdict = VerdictKind::Illegal;
  } else if (mask && std::find(mask->begin(), mask->end(), *out.move) == mask->end()) {
    out.verdict = VerdictKind::OutOfMask;
  } else {
    out.verdict = VerdictKind::Valid;
  }
  return out;
}

ComplianceStats compliance_stats(std::span<const ParsedOutput> outputs) {
  if (outputs.empty()) throw Error(ErrorKind::EmptyList, "compliance stats over zero outputs");
  double formatted = 0;
  double legal = 0;
  double in_mask = 0;
  for (const auto& o : outputs) {
    if (o.verdict != VerdictKind::Malformed) ++formatted;
    if (o.verdict == VerdictKind::Valid || o.verdict == VerdictKind::OutOfMask) ++legal;
    if (o.verdict == VerdictKind::Valid) ++in_mask;
  }
  const double n = static_cast<double>(outputs.size());
  return {formatted / n, legal / n, in_mask / n};
}

}  // namespace vam::prompt
