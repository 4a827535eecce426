#include <doctest.h>

#include <json.hpp>

#include "support.hpp"
#include "vam/error.hpp"
#include "vam/prompt.hpp"

using namespace vam;
using namespace vam::prompt;
using chess::UciMove;

namespace {

const std::map<std::string, std::string> kFens = {
    {"start", std::string(chess::kStartFen)},
    {"castle", "r3k2r/8/8/8/8/8/8/R3K2R w KQkq - 0 1"},
    {"promo", "8/P6k/8/8/8/8/8/K7 w - - 0 1"},
};

std::vector<UciMove> moves(std::initializer_list<const char*> xs) {
  std::vector<UciMove> out;
  for (const char* x : xs) out.push_back(UciMove::parse(x));
  return out;
}

}  // namespace

TEST_CASE("parser golden cases") {
  const auto cases = nlohmann::json::parse(test::slurp(test::data_dir() / "golden" / "parser_cases.json"));
  REQUIRE(cases.size() >= 40);
  for (const auto& c : cases) {
    const auto p = chess::parse_fen(kFens.at(c["fen"].get<std::string>()));
    std::optional<std::vector<UciMove>> mask;
    if (c.contains("mask")) {
      mask.emplace();
      for (const auto& m : c["mask"]) mask->push_back(UciMove::parse(m.get<std::string>()));
    }
    const auto got = parse_output(c["raw"].get<std::string>(), chess::legal_moves(p), mask).verdict_string();
    INFO(c["name"].get<std::string>());
    CHECK(got == c["expected"].get<std::string>());
  }
}

TEST_CASE("parsed output details") {
  const auto legal = chess::legal_moves(chess::Position{});
  const auto a = parse_output("<think>K\xc3\xb6nig</think><uci_move>e2e4</uci_move>", legal, std::nullopt);
  CHECK(a.valid());
  CHECK(a.had_think_block);
  CHECK(a.raw_length_chars == 45);  // 46 bytes
  const auto b = parse_output("<uci_move>e2e5</uci_move>", legal, std::nullopt);
  CHECK(b.verdict == VerdictKind::Illegal);
  CHECK(b.move == UciMove::parse("e2e5"));
  CHECK_FALSE(b.had_think_block);
  const auto c = parse_output("nothing", legal, std::nullopt);
  CHECK(c.reason == MalformedReason::MissingTag);
  CHECK_FALSE(c.move);
}

TEST_CASE("template fixtures are embedded byte for byte") {
  CHECK(template_text(TemplateKind::VamSelection) == test::slurp(test::data_dir() / ".." / "templates" / "vam_selection.txt"));
  CHECK(template_text(TemplateKind::Baseline) == test::slurp(test::data_dir() / ".." / "templates" / "baseline.txt"));
}

TEST_CASE("rendered prompts match golden renderings") {
  struct Case {
    const char* name;
    std::vector<UciMove> considered;
  };
  for (const auto& c : {Case{"start", moves({"d2d4", "e2e4", "g1f3"})}, Case{"castle", moves({"e1c1", "e1g1"})}}) {
    const auto p = chess::parse_fen(kFens.at(c.name));
    const auto legal = chess::legal_moves(p);
    const auto sel = build_prompt({TemplateKind::VamSelection, p.fen(), legal, c.considered});
    CHECK(sel == test::slurp(test::data_dir() / "golden" / (std::string("vam_selection_") + c.name + ".txt")));
    const auto base = build_prompt({TemplateKind::Baseline, p.fen(), legal, std::nullopt});
    CHECK(base == test::slurp(test::data_dir() / "golden" / (std::string("baseline_") + c.name + ".txt")));
  }
}

TEST_CASE("template rendering") {
  CHECK(render_template("{{ A }}-{{B}}", {{"A", std::string("x")}, {"B", std::string("y")}}) == "x-y");
  CHECK(render_template("{{ L | join(', ') }}", {{"L", std::vector<std::string>{"a", "b"}}}) == "a, b");
  CHECK(render_template("{{ L | join(\";\") }}", {{"L", std::vector<std::string>{"a", "b"}}}) == "a;b");
  CHECK_THROWS_AS(render_template("{{ missing }}", {}), Error);
  CHECK_THROWS_AS(render_template("{{ A | join(',') }}", {{"A", std::string("x")}}), Error);
  CHECK_THROWS_AS(render_template("{{ L }}", {{"L", std::vector<std::string>{"a"}}}), Error);
  CHECK_THROWS_AS(render_template("{{ A ", {{"A", std::string("x")}}), Error);
}

TEST_CASE("prompt construction errors") {
  const auto legal = chess::legal_moves(chess::Position{});
  const std::string fen(chess::kStartFen);
  auto kind_of = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::IoFailure;
  };
  CHECK(kind_of([&] { build_prompt({TemplateKind::VamSelection, fen, legal, std::nullopt}); }) ==
        ErrorKind::MissingAllowedMoves);
  CHECK(kind_of([&] { build_prompt({TemplateKind::VamSelection, fen, legal, std::vector<UciMove>{}}); }) ==
        ErrorKind::InvalidArgument);
  CHECK(kind_of([&] { build_prompt({TemplateKind::VamSelection, fen, legal, moves({"e2e5"})}); }) ==
        ErrorKind::InvalidArgument);
  CHECK(kind_of([&] { build_prompt({TemplateKind::Baseline, fen, {}, std::nullopt}); }) == ErrorKind::InvalidArgument);
  CHECK(parse_template_kind("baseline") == TemplateKind::Baseline);
  CHECK(to_string(TemplateKind::VamSelection) == "vam_selection");
  CHECK_THROWS_AS(parse_template_kind("chat"), Error);
}

TEST_CASE("compliance statistics") {
  const auto legal = chess::legal_moves(chess::Position{});
  const auto mask = moves({"e2e4"});
  std::vector<ParsedOutput> outs = {
      parse_output("<uci_move>e2e4</uci_move>", legal, mask),
      parse_output("<uci_move>d2d4</uci_move>", legal, mask),
      parse_output("<uci_move>e2e5</uci_move>", legal, mask),
      parse_output("junk", legal, mask),
  };
  const auto s = compliance_stats(outs);
  CHECK(s.format_rate == 0.75);
  CHECK(s.legality_rate == 0.5);
  CHECK(s.mask_rate == 0.25);
  CHECK_THROWS_AS(compliance_stats({}), Error);
}
