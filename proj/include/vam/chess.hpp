#pragma once

/// Chess position model: FEN I/O, legal move generation, move application and
/// game-termination rules. Positions are immutable values; every mutation
/// returns a new Position.

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vam::chess {

inline constexpr std::string_view kStartFen =
    "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1";

enum class Color : std::uint8_t { White, Black };

constexpr Color opposite(Color c) noexcept {
  return c == Color::White ? Color::Black : Color::White;
}
std::string_view to_string(Color c) noexcept;

/// A move in strict lowercase UCI syntax: [a-h][1-8][a-h][1-8][qrbn]?
/// Castling is the king's two-square move (e1g1), never O-O.
class UciMove {
 public:
  /// Throws Error(MalformedMove) when `text` is not strict UCI.
  static UciMove parse(std::string_view text);
  static bool is_valid_syntax(std::string_view text) noexcept;

  const std::string& str() const noexcept { return text_; }
  int from() const noexcept;
  int to() const noexcept;
  /// Promotion letter, or '\0'.
  char promotion() const noexcept { return text_.size() == 5 ? text_[4] : '\0'; }

  friend bool operator==(const UciMove&, const UciMove&) = default;
  friend auto operator<=>(const UciMove& a, const UciMove& b) { return a.text_ <=> b.text_; }

 private:
  explicit UciMove(std::string text) : text_(std::move(text)) {}
  std::string text_;
};

/// Ordered (lexicographic by UCI string), duplicate-free list of moves.
using LegalMoveSet = std::vector<UciMove>;

enum CastlingRight : std::uint8_t {
  kWhiteKingside = 1,
  kWhiteQueenside = 2,
  kBlackKingside = 4,
  kBlackQueenside = 8,
};

// Signed piece codes: positive for White, negative for Black.
enum PieceType : std::int8_t { kEmpty = 0, kPawn = 1, kKnight, kBishop, kRook, kQueen, kKing };

struct Move {
  std::int8_t from = 0;
  std::int8_t to = 0;
  std::int8_t promotion = kEmpty;  ///< PieceType, kEmpty when not a promotion

  std::string uci() const;
  friend bool operator==(const Move&, const Move&) = default;
};

class Position {
 public:
  /// Standard initial position.
  Position();

  /// Throws Error(MalformedFen).
  static Position from_fen(std::string_view fen);

  /// Canonical six-field FEN. The en-passant field is emitted only when a
  /// legal en-passant capture exists; move counters are kept verbatim.
  std::string fen() const;

  Color side_to_move() const noexcept { return side_; }
  /// Half-moves since the start of the game, derived from the fullmove number.
  int ply_count() const noexcept;
  int halfmove_clock() const noexcept { return halfmove_; }
  int fullmove_number() const noexcept { return fullmove_; }
  std::uint8_t castling_rights() const noexcept { return castling_; }
  /// Signed piece code at square (0 = a1 ... 63 = h8).
  std::int8_t piece_at(int square) const noexcept { return board_[square]; }

  bool in_check() const noexcept;
  /// Legal moves in generation order (not sorted). Used by perft.
  std::vector<Move> generate_legal() const;
  /// Applies a move assumed legal. No validation.
  Position play_unchecked(const Move& m) const;

  /// FEN without the two counters; equal keys mean the same position for
  /// repetition purposes.
  std::string repetition_key() const;

  friend bool operator==(const Position& a, const Position& b) { return a.fen() == b.fen(); }

 private:
  struct Blank {};
  explicit Position(Blank) noexcept {}

  std::vector<Move> generate_pseudo() const;
  bool attacked(int square, Color by) const noexcept;
  int king_square(Color c) const noexcept;
  bool has_legal_ep_capture() const;

  std::array<std::int8_t, 64> board_{};
  Color side_ = Color::White;
  std::uint8_t castling_ = 0;
  std::int8_t ep_square_ = -1;
  int halfmove_ = 0;
  int fullmove_ = 1;
};

Position parse_fen(std::string_view text);
LegalMoveSet legal_moves(const Position& p);
bool is_legal(const Position& p, const UciMove& m);
/// Throws Error(IllegalMove) when m is not legal in p.
Position apply_move(const Position& p, const UciMove& m);
std::uint64_t perft(const Position& p, int depth);

enum class OutcomeKind { Ongoing, Checkmate, Stalemate, DrawByRule };
enum class DrawRule { None, InsufficientMaterial, SeventyFiveMove, FivefoldRepetition };

struct Outcome {
  OutcomeKind kind = OutcomeKind::Ongoing;
  std::optional<Color> winner;  ///< set only for Checkmate
  DrawRule rule = DrawRule::None;

  bool terminal() const noexcept { return kind != OutcomeKind::Ongoing; }
  friend bool operator==(const Outcome&, const Outcome&) = default;
};

/// Forced endings only: checkmate, stalemate, insufficient material and the
/// 75-move rule. Claimable draws (50-move, threefold) never end the game.
Outcome game_outcome(const Position& p);

bool insufficient_material(const Position& p);

/// A game from some root position, tracking history for fivefold repetition.
class Game {
 public:
  Game() : Game(Position{}) {}
  explicit Game(Position root);

  const Position& position() const noexcept { return positions_.back(); }
  const std::vector<UciMove>& moves() const noexcept { return moves_; }
  int plies() const noexcept { return static_cast<int>(moves_.size()); }

  /// Throws Error(IllegalMove).
  void play(const UciMove& m);
  /// game_outcome plus fivefold repetition.
  Outcome outcome() const;

 private:
  std::vector<Position> positions_;
  std::vector<std::string> keys_;
  std::vector<UciMove> moves_;
};

std::string square_name(int square);

}  // namespace vam::chess
