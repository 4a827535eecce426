#include "vam/chess.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <sstream>

#include "vam/error.hpp"

namespace vam::chess {

namespace {

constexpr int file_of(int sq) { return sq & 7; }
constexpr int rank_of(int sq) { return sq >> 3; }
constexpr int make_square(int file, int rank) { return rank * 8 + file; }
constexpr bool on_board(int file, int rank) { return file >= 0 && file < 8 && rank >= 0 && rank < 8; }

constexpr int kKnightSteps[8][2] = {{1, 2}, {2, 1}, {2, -1}, {1, -2}, {-1, -2}, {-2, -1}, {-2, 1}, {-1, 2}};
constexpr int kKingSteps[8][2] = {{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}};
constexpr int kBishopDirs[4][2] = {{1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
constexpr int kRookDirs[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};

constexpr int kA1 = 0, kE1 = 4, kH1 = 7, kA8 = 56, kE8 = 60, kH8 = 63;

int sign_of(Color c) { return c == Color::White ? 1 : -1; }

Color color_of(std::int8_t piece) { return piece > 0 ? Color::White : Color::Black; }

char piece_char(std::int8_t piece) {
  constexpr const char* kChars = ".pnbrqk";
  const char c = kChars[std::abs(piece)];
  return piece > 0 ? static_cast<char>(c - 'a' + 'A') : c;
}

std::int8_t piece_from_char(char c) {
  switch (c) {
    case 'P': return kPawn;
    case 'N': return kKnight;
    case 'B': return kBishop;
    case 'R': return kRook;
    case 'Q': return kQueen;
    case 'K': return kKing;
    case 'p': return -kPawn;
    case 'n': return -kKnight;
    case 'b': return -kBishop;
    case 'r': return -kRook;
    case 'q': return -kQueen;
    case 'k': return -kKing;
    default: return kEmpty;
  }
}

std::int8_t promotion_from_char(char c) {
  switch (c) {
    case 'q': return kQueen;
    case 'r': return kRook;
    case 'b': return kBishop;
    case 'n': return kKnight;
    default: return kEmpty;
  }
}

std::uint8_t castling_mask(int sq) {
  switch (sq) {
    case kA1: return static_cast<std::uint8_t>(~kWhiteQueenside);
    case kH1: return static_cast<std::uint8_t>(~kWhiteKingside);
    case kE1: return static_cast<std::uint8_t>(~(kWhiteKingside | kWhiteQueenside));
    case kA8: return static_cast<std::uint8_t>(~kBlackQueenside);
    case kH8: return static_cast<std::uint8_t>(~kBlackKingside);
    case kE8: return static_cast<std::uint8_t>(~(kBlackKingside | kBlackQueenside));
    default: return 0xff;
  }
}

[[noreturn]] void bad_fen(std::string_view fen, const std::string& why) {
  throw Error(ErrorKind::MalformedFen, why + " in '" + std::string(fen) + "'");
}

std::optional<int> parse_int(std::string_view s) {
  if (s.empty()) return std::nullopt;
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || value < 0) return std::nullopt;
  return value;
}

int parse_square(std::string_view s) {
  if (s.size() != 2 || s[0] < 'a' || s[0] > 'h' || s[1] < '1' || s[1] > '8') return -1;
  return make_square(s[0] - 'a', s[1] - '1');
}

}  // namespace

std::string_view to_string(Color c) noexcept { return c == Color::White ? "white" : "black"; }

std::string square_name(int square) {
  return {static_cast<char>('a' + file_of(square)), static_cast<char>('1' + rank_of(square))};
}

// ── UciMove ─────────────────────────────────────────────────────────────────

bool UciMove::is_valid_syntax(std::string_view t) noexcept {
  if (t.size() != 4 && t.size() != 5) return false;
  auto file_ok = [](char c) { return c >= 'a' && c <= 'h'; };
  auto rank_ok = [](char c) { return c >= '1' && c <= '8'; };
  if (!file_ok(t[0]) || !rank_ok(t[1]) || !file_ok(t[2]) || !rank_ok(t[3])) return false;
  if (t.size() == 5 && promotion_from_char(t[4]) == kEmpty) return false;
  return true;
}

UciMove UciMove::parse(std::string_view text) {
  if (!is_valid_syntax(text)) {
    throw Error(ErrorKind::MalformedMove, "not a strict UCI move: '" + std::string(text) + "'");
  }
  return UciMove(std::string(text));
}

int UciMove::from() const noexcept { return make_square(text_[0] - 'a', text_[1] - '1'); }
int UciMove::to() const noexcept { return make_square(text_[2] - 'a', text_[3] - '1'); }

std::string Move::uci() const {
  std::string s = square_name(from) + square_name(to);
  if (promotion != kEmpty) s += ".pnbrqk"[promotion];
  return s;
}

// ── Position ────────────────────────────────────────────────────────────────

Position::Position() { *this = from_fen(kStartFen); }

Position Position::from_fen(std::string_view fen) {
  std::vector<std::string_view> fields;
  for (std::size_t i = 0; i < fen.size();) {
    while (i < fen.size() && fen[i] == ' ') ++i;
    const std::size_t start = i;
    while (i < fen.size() && fen[i] != ' ') ++i;
    if (i > start) fields.push_back(fen.substr(start, i - start));
  }
  if (fields.size() != 6) bad_fen(fen, "expected 6 fields, got " + std::to_string(fields.size()));

  Position p{Blank{}};

  int rank = 7;
  int file = 0;
  for (char c : fields[0]) {
    if (c == '/') {
      if (file != 8) bad_fen(fen, "rank " + std::to_string(rank + 1) + " does not have 8 files");
      --rank;
      file = 0;
      if (rank < 0) bad_fen(fen, "more than 8 ranks");
    } else if (c >= '1' && c <= '8') {
      file += c - '0';
      if (file > 8) bad_fen(fen, "rank overflow");
    } else {
      const std::int8_t piece = piece_from_char(c);
      if (piece == kEmpty) bad_fen(fen, std::string("bad piece character '") + c + "'");
      if (file >= 8) bad_fen(fen, "rank overflow");
      p.board_[make_square(file, rank)] = piece;
      ++file;
    }
  }
  if (rank != 0 || file != 8) bad_fen(fen, "piece placement does not describe 8 full ranks");

  if (fields[1] == "w") {
    p.side_ = Color::White;
  } else if (fields[1] == "b") {
    p.side_ = Color::Black;
  } else {
    bad_fen(fen, "bad side to move");
  }

  p.castling_ = 0;
  if (fields[2] != "-") {
    for (char c : fields[2]) {
      std::uint8_t right = 0;
      switch (c) {
        case 'K': right = kWhiteKingside; break;
        case 'Q': right = kWhiteQueenside; break;
        case 'k': right = kBlackKingside; break;
        case 'q': right = kBlackQueenside; break;
        default: bad_fen(fen, "bad castling field");
      }
      if (p.castling_ & right) bad_fen(fen, "duplicate castling right");
      p.castling_ |= right;
    }
  }
  auto need = [&](std::uint8_t right, int king_sq, int rook_sq, std::int8_t king, std::int8_t rook) {
    if ((p.castling_ & right) && (p.board_[king_sq] != king || p.board_[rook_sq] != rook)) {
      bad_fen(fen, "impossible castling rights");
    }
  };
  need(kWhiteKingside, kE1, kH1, kKing, kRook);
  need(kWhiteQueenside, kE1, kA1, kKing, kRook);
  need(kBlackKingside, kE8, kH8, -kKing, -kRook);
  need(kBlackQueenside, kE8, kA8, -kKing, -kRook);

  p.ep_square_ = -1;
  if (fields[3] != "-") {
    const int ep = parse_square(fields[3]);
    if (ep < 0) bad_fen(fen, "bad en-passant square");
    const int expected_rank = p.side_ == Color::White ? 5 : 2;
    if (rank_of(ep) != expected_rank) bad_fen(fen, "en-passant square on wrong rank");
    const int dir = p.side_ == Color::White ? -1 : 1;  // toward the pushed pawn
    const std::int8_t pushed = static_cast<std::int8_t>(-sign_of(p.side_) * kPawn);
    if (p.board_[ep] != kEmpty || p.board_[ep + 8 * dir] != pushed || p.board_[ep - 8 * dir] != kEmpty) {
      bad_fen(fen, "en-passant square without a double-pushed pawn");
    }
    p.ep_square_ = static_cast<std::int8_t>(ep);
  }

  const auto halfmove = parse_int(fields[4]);
  const auto fullmove = parse_int(fields[5]);
  if (!halfmove) bad_fen(fen, "bad halfmove clock");
  if (!fullmove || *fullmove < 1) bad_fen(fen, "bad fullmove number");
  p.halfmove_ = *halfmove;
  p.fullmove_ = *fullmove;

  int white_kings = 0;
  int black_kings = 0;
  for (int sq = 0; sq < 64; ++sq) {
    const std::int8_t piece = p.board_[sq];
    if (piece == kKing) ++white_kings;
    if (piece == -kKing) ++black_kings;
    if (std::abs(piece) == kPawn && (rank_of(sq) == 0 || rank_of(sq) == 7)) {
      bad_fen(fen, "pawn on back rank");
    }
  }
  if (white_kings != 1 || black_kings != 1) bad_fen(fen, "each side needs exactly one king");
  if (p.attacked(p.king_square(opposite(p.side_)), p.side_)) {
    bad_fen(fen, "side not to move is in check");
  }
  return p;
}

int Position::ply_count() const noexcept {
  return (fullmove_ - 1) * 2 + (side_ == Color::Black ? 1 : 0);
}

int Position::king_square(Color c) const noexcept {
  const std::int8_t king = static_cast<std::int8_t>(sign_of(c) * kKing);
  for (int sq = 0; sq < 64; ++sq) {
    if (board_[sq] == king) return sq;
  }
  return -1;
}

bool Position::attacked(int square, Color by) const noexcept {
  const int s = sign_of(by);
  const int f = file_of(square);
  const int r = rank_of(square);

  // Pawns attack diagonally forward, so look one rank behind from the attacker's view.
  const int pr = r - s;
  for (int df : {-1, 1}) {
    if (on_board(f + df, pr) && board_[make_square(f + df, pr)] == s * kPawn) return true;
  }
  for (const auto& step : kKnightSteps) {
    const int nf = f + step[0];
    const int nr = r + step[1];
    if (on_board(nf, nr) && board_[make_square(nf, nr)] == s * kKnight) return true;
  }
  for (const auto& step : kKingSteps) {
    const int nf = f + step[0];
    const int nr = r + step[1];
    if (on_board(nf, nr) && board_[make_square(nf, nr)] == s * kKing) return true;
  }
  auto ray = [&](const int (&dirs)[4][2], std::int8_t slider) {
    for (const auto& d : dirs) {
      int nf = f + d[0];
      int nr = r + d[1];
      while (on_board(nf, nr)) {
        const std::int8_t piece = board_[make_square(nf, nr)];
        if (piece != kEmpty) {
          if (piece == s * slider || piece == s * kQueen) return true;
          break;
        }
        nf += d[0];
        nr += d[1];
      }
    }
    return false;
  };
  return ray(kBishopDirs, kBishop) || ray(kRookDirs, kRook);
}

bool Position::in_check() const noexcept { return attacked(king_square(side_), opposite(side_)); }

std::vector<Move> Position::generate_pseudo() const {
  std::vector<Move> moves;
  moves.reserve(64);
  const int s = sign_of(side_);
  auto push = [&](int from, int to, std::int8_t promo = kEmpty) {
    moves.push_back(Move{static_cast<std::int8_t>(from), static_cast<std::int8_t>(to), promo});
  };
  auto push_pawn = [&](int from, int to) {
    if (rank_of(to) == 0 || rank_of(to) == 7) {
      for (std::int8_t promo : {kQueen, kRook, kBishop, kKnight}) push(from, to, promo);
    } else {
      push(from, to);
    }
  };
  auto enemy = [&](std::int8_t piece) { return piece != kEmpty && color_of(piece) != side_; };

  for (int sq = 0; sq < 64; ++sq) {
    const std::int8_t piece = board_[sq];
    if (piece == kEmpty || color_of(piece) != side_) continue;
    const int f = file_of(sq);
    const int r = rank_of(sq);
    switch (std::abs(piece)) {
      case kPawn: {
        const int start_rank = side_ == Color::White ? 1 : 6;
        const int nr = r + s;
        if (on_board(f, nr) && board_[make_square(f, nr)] == kEmpty) {
          push_pawn(sq, make_square(f, nr));
          if (r == start_rank && board_[make_square(f, nr + s)] == kEmpty) push(sq, make_square(f, nr + s));
        }
        for (int df : {-1, 1}) {
          if (!on_board(f + df, nr)) continue;
          const int to = make_square(f + df, nr);
          if (enemy(board_[to])) push_pawn(sq, to);
          if (to == ep_square_) push(sq, to);
        }
        break;
      }
      case kKnight:
      case kKing: {
        const auto& steps = std::abs(piece) == kKnight ? kKnightSteps : kKingSteps;
        for (const auto& step : steps) {
          const int nf = f + step[0];
          const int nr = r + step[1];
          if (!on_board(nf, nr)) continue;
          const std::int8_t target = board_[make_square(nf, nr)];
          if (target == kEmpty || enemy(target)) push(sq, make_square(nf, nr));
        }
        break;
      }
      default: {
        auto slide = [&](const int (&dirs)[4][2]) {
          for (const auto& d : dirs) {
            int nf = f + d[0];
            int nr = r + d[1];
            while (on_board(nf, nr)) {
              const std::int8_t target = board_[make_square(nf, nr)];
              if (target == kEmpty) {
                push(sq, make_square(nf, nr));
              } else {
                if (enemy(target)) push(sq, make_square(nf, nr));
                break;
              }
              nf += d[0];
              nr += d[1];
            }
          }
        };
        if (std::abs(piece) != kRook) slide(kBishopDirs);
        if (std::abs(piece) != kBishop) slide(kRookDirs);
        break;
      }
    }
  }

  // Castling: the king may not start in, pass through, or land in check.
  const Color them = opposite(side_);
  const int home = side_ == Color::White ? kE1 : kE8;
  const std::uint8_t king_side = side_ == Color::White ? kWhiteKingside : kBlackKingside;
  const std::uint8_t queen_side = side_ == Color::White ? kWhiteQueenside : kBlackQueenside;
  if ((castling_ & (king_side | queen_side)) && board_[home] == s * kKing && !attacked(home, them)) {
    if ((castling_ & king_side) && board_[home + 1] == kEmpty && board_[home + 2] == kEmpty &&
        !attacked(home + 1, them) && !attacked(home + 2, them)) {
      push(home, home + 2);
    }
    if ((castling_ & queen_side) && board_[home - 1] == kEmpty && board_[home - 2] == kEmpty &&
        board_[home - 3] == kEmpty && !attacked(home - 1, them) && !attacked(home - 2, them)) {
      push(home, home - 2);
    }
  }
  return moves;
}

Position Position::play_unchecked(const Move& m) const {
  Position next = *this;
  const std::int8_t piece = board_[m.from];
  const std::int8_t captured = board_[m.to];
  const int s = sign_of(side_);
  const bool is_pawn = std::abs(piece) == kPawn;

  next.board_[m.from] = kEmpty;
  next.board_[m.to] = m.promotion != kEmpty ? static_cast<std::int8_t>(s * m.promotion) : piece;

  if (is_pawn && m.to == ep_square_ && captured == kEmpty && file_of(m.from) != file_of(m.to)) {
    next.board_[m.to - 8 * s] = kEmpty;
  }
  if (std::abs(piece) == kKing && std::abs(m.to - m.from) == 2) {
    const bool king_side = m.to > m.from;
    const int rook_from = king_side ? m.from + 3 : m.from - 4;
    const int rook_to = king_side ? m.from + 1 : m.from - 1;
    next.board_[rook_to] = next.board_[rook_from];
    next.board_[rook_from] = kEmpty;
  }

  next.castling_ = castling_ & castling_mask(m.from) & castling_mask(m.to);
  next.ep_square_ = (is_pawn && std::abs(m.to - m.from) == 16) ? static_cast<std::int8_t>((m.from + m.to) / 2) : -1;
  next.halfmove_ = (is_pawn || captured != kEmpty) ? 0 : halfmove_ + 1;
  if (side_ == Color::Black) ++next.fullmove_;
  next.side_ = opposite(side_);
  return next;
}

std::vector<Move> Position::generate_legal() const {
  std::vector<Move> legal;
  for (const Move& m : generate_pseudo()) {
    const Position next = play_unchecked(m);
    if (!next.attacked(next.king_square(side_), opposite(side_))) legal.push_back(m);
  }
  return legal;
}

bool Position::has_legal_ep_capture() const {
  if (ep_square_ < 0) return false;
  for (const Move& m : generate_legal()) {
    if (m.to == ep_square_ && std::abs(board_[m.from]) == kPawn) return true;
  }
  return false;
}

std::string Position::repetition_key() const {
  std::string out;
  for (int rank = 7; rank >= 0; --rank) {
    int empty = 0;
    for (int file = 0; file < 8; ++file) {
      const std::int8_t piece = board_[make_square(file, rank)];
      if (piece == kEmpty) {
        ++empty;
        continue;
      }
      if (empty) out += static_cast<char>('0' + empty);
      empty = 0;
      out += piece_char(piece);
    }
    if (empty) out += static_cast<char>('0' + empty);
    if (rank) out += '/';
  }
  out += side_ == Color::White ? " w " : " b ";
  if (castling_ == 0) {
    out += '-';
  } else {
    if (castling_ & kWhiteKingside) out += 'K';
    if (castling_ & kWhiteQueenside) out += 'Q';
    if (castling_ & kBlackKingside) out += 'k';
    if (castling_ & kBlackQueenside) out += 'q';
  }
  out += ' ';
  out += has_legal_ep_capture() ? square_name(ep_square_) : "-";
  return out;
}

std::string Position::fen() const {
  return repetition_key() + ' ' + std::to_string(halfmove_) + ' ' + std::to_string(fullmove_);
}

// ── Free functions ──────────────────────────────────────────────────────────

Position parse_fen(std::string_view text) { return Position::from_fen(text); }

LegalMoveSet legal_moves(const Position& p) {
  LegalMoveSet out;
  for (const Move& m : p.generate_legal()) out.push_back(UciMove::parse(m.uci()));
  std::sort(out.begin(), out.end());
  return out;
}

bool is_legal(const Position& p, const UciMove& m) {
  for (const Move& legal : p.generate_legal()) {
    if (legal.uci() == m.str()) return true;
  }
  return false;
}

Position apply_move(const Position& p, const UciMove& m) {
  for (const Move& legal : p.generate_legal()) {
    if (legal.uci() == m.str()) return p.play_unchecked(legal);
  }
  throw Error(ErrorKind::IllegalMove, m.str() + " in " + p.fen());
}

std::uint64_t perft(const Position& p, int depth) {
  if (depth <= 0) return 1;
  const std::vector<Move> moves = p.generate_legal();
  if (depth == 1) return moves.size();
  std::uint64_t nodes = 0;
  for (const Move& m : moves) nodes += perft(p.play_unchecked(m), depth - 1);
  return nodes;
}

bool insufficient_material(const Position& p) {
  int minors = 0;
  int knights = 0;
  bool light_bishop = false;
  bool dark_bishop = false;
  for (int sq = 0; sq < 64; ++sq) {
    switch (std::abs(p.piece_at(sq))) {
      case kPawn:
      case kRook:
      case kQueen:
        return false;
      case kKnight:
        ++minors;
        ++knights;
        break;
      case kBishop:
        ++minors;
        ((file_of(sq) + rank_of(sq)) % 2 ? light_bishop : dark_bishop) = true;
        break;
      default:
        break;
    }
  }
  if (minors <= 1) return true;
  // Only bishops, all on one square colour: no mate is possible.
  return knights == 0 && !(light_bishop && dark_bishop);
}

Outcome game_outcome(const Position& p) {
  if (p.generate_legal().empty()) {
    if (p.in_check()) return {OutcomeKind::Checkmate, opposite(p.side_to_move()), DrawRule::None};
    return {OutcomeKind::Stalemate, std::nullopt, DrawRule::None};
  }
  if (insufficient_material(p)) return {OutcomeKind::DrawByRule, std::nullopt, DrawRule::InsufficientMaterial};
  if (p.halfmove_clock() >= 150) return {OutcomeKind::DrawByRule, std::nullopt, DrawRule::SeventyFiveMove};
  return {};
}

// ── Game ────────────────────────────────────────────────────────────────────

Game::Game(Position root) {
  keys_.push_back(root.repetition_key());
  positions_.push_back(std::move(root));
}

void Game::play(const UciMove& m) {
  positions_.push_back(apply_move(positions_.back(), m));
  keys_.push_back(positions_.back().repetition_key());
  moves_.push_back(m);
}

Outcome Game::outcome() const {
  const Outcome base = game_outcome(position());
  if (base.terminal()) return base;
  const auto repeats = std::count(keys_.begin(), keys_.end(), keys_.back());
  if (repeats >= 5) return {OutcomeKind::DrawByRule, std::nullopt, DrawRule::FivefoldRepetition};
  return base;
}

}  // namespace vam::chess
