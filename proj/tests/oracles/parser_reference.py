"""Independent check of tests/golden/parser_cases.json using python-chess.

Rules: exactly one <uci_move>...</uci_move> pair, trimmed payload matching
strict lowercase UCI, then legality, then mask membership.
"""
import json
import re
import sys

import chess

FENS = {
    "start": chess.STARTING_FEN,
    "castle": "r3k2r/8/8/8/8/8/8/R3K2R w KQkq - 0 1",
    "promo": "8/P6k/8/8/8/8/8/K7 w - - 0 1",
}
UCI = re.compile(r"[a-h][1-8][a-h][1-8][qrbn]?")


def verdict(raw, fen, mask):
    opens, closes = raw.count("<uci_move>"), raw.count("</uci_move>")
    if opens == 0:
        return "malformed:missing_tag"
    if opens > 1 or closes > 1:
        return "malformed:multiple_tags"
    o, c = raw.find("<uci_move>"), raw.find("</uci_move>")
    if c < 0 or c < o:
        return "malformed:unclosed_tag"
    payload = raw[o + len("<uci_move>"):c].strip(" \t\r\n\f\v")
    if not UCI.fullmatch(payload):
        return "malformed:bad_syntax"
    board = chess.Board(fen)
    if payload not in {m.uci() for m in board.legal_moves}:
        return "illegal:" + payload
    if mask is not None and payload not in mask:
        return "out_of_mask:" + payload
    return "valid:" + payload


cases = json.load(open(sys.argv[1], encoding="utf-8"))
bad = 0
for c in cases:
    got = verdict(c["raw"], FENS[c["fen"]], c.get("mask"))
    if got != c["expected"]:
        bad += 1
        print("MISMATCH", c["name"], got, c["expected"])
print(len(cases), "cases,", bad, "mismatches")
