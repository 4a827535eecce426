"""Renders the template fixtures with jinja2 to produce golden prompts."""
import pathlib

import chess
import jinja2

root = pathlib.Path(__file__).resolve().parents[2]
env = jinja2.Environment(keep_trailing_newline=True, undefined=jinja2.StrictUndefined)

cases = {
    "start": (chess.STARTING_FEN, ["d2d4", "e2e4", "g1f3"]),
    "castle": ("r3k2r/8/8/8/8/8/8/R3K2R w KQkq - 0 1", ["e1c1", "e1g1"]),
}
for name, (fen, considered) in cases.items():
    legal = sorted(m.uci() for m in chess.Board(fen).legal_moves)
    for tpl in ("vam_selection", "baseline"):
        text = (root / "templates" / f"{tpl}.txt").read_text(encoding="utf-8")
        out = env.from_string(text).render(FEN=fen, legal_moves_uci_list=legal, considered_moves_uci_list=considered)
        (root / "tests" / "golden" / f"{tpl}_{name}.txt").write_text(out, encoding="utf-8")
        print(tpl, name, len(out))
