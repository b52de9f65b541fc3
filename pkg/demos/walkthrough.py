"""Walk the running example through every stage of the compiler.

Run from the repository root:  python3 demos/walkthrough.py
"""
from __future__ import annotations

from pathlib import Path

from tamgram import interp
from tamgram import terms as T
from tamgram.cfg import to_dot
from tamgram.pipeline import analyse, compile_system, load_system

CORPUS = Path(__file__).resolve().parents[1] / "corpus"


def banner(text: str) -> None:
    print(f"\n== {text}")


def main() -> None:
    flat = load_system(CORPUS / "process_a.tg")
    print((CORPUS / "process_a.tg").read_text())

    banner("control-flow graph (skips fused)")
    g, table = analyse(flat, fuse_skips=True)
    print(to_dot(g), end="")

    banner("maximal contexts")
    print(table.dump(), end="")

    for style in ("forward", "backward", "hybrid", "cell-by-cell"):
        banner(f"{style} translation")
        for r in compile_system(flat, style).rules:
            print(r.show())

    banner("a Tamgram trace")
    wg, _ = analyse(load_system(CORPUS / "worked_trace.tg"))
    picks = [
        lambda s, _: s.kind == "fresh",
        lambda s, _: s.kind == "start",
        lambda s, _: s.label == 1 and s.ground.premise == (T.App("In", (T.Str("x"),)),),
        lambda s, _: s.label == 2 and s.ground.premise == (T.App("In", (T.Str("y"),)),),
    ]
    trace = interp.run_steps(wg, interp.Universe(("x", "y"), 1), picks)
    print(interp.canonical(trace).show())

    banner("bounded correspondence, depth 5")
    for style in ("forward", "backward", "hybrid"):
        res = interp.check_correspondence(g, style, 5, table=table)
        print(f"{style}: {'ok' if res.ok else res.counterexample.show()} ({res.explored} states)")


if __name__ == "__main__":
    main()
