from __future__ import annotations

from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]
CORPUS = ROOT / "corpus"
CORPUS_FILES = sorted(CORPUS.glob("*.tg"))
# files that define at least one process (the rest are libraries)
SYSTEM_FILES = [p for p in CORPUS_FILES if p.stem not in ("fun_symbols",)]


@pytest.fixture
def corpus():
    return CORPUS


def src_system(text: str, modules=None):
    from tamgram.pipeline import load_source

    return load_source(text, "t.tg", modules)


def pytest_terminal_summary(terminalreporter):
    """One line per acceptance criterion, in criterion order."""
    rows = {}
    for outcome in ("passed", "failed", "skipped"):
        for rep in terminalreporter.stats.get(outcome, []):
            props = dict(getattr(rep, "user_properties", ()))
            if "criterion" not in props or (outcome == "passed" and rep.when != "call"):
                continue
            n, title = props["criterion"]
            verdict = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[outcome]
            note = props.get("detail", "")
            rows[n] = f"criterion {n}: {verdict} {title}" + (f" ({note})" if note else "")
    if rows:
        terminalreporter.section("acceptance criteria")
        for n in sorted(rows):
            terminalreporter.write_line(rows[n])
