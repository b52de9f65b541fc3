from __future__ import annotations

import io
import re
import subprocess
import sys

import pytest

from conftest import CORPUS
from tamgram import __version__
from tamgram.cli import run

DIAG = re.compile(r"^[^:\n]+:\d+:\d+: (error|warning): .+$")


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


def test_compile_writes_file(tmp_path):
    dest = tmp_path / "a.spthy"
    code, out, err = call("compile", CORPUS / "process_a.tg", "-o", dest, "--style", "hybrid")
    assert (code, out, err) == (0, "", "")
    assert dest.read_text().startswith("theory Process_a\nbegin")


def test_compile_matches_golden():
    code, out, _ = call("compile", CORPUS / "basic_cfg.tg", "--style", "forward")
    assert code == 0
    assert out == (CORPUS.parent / "tests" / "golden" / "basic_cfg.forward.spthy").read_text()


def test_compile_is_deterministic():
    assert call("compile", CORPUS / "wpa2_mini.tg") == call("compile", CORPUS / "wpa2_mini.tg")


def test_emit_contexts(tmp_path):
    dest = tmp_path / "ctx.txt"
    code, _, _ = call("compile", CORPUS / "process_a.tg", "--fuse-skips", "--emit-contexts", dest)
    assert code == 0
    assert dest.read_text().splitlines()[1] == "1: maxR = {} maxRA = {'a}"


def test_bogus_style():
    code, out, err = call("compile", "--style", "bogus", CORPUS / "process_a.tg")
    assert code == 1 and out == "" and "invalid choice" in err


def test_check_reports_cell_and_witness(tmp_path):
    bad = tmp_path / "bad.tg"
    bad.write_text("process B =\n  [ In(x) ]->[ 'a := x ];\n  []->[ undef('a) ];\n"
                   "  []->[ Out('a) ]\n")
    code, out, err = call("check", bad)
    assert code == 1 and out == ""
    line = err.strip()
    assert DIAG.match(line)
    assert line.startswith(f"{bad}:4:3: error:")
    assert "'a" in line and "{}, 0, {'pid}, 1, {'a, 'pid}, 2, {'pid}, 3" in line


def test_check_ok_is_silent():
    assert call("check", CORPUS / "wpa2_mini.tg") == (0, "", "")


def test_cfg_dot():
    code, out, _ = call("cfg", CORPUS / "process_a.tg", "--fuse-skips")
    assert code == 0
    edges = sorted(tuple(map(int, m)) for m in re.findall(r"^  (\d+) -> (\d+);$", out, re.M))
    assert edges == [(0, 1), (1, 2), (1, 3), (2, 4), (3, 4)]


def test_contexts():
    code, out, _ = call("contexts", CORPUS / "process_a.tg", "--fuse-skips")
    assert code == 0 and out.splitlines()[2] == "2: maxR = {'a} maxRA = {}"


def test_equiv_all_styles():
    code, out, err = call("equiv", CORPUS / "if_else.tg", "--max-steps", "4")
    assert code == 0 and err == ""
    assert [line.split(":")[0] for line in out.splitlines()] == ["forward", "backward", "hybrid"]
    assert all(": ok (" in line for line in out.splitlines())


def test_equiv_options():
    code, out, _ = call("equiv", CORPUS / "process_a.tg", "--style", "cell-by-cell",
                        "--universe-consts", "1,A", "--max-fresh", "1")
    assert code == 0 and "universe 1, A" in out


def test_budget_exhaustion_exit_code():
    code, _, err = call("equiv", CORPUS / "process_a.tg", "--style", "hybrid",
                        "--state-budget", "3")
    assert code == 2 and "budget" in err
    code, _, err = call("check", CORPUS / "basic_cfg.tg", "--budget", "2")
    assert code == 2 and err.strip()


@pytest.mark.parametrize("name", ["missing.tg", "process_a.txt"])
def test_input_must_be_existing_tg(tmp_path, name):
    if name.endswith(".txt"):
        (tmp_path / name).write_text("process P = []->[]")
    code, _, err = call("compile", tmp_path / name)
    assert code == 1 and err.strip()


def test_syntax_error_location(tmp_path):
    bad = tmp_path / "syn.tg"
    bad.write_text("process P =\n  [ In(x) ->[]\n")
    code, _, err = call("compile", bad)
    assert code == 1 and DIAG.match(err.strip()) and err.startswith(f"{bad}:2:")


def test_include_order(tmp_path):
    first, second, home = tmp_path / "first", tmp_path / "second", tmp_path / "home"
    for d in (first, second, home):
        d.mkdir()
    (first / "lib.tg").write_text('let tag = "first"\n')
    (second / "lib.tg").write_text('let tag = "second"\n')
    (home / "lib.tg").write_text('let tag = "home"\n')
    main = home / "main.tg"
    main.write_text("import Lib\nopen Lib\nprocess P = []->[ Out(tag) ]\n")
    assert "'first'" in call("compile", main, "-I", first, "-I", second)[1]
    assert "'second'" in call("compile", main, "-I", second, "-I", first)[1]
    assert "'home'" in call("compile", main)[1]


def test_warnings_only_on_request(tmp_path):
    src = tmp_path / "w.tg"
    src.write_text('process P = loop { []->[] }; []->[ Out("never") ]\n')
    assert call("compile", src)[2] == ""
    code, _, err = call("compile", src, "--warnings")
    assert code == 0 and "warning: unreachable" in err and DIAG.match(err.splitlines()[0])


def test_no_subcommand():
    code, _, err = call()
    assert code == 1 and "usage" in err


def test_version_and_console_script():
    r = subprocess.run([sys.executable, "-m", "tamgram.cli", "--version"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.strip() == f"tamgram {__version__}"
    assert re.fullmatch(r"\d+\.\d+\.\d+", __version__)
