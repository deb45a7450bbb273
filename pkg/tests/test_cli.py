import json
import subprocess
import sys

import pytest

from asmkit import parse
from asmkit.cli import EXIT_CHECK, EXIT_PARSE, EXIT_RUN, EXIT_USAGE, EXIT_VERIFY, main
from asmkit.cosim.suites import corpus_path

EVEN = corpus_path("even.asm")
PARITY = corpus_path("parity.json")


def cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_check(capsys):
    code, out, _ = cli(capsys, "check", EVEN)
    assert code == 0 and out.startswith("ok:")


def test_run_with_oracle(capsys):
    code, out, _ = cli(capsys, "run", EVEN, "--input", "4", "--oracle", PARITY)
    assert code == 0 and json.loads(out) == {"status": "OutputProduced", "output": True}


def test_run_bundle_by_dispatch(capsys):
    code, out, _ = cli(capsys, "run", corpus_path("factorial.json"), "--input", "5")
    assert code == 0 and json.loads(out)["output"] == 120


def test_stuck_run_exits_with_run_code(capsys):
    code, out, _ = cli(capsys, "run", EVEN, "--input", "3")
    assert code == EXIT_RUN and json.loads(out)["status"] == "Stuck"


def test_trace_option(capsys, tmp_path):
    trace = tmp_path / "t.jsonl"
    cli(capsys, "run", EVEN, "--input", "2", "--oracle", PARITY, "--trace", str(trace))
    rows = [json.loads(x) for x in trace.read_text().splitlines()]
    assert rows[-1]["status"] == "OutputProduced"


@pytest.mark.parametrize("cmd", ["separate", "normalize", "serialize"])
def test_transforms_write_parsable_units(capsys, tmp_path, cmd):
    target = tmp_path / "out.asm"
    code, _, _ = cli(capsys, cmd, corpus_path("factorial.asm"), "-o", str(target))
    assert code == 0
    parse(target.read_text())


def test_serialize_classification_and_separate_cert(capsys, tmp_path):
    cls, cert = tmp_path / "c.json", tmp_path / "cert.json"
    cli(capsys, "serialize", EVEN, "--emit-classification", str(cls))
    kinds = [row["kind"] for row in json.loads(cls.read_text())["clauses"]]
    assert kinds.count("tainted") == 1 and set(kinds) == {"pure", "tainted"}
    cli(capsys, "separate", corpus_path("watchdog.asm"), "--cert", str(cert))
    assert "armed" in json.loads(cert.read_text())["renaming"]


def test_prune_then_run(capsys, tmp_path):
    b = tmp_path / "b.asm"
    assert cli(capsys, "prune", corpus_path("evenodd.json"), "-o", str(b))[0] == 0
    code, out, _ = cli(capsys, "run", str(b), "--input", "9", "--max-steps", "100000")
    assert code == 0 and json.loads(out)["output"] is False


def test_error_codes(capsys, tmp_path):
    bad = tmp_path / "bad.asm"
    bad.write_text("program\n  par {\n")
    assert cli(capsys, "check", str(bad))[0] == EXIT_PARSE
    bad.write_text("program\n  x := 1\n")
    assert cli(capsys, "check", str(bad))[0] == EXIT_CHECK
    assert cli(capsys, "check", str(tmp_path / "missing.asm"))[0] == EXIT_USAGE
    code, _, err = cli(capsys, "--json", "check", str(bad))
    assert code == EXIT_CHECK and "error" in json.loads(err)
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == EXIT_USAGE


def test_cosim_report(capsys, tmp_path):
    report = tmp_path / "r.json"
    code, _, _ = cli(capsys, "cosim", "--pass", "serialize", "--count", "5", "-o", str(report))
    data = json.loads(report.read_text())
    assert code == 0 and data["status"] == "pass" and data["info"]["seed"] == 0
    assert EXIT_VERIFY == 6


def test_console_script_entry():
    res = subprocess.run([sys.executable, "-m", "asmkit.cli", "check", EVEN],
                         capture_output=True, text=True)
    assert res.returncode == 0
