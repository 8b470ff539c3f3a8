import csv
import io
import json

import pytest

from setpartclt.cli import build_parser, main

from conftest import SEED


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def test_bell_csv():
    code, out, _ = run("bell", "--max-n", "10")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 11
    assert rows[10]["bell"] == "115975"
    assert float(rows[2]["bell_ratio"]) == 2.5


def test_enumerate_stats():
    code, out, _ = run("enumerate", "--n", "3", "--stats")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 5
    assert rows[0] == {"rgs": "0-0-0", "levels": "2", "dimension": "3", "crossings": "0", "blocks": "1"}


def test_moments_json():
    code, out, _ = run("moments", "--n", "3", "--stat", "levels")
    report = json.loads(out)
    assert code == 0 and report["mean_exact"] == "4/5"
    code, out, _ = run("moments", "--n", "100", "--stat", "dimension", "--asymptotic")
    assert code == 0 and json.loads(out)["kind"] == "asymptotic"
    code, _, err = run("moments", "--n", "100", "--stat", "levels", "--exact", "--asymptotic")
    assert code == 1


def test_missing_flag_no_files(tmp_path):
    out = tmp_path / "clt"
    code, stdout, err = run("clt", "--n", "20", "--stat", "levels", "--seed", "1", "--out", str(out))
    assert code == 1
    assert stdout == ""
    assert json.loads(err)["error"] == "validation"
    assert not out.exists()


@pytest.mark.parametrize("argv", [
    ["frobnicate"],
    ["bell", "--max-n", "3", "--verbose"],
    ["sample", "--n", "x", "--count", "2", "--seed", "1"],
    ["sample", "--n", "5", "--count", "2", "--seed", "-4"],
    ["moments", "--n", "10", "--stat", "nestings"],
    [],
])
def test_validation_errors(argv):
    code, out, err = run(*argv)
    assert code == 1 and out == ""
    assert json.loads(err.strip())["error"] == "validation"
    assert err.count("\n") == 1


def test_io_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code, _, err = run("sample", "--n", "5", "--count", "3", "--seed", "1", "--out", str(blocker / "sub"))
    assert code == 2 and json.loads(err)["error"] == "io"
    code, _, err = run("clt", "--config", str(tmp_path / "missing.json"))
    assert code == 2


def test_sample_streams():
    code, out, _ = run("sample", "--n", "6", "--count", "4", "--seed", "9", "--emit", "rgs")
    lines = out.strip().split("\n")
    assert code == 0 and lines[0] == "rgs" and len(lines) == 5
    code, out2, _ = run("sample", "--n", "6", "--count", "4", "--seed", "9", "--emit", "rgs")
    assert out == out2


def test_balls_rows():
    code, out, _ = run("balls", "--n", "50", "--m", "1", "--trials", "3", "--seed", "2")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and [r["d_n"] for r in rows] == ["50"] * 3


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"n": 12, "stat": "crossings", "samples": 500, "seed": 4, "out": str(tmp_path / "a")}))
    code, out, _ = run("clt", "--config", str(cfg), "--samples", "600")
    assert code == 0
    logged = json.loads((tmp_path / "a" / "config.json").read_text())
    assert logged["sample_count"] == 600 and logged["seed"] == 4
    cfg.write_text(json.dumps({"n": 12, "bogus": 1}))
    code, _, _ = run("clt", "--config", str(cfg))
    assert code == 1


def test_help_lists_flags_with_defaults():
    parser = build_parser()
    sub = parser._subparsers._group_actions[0].choices
    clt_help = sub["clt"].format_help()
    for flag in ("--n", "--stat", "--samples", "--seed", "--out", "--generator",
                 "--normalization", "--bins", "--workers", "--config"):
        assert flag in clt_help
    assert "(default: exact)" in clt_help and "(required)" in clt_help
    assert "elements" in sub["sample"].format_help()


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "setpartclt" in capsys.readouterr().out


COMMANDS = [
    ["sample", "--n", "30", "--count", "5000", "--emit", "stats"],
    ["sample", "--n", "8", "--count", "3000", "--emit", "rgs", "--generator", "conditional_pipeline"],
    ["balls", "--n", "300", "--m", "60", "--trials", "120"],
    ["clt", "--n", "40", "--stat", "crossings", "--samples", "5000"],
    ["uniformity", "--n", "4", "--samples", "4500"],
    ["lemma41", "--n", "1000", "--trials", "120"],
    ["conditional-check", "--n", "25", "--samples", "2500"],
]


@pytest.mark.parametrize("argv", COMMANDS, ids=lambda a: a[0])
def test_outputs_independent_of_workers(tmp_path, argv):
    dirs = []
    for workers in ("1", "2"):
        out = tmp_path / f"w{workers}"
        code, _, err = run(*argv, "--seed", str(SEED), "--workers", workers, "--out", str(out))
        assert code == 0, err
        dirs.append(out)
    names = sorted(p.name for p in dirs[0].iterdir())
    assert names == sorted(p.name for p in dirs[1].iterdir())
    assert "config.json" in names
    for name in names:
        assert (dirs[0] / name).read_bytes() == (dirs[1] / name).read_bytes()
