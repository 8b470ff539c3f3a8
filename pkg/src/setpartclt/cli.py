"""Command line entry point.

Exit codes: 0 success, 1 invalid input, 2 I/O failure. Failures print one
JSON line ``{"error": kind, "message": ...}`` on stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import __version__
from .bell import build_bell_table, solve_alpha
from .harness import (
    ExperimentConfig,
    conditional_check,
    fmt,
    lemma41,
    run_experiment,
    uniformity,
    write_json,
)
from .moments import STATISTICS, moment_report
from .partition import (
    block_count,
    crossings,
    dimension_index,
    enumerate_rgs,
    from_rgs,
    levels,
)
from .sampler import GENERATORS, balls_trials, sample_rgs, sample_statistics


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# flag name -> (type, help, default); None default means required
_COMMON = {
    "n": (int, "ground set size n (elements)", None),
    "seed": (int, "master seed, 0 <= seed < 2**64", None),
    "workers": (int, "worker processes; results do not depend on it", 1),
}

COMMANDS = {
    "bell": {
        "help": "print n, B_n, alpha_n, B_{n+1}/B_n as CSV",
        "flags": {"max_n": (int, "largest n in the table", None)},
    },
    "enumerate": {
        "help": "list every partition of [n] as restricted growth sequences",
        "flags": {"n": _COMMON["n"]},
        "switches": {"stats": "add levels, dimension, crossings, blocks columns"},
    },
    "sample": {
        "help": "draw uniform random partitions with Stam's algorithm",
        "flags": {
            "n": _COMMON["n"],
            "count": (int, "number of partitions to draw", None),
            "seed": _COMMON["seed"],
            "emit": (str, "rgs or stats", "stats"),
            "generator": (str, "stam or conditional_pipeline", "stam"),
            "workers": _COMMON["workers"],
            "out": (str, "output directory (default: stdout)", ""),
        },
    },
    "balls": {
        "help": "drop n labelled balls into m boxes; per-trial D_n, E_n, S_n",
        "flags": {
            "n": (int, "number of balls", None),
            "m": (int, "number of boxes", None),
            "trials": (int, "number of independent trials", None),
            "seed": _COMMON["seed"],
            "workers": _COMMON["workers"],
            "out": (str, "output directory (default: stdout)", ""),
        },
    },
    "moments": {
        "help": "exact or leading-order mean and variance of a statistic",
        "flags": {
            "n": _COMMON["n"],
            "stat": (str, "levels, dimension, crossings or blocks", None),
        },
        "switches": {"exact": "exact moments (default)", "asymptotic": "leading-order formulas"},
    },
    "clt": {
        "help": "standardized statistic vs the normal law: histogram, Q-Q, KS distance",
        "flags": {
            "n": _COMMON["n"],
            "stat": (str, "levels, dimension, crossings or blocks", None),
            "samples": (int, "number of sampled partitions", None),
            "seed": _COMMON["seed"],
            "out": (str, "output directory", None),
            "generator": (str, "stam or conditional_pipeline", "stam"),
            "normalization": (str, "exact or asymptotic moments", "exact"),
            "bins": (int, "histogram bins, >= 10 (default: Freedman-Diaconis)", 0),
            "qq_points": (int, "thin the Q-Q table to this many rows (default: all)", 0),
            "workers": _COMMON["workers"],
        },
    },
    "uniformity": {
        "help": "chi-square test of sampled partitions against the uniform law",
        "flags": {
            "n": _COMMON["n"],
            "samples": (int, "number of sampled partitions", None),
            "seed": _COMMON["seed"],
            "generator": (str, "stam or conditional_pipeline", "stam"),
            "workers": _COMMON["workers"],
            "out": (str, "output directory (default: stdout only)", ""),
        },
    },
    "lemma41": {
        "help": "balls-in-boxes concentration of D_n around nm - 2m^2",
        "flags": {
            "n": (int, "number of balls", None),
            "trials": (int, "number of independent trials", None),
            "seed": _COMMON["seed"],
            "m": (int, "number of boxes (default: round(n / alpha_n))", 0),
            "workers": _COMMON["workers"],
            "out": (str, "output directory (default: stdout only)", ""),
        },
    },
    "conditional-check": {
        "help": "check crossings = sum of per-element contributions on conditional draws",
        "flags": {
            "n": _COMMON["n"],
            "samples": (int, "number of draws", None),
            "seed": _COMMON["seed"],
            "workers": _COMMON["workers"],
            "out": (str, "output directory (default: stdout only)", ""),
        },
    },
}

SEEDED = {"sample", "balls", "clt", "uniformity", "lemma41", "conditional-check"}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="setpartclt", description="Random set partitions and their limit laws.")
    parser.add_argument("--version", action="version", version=f"setpartclt {__version__}")
    subs = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    for name, entry in COMMANDS.items():
        sub = subs.add_parser(name, help=entry["help"], description=entry["help"])
        for flag, (typ, text, default) in entry["flags"].items():
            suffix = " (required)" if default is None else (f" (default: {default})" if default not in ("", 0) else "")
            sub.add_argument("--" + flag.replace("_", "-"), dest=flag, type=typ, default=None,
                             help=text + suffix)
        for flag, text in entry.get("switches", {}).items():
            sub.add_argument("--" + flag, dest=flag, action="store_true", default=None, help=text)
        if name in SEEDED:
            sub.add_argument("--config", help="JSON file of flag values; explicit flags win")
    return parser


def resolve(args: argparse.Namespace) -> dict:
    """Merge flags over the optional JSON config and apply defaults."""
    entry = COMMANDS[args.command]
    given = {k: v for k, v in vars(args).items() if v is not None and k not in ("command", "config")}
    merged = {}
    config_file = getattr(args, "config", None)
    if config_file:
        with open(config_file) as fh:
            merged.update(json.load(fh))
        unknown = set(merged) - set(entry["flags"]) - set(entry.get("switches", {}))
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
    merged.update(given)
    for flag, (_, _, default) in entry["flags"].items():
        if flag not in merged:
            if default is None:
                raise UsageError(f"missing required flag --{flag.replace('_', '-')}")
            merged[flag] = default
    for flag in entry.get("switches", {}):
        merged[flag] = bool(merged.get(flag, False))
    for key in ("n", "count", "samples", "trials", "max_n"):
        if key in merged and merged[key] < (0 if key == "max_n" else 1):
            raise UsageError(f"--{key.replace('_', '-')} out of range: {merged[key]}")
    if "seed" in merged and not 0 <= merged["seed"] < 2**64:
        raise UsageError("--seed must satisfy 0 <= seed < 2**64")
    if "stat" in merged and merged["stat"] not in STATISTICS:
        raise UsageError(f"--stat must be one of {', '.join(STATISTICS)}")
    if "generator" in merged and merged["generator"] not in GENERATORS:
        raise UsageError(f"--generator must be one of {', '.join(GENERATORS)}")
    if merged.get("workers", 1) < 1:
        raise UsageError("--workers must be >= 1")
    return merged


def _logged(opts: dict) -> dict:
    # workers and output location do not change results
    return {k: v for k, v in opts.items() if k not in ("workers", "out")}


def _open_out(opts: dict, filename: str):
    if not opts.get("out"):
        return None
    out = Path(opts["out"])
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "config.json", _logged(opts))
    return out / filename


def _write_rows(path, header, rows, stream):
    if path is None:
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        return
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def cmd_bell(opts, stdout):
    table = build_bell_table(opts["max_n"] + 1)
    rows = []
    for n in range(opts["max_n"] + 1):
        ratio = table[n + 1] / table[n]
        rows.append([n, table[n], fmt(solve_alpha(n).alpha), fmt(ratio)])
    _write_rows(None, ["n", "bell", "alpha", "bell_ratio"], rows, stdout)


def cmd_enumerate(opts, stdout):
    header = ["rgs"] + (["levels", "dimension", "crossings", "blocks"] if opts["stats"] else [])
    w = csv.writer(stdout, lineterminator="\n")
    w.writerow(header)
    for a in enumerate_rgs(opts["n"]):
        row = ["-".join(map(str, a))]
        if opts["stats"]:
            p = from_rgs(a)
            row += [levels(p), dimension_index(p), crossings(p), block_count(p)]
        w.writerow(row)


def cmd_sample(opts, stdout):
    if opts["emit"] not in ("rgs", "stats"):
        raise UsageError("--emit must be rgs or stats")
    path = _open_out(opts, "samples.csv")
    if opts["emit"] == "rgs":
        rows = sample_rgs(opts["n"], opts["count"], opts["seed"], opts["generator"], opts["workers"])
        body = [["-".join(map(str, r))] for r in rows.tolist()]
        _write_rows(path, ["rgs"], body, stdout)
    else:
        rows = sample_statistics(opts["n"], opts["count"], opts["seed"], opts["generator"], opts["workers"])
        _write_rows(path, ["levels", "dimension", "crossings", "blocks"], rows.tolist(), stdout)


def cmd_balls(opts, stdout):
    if opts["m"] < 1:
        raise UsageError("--m must be >= 1")
    rows = balls_trials(opts["n"], opts["m"], opts["trials"], opts["seed"], opts["workers"])
    _write_rows(_open_out(opts, "balls.csv"), ["d_n", "e_n", "s_n"], rows.tolist(), stdout)


def cmd_moments(opts, stdout):
    if opts["exact"] and opts["asymptotic"]:
        raise UsageError("choose one of --exact and --asymptotic")
    kind = "asymptotic" if opts["asymptotic"] else "exact"
    report = moment_report(opts["n"], opts["stat"], kind)
    stdout.write(json.dumps(report.to_dict(), sort_keys=True) + "\n")


def cmd_clt(opts, stdout):
    cfg = ExperimentConfig(
        n=opts["n"], statistic=opts["stat"], sample_count=opts["samples"], seed=opts["seed"],
        generator=opts["generator"], normalization=opts["normalization"],
        bins=opts["bins"] or None, output_path=opts["out"], workers=opts["workers"],
        qq_points=opts["qq_points"] or None,
    )
    summary = run_experiment(cfg)
    stdout.write(json.dumps(summary.to_dict(), sort_keys=True) + "\n")


def _emit_summary(opts, result, stdout, rows=None, header=None, rows_name=None):
    summary = {k: v for k, v in result.items() if k != "rows"}
    path = _open_out(opts, "summary.json")
    if path is not None:
        write_json(path, summary)
        if rows is not None:
            _write_rows(path.parent / rows_name, header, rows, stdout)
    stdout.write(json.dumps(summary, sort_keys=True) + "\n")


def cmd_uniformity(opts, stdout):
    result = uniformity(opts["n"], opts["samples"], opts["seed"], opts["generator"], opts["workers"])
    _emit_summary(opts, result, stdout)


def cmd_lemma41(opts, stdout):
    result = lemma41(opts["n"], opts["trials"], opts["seed"], opts["m"] or None, opts["workers"])
    _emit_summary(opts, result, stdout, result["rows"].tolist(), ["d_n", "e_n", "s_n"], "trials.csv")


def cmd_conditional_check(opts, stdout):
    result = conditional_check(opts["n"], opts["samples"], opts["seed"], opts["workers"])
    _emit_summary(opts, result, stdout, result["rows"].tolist(),
                  ["sum_x", "crossings"], "draws.csv")


HANDLERS = {
    "bell": cmd_bell,
    "enumerate": cmd_enumerate,
    "sample": cmd_sample,
    "balls": cmd_balls,
    "moments": cmd_moments,
    "clt": cmd_clt,
    "uniformity": cmd_uniformity,
    "lemma41": cmd_lemma41,
    "conditional-check": cmd_conditional_check,
}


def _fail(kind: str, message: str, stderr) -> None:
    stderr.write(json.dumps({"error": kind, "message": message}) + "\n")


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("missing subcommand")
        opts = resolve(args)
        HANDLERS[args.command](opts, stdout)
    except OSError as exc:
        _fail("io", str(exc), stderr)
        return 2
    except (ValueError, IndexError, json.JSONDecodeError) as exc:
        _fail("validation", str(exc), stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
