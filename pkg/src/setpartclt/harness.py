"""Seeded Monte Carlo experiments: normal approximation of standardized
statistics, chi-square uniformity of samplers, and balls-in-boxes checks."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import gammaincc, ndtr, ndtri

from . import _kernels
from .bell import solve_alpha
from .moments import STATISTICS, MomentReport, moment_report
from .partition import crossings, enumerate_rgs, from_rgs
from .rng import CHUNK_SIZE, chunk_bounds, map_chunks, substream
from .sampler import GENERATORS, balls_trials, conditional_pipeline, sample_rgs, sample_statistics

STAT_COLUMN = {
    "levels": _kernels.LEVELS,
    "dimension": _kernels.DIMENSION,
    "crossings": _kernels.CROSSINGS,
    "blocks": _kernels.BLOCKS,
}


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


@dataclass
class ExperimentConfig:
    n: int
    statistic: str
    sample_count: int
    seed: int
    generator: str = "stam"
    normalization: str = "exact"
    bins: int | None = None  # None: Freedman-Diaconis
    output_path: str | None = None
    workers: int = 1
    qq_points: int | None = None  # None: one row per sample

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.statistic not in STATISTICS:
            raise ValueError(f"unknown statistic {self.statistic!r}")
        if self.sample_count < 100:
            raise ValueError("sample_count must be >= 100")
        if self.generator not in GENERATORS:
            raise ValueError(f"unknown generator {self.generator!r}")
        if self.normalization not in ("exact", "asymptotic"):
            raise ValueError(f"unknown normalization {self.normalization!r}")
        if self.bins is not None and self.bins < 10:
            raise ValueError("bins must be >= 10")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @classmethod
    def from_json(cls, path, **overrides) -> "ExperimentConfig":
        with open(path) as fh:
            data = json.load(fh)
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**data)

    def to_dict(self) -> dict:
        """Fields that determine results; workers and output location do not."""
        d = asdict(self)
        del d["workers"], d["output_path"]
        return d


@dataclass
class EmpiricalSummary:
    sample_count: int
    sample_mean: float
    sample_variance: float
    ks_distance: float
    bin_edges: np.ndarray
    counts: np.ndarray
    qq_theoretical: np.ndarray
    qq_sample: np.ndarray
    moments: MomentReport | None = None
    raw_mean: float = math.nan
    raw_variance: float = math.nan
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "sample_count": self.sample_count,
            "sample_mean": self.sample_mean,
            "sample_variance": self.sample_variance,
            "ks_distance": self.ks_distance,
            "raw_mean": self.raw_mean,
            "raw_variance": self.raw_variance,
        }
        if self.moments is not None:
            out["moments"] = self.moments.to_dict()
        out.update(self.extra)
        return out


def ks_normal(values) -> float:
    """Exact ``sup_x |F_n(x) - Phi(x)|`` for the empirical CDF of ``values``."""
    x = np.sort(np.asarray(values, dtype=float))
    n = len(x)
    if n < 2:
        raise ValueError("need at least 2 values")
    cdf = ndtr(x)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - cdf), np.max(cdf - (i - 1) / n)))


def chi_square_uniform(counts, total: int | None = None) -> tuple[float, int, float]:
    """Pearson statistic against the uniform law on the cells, with p-value."""
    counts = np.asarray(counts, dtype=float)
    if total is None:
        total = counts.sum()
    elif total != counts.sum():
        raise ValueError("total does not match the counts")
    cells = len(counts)
    if cells < 2:
        raise ValueError("need at least two cells")
    expected = total / cells
    if expected < 5:
        raise ValueError(f"expected count {expected:.3g} < 5 per cell; draw more samples")
    stat = float(((counts - expected) ** 2).sum() / expected)
    dof = cells - 1
    return stat, dof, float(gammaincc(dof / 2, stat / 2))


def partition_counts(rgs_rows: np.ndarray, n: int) -> np.ndarray:
    """Frequency of each partition of [n], indexed by lexicographic RGS rank."""
    index = {a: i for i, a in enumerate(enumerate_rgs(n))}
    counts = np.zeros(len(index), dtype=np.int64)
    for row in rgs_rows:
        counts[index[tuple(int(v) for v in row)]] += 1
    return counts


def standardize(values: np.ndarray, report: MomentReport) -> np.ndarray:
    sd = report.sd
    centered = values.astype(float) - float(report.mean)
    if sd == 0:
        # point mass: no scale to divide by
        return centered
    return centered / sd


def summarize(z: np.ndarray, bins: int | None = None, qq_points: int | None = None) -> EmpiricalSummary:
    z = np.asarray(z, dtype=float)
    n = len(z)
    if bins is None:
        if np.ptp(z) == 0:
            edges = np.array([z[0] - 0.5, z[0] + 0.5])
        else:
            edges = np.histogram_bin_edges(z, bins="fd")
    else:
        edges = np.histogram_bin_edges(z, bins=bins)
    counts, edges = np.histogram(z, bins=edges)
    zs = np.sort(z)
    probs = (np.arange(1, n + 1) - 0.5) / n
    if qq_points is not None and qq_points < n:
        idx = np.unique(np.linspace(0, n - 1, qq_points).round().astype(int))
        zs, probs = zs[idx], probs[idx]
    return EmpiricalSummary(
        sample_count=n,
        sample_mean=float(z.mean()),
        sample_variance=float(z.var()),
        ks_distance=ks_normal(z),
        bin_edges=edges,
        counts=counts,
        qq_theoretical=ndtri(probs),
        qq_sample=zs,
    )


def emit_histogram_qq(summary: EmpiricalSummary, path) -> tuple[Path, Path]:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    hist_path, qq_path = out / "histogram.csv", out / "qq.csv"
    edges, counts = summary.bin_edges, summary.counts
    with open(hist_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["bin_left", "bin_right", "count", "normal_density_at_center"])
        for lo, hi, c in zip(edges[:-1], edges[1:], counts):
            center = 0.5 * (lo + hi)
            w.writerow([fmt(lo), fmt(hi), fmt(c), fmt(math.exp(-center * center / 2) / math.sqrt(2 * math.pi))])
    with open(qq_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["theoretical_quantile", "sample_quantile"])
        for t, s in zip(summary.qq_theoretical, summary.qq_sample):
            w.writerow([fmt(t), fmt(s)])
    return hist_path, qq_path


def write_json(path, data) -> None:
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def run_experiment(cfg: ExperimentConfig) -> EmpiricalSummary:
    """Sample, standardize and summarize one statistic; write artifacts if asked."""
    report = moment_report(cfg.n, cfg.statistic, cfg.normalization)
    stats = sample_statistics(cfg.n, cfg.sample_count, cfg.seed, cfg.generator, cfg.workers)
    raw = stats[:, STAT_COLUMN[cfg.statistic]]
    summary = summarize(standardize(raw, report), cfg.bins, cfg.qq_points)
    summary.moments = report
    summary.raw_mean = float(raw.mean())
    summary.raw_variance = float(raw.var())
    if cfg.output_path:
        out = Path(cfg.output_path)
        emit_histogram_qq(summary, out)
        write_json(out / "summary.json", summary.to_dict())
        write_json(out / "config.json", cfg.to_dict())
    return summary


def uniformity(n: int, samples: int, seed: int, generator: str = "stam",
               workers: int = 1) -> dict:
    rows = sample_rgs(n, samples, seed, generator, workers)
    counts = partition_counts(rows, n)
    stat, dof, p = chi_square_uniform(counts)
    return {"n": n, "samples": samples, "seed": seed, "generator": generator,
            "cells": len(counts), "statistic": stat, "dof": dof, "p_value": p,
            "counts": counts.tolist()}


def lemma41(n: int, trials: int, seed: int, m: int | None = None, workers: int = 1) -> dict:
    """Scaled deviations ``|D_n - (nm - 2m^2)| / m^{3/2}`` at ``m = round(n/alpha_n)``."""
    if m is None:
        m = round(n / solve_alpha(n).alpha)
    data = balls_trials(n, m, trials, seed, workers)
    d, e, s = data[:, 0], data[:, 1], data[:, 2]
    scaled = np.abs(d - (n * m - 2 * m * m)) / m**1.5
    e_mean = float(e.mean())
    return {
        "n": n, "m": m, "trials": trials, "seed": seed,
        "scaled_deviation_p95": float(np.percentile(scaled, 95)),
        "scaled_deviation_mean": float(scaled.mean()),
        "empty_mean": e_mean,
        "empty_var": float(e.var(ddof=1)),
        "empty_dispersion": float(e.var(ddof=1) / e_mean) if e_mean > 0 else math.nan,
        "empty_mean_exact": m * (1 - 1 / m) ** n,
        "s_mean": float(s.mean()),
        "s_mean_exact": m * m,
        "rows": data,
    }


def _conditional_chunk(n: int, lo: int, hi: int, seed: int) -> np.ndarray:
    rng = substream(seed, "conditional_check", lo // CHUNK_SIZE)
    out = np.empty((hi - lo, 2), dtype=np.int64)
    for r in range(hi - lo):
        draw = conditional_pipeline(n, rng)
        out[r] = (sum(draw.x_trace), crossings(draw.partition))
    return out


def conditional_check(n: int, samples: int, seed: int, workers: int = 1) -> dict:
    """Compare the summed per-element crossing trace with brute-force crossings."""
    tasks = [(n, lo, hi, seed) for lo, hi in chunk_bounds(samples)]
    rows = np.concatenate(map_chunks(_conditional_chunk, tasks, workers))
    mismatches = int((rows[:, 0] != rows[:, 1]).sum())
    return {"n": n, "samples": samples, "seed": seed, "mismatches": mismatches,
            "mean_crossings": float(rows[:, 1].mean()), "rows": rows}
