"""Experiment orchestration: configs, replication, summaries and CSV output.

File formats (numbers written with 17 significant digits):

* per-run trace ``traces/run_NNNNN.csv``: ``run,t,arm,cum_regret``
* summary ``summary.csv``: ``t,mean,ci_low,ci_high,runs``
* plot data: ``algo,t,mean,ci_low,ci_high``, sorted by algo then t
* ``metadata.json``: config echo, package version, CI and RNG conventions
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from osfib import __version__
from osfib.core import InstanceSpec, OsfibError
from osfib.environments import (
    AuctionSpec,
    make_auction_instance,
    make_random_mean_instance,
    make_uniform_gap_instance,
)
from osfib.policies import BASELINE_NOTE, POLICY_NAMES, UnknownPolicyError
from osfib.simulate import BatchResult, simulate_batch

Z99 = 2.576
INSTANCE_KINDS = ("uniform-gap", "random-mean", "auction")

TRACE_HEADER = ("run", "t", "arm", "cum_regret")
SUMMARY_HEADER = ("t", "mean", "ci_low", "ci_high", "runs")
PLOT_HEADER = ("algo", "t", "mean", "ci_low", "ci_high")


class ConfigError(OsfibError, ValueError):
    pass


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def default_checkpoints(horizon: int) -> List[int]:
    """Powers of two, every hundredth of the horizon, and the horizon itself."""
    points = {horizon}
    p = 1
    while p < horizon:
        points.add(p)
        p *= 2
    for i in range(1, 101):
        points.add(max(1, i * horizon // 100))
    return sorted(points)


@dataclass
class ExperimentConfig:
    algo: str = "elim"
    instance: str = "uniform-gap"
    k: int = 20
    horizon: int = 100_000
    runs: int = 100
    delta: float = 0.1
    lam: float = 0.1
    best: int = 17
    base: float = 0.6
    lo: float = 0.2
    hi: float = 0.6
    instance_seed: Optional[int] = None
    seed: int = 0
    bidders: int = 2
    reserves: Optional[List[float]] = None
    checkpoints: Optional[List[int]] = None
    out: Optional[str] = None
    workers: int = 1

    def validate(self) -> None:
        if self.algo not in POLICY_NAMES:
            raise UnknownPolicyError(f"unknown policy {self.algo!r}; choose from {', '.join(POLICY_NAMES)}")
        if self.instance not in INSTANCE_KINDS:
            raise ConfigError(f"unknown instance {self.instance!r}; choose from {', '.join(INSTANCE_KINDS)}")
        if self.runs < 1:
            raise ConfigError("runs must be at least 1")
        if self.horizon < 1:
            raise ConfigError("horizon must be at least 1")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        cps = self.resolved_checkpoints()
        if cps != sorted(set(cps)) or cps[0] < 1 or cps[-1] != self.horizon:
            raise ConfigError("checkpoints must be increasing, within 1..horizon, and end at the horizon")

    def resolved_checkpoints(self) -> List[int]:
        if self.checkpoints is None:
            return default_checkpoints(self.horizon)
        return sorted(set(int(c) for c in self.checkpoints) | {self.horizon})

    def build_instance(self) -> InstanceSpec:
        if self.instance == "uniform-gap":
            return make_uniform_gap_instance(self.k, self.best, self.base, self.delta)
        if self.instance == "random-mean":
            seed = self.seed if self.instance_seed is None else self.instance_seed
            return make_random_mean_instance(self.k, self.best, self.lam, self.lo, self.hi, seed)
        reserves = self.reserves or [round((i + 1) / (self.k + 1), 10) for i in range(self.k)]
        return make_auction_instance(AuctionSpec(tuple(reserves), self.bidders))


def mean_ci(values) -> Tuple[float, float, float]:
    """Mean and normal-approximation 99% interval ``mean +- 2.576 s / sqrt(n)``."""
    values = np.asarray(values, dtype=float)
    n = values.size
    if n == 0:
        raise ConfigError("cannot summarize zero runs")
    mean = float(values.mean())
    half = Z99 * float(values.std(ddof=1)) / math.sqrt(n) if n >= 2 else 0.0
    return mean, mean - half, mean + half


@dataclass(frozen=True)
class SummaryRow:
    t: int
    mean: float
    ci_low: float
    ci_high: float
    runs: int


def summarize(cum_regret, checkpoints: Sequence[int]) -> List[SummaryRow]:
    """One row per checkpoint from a ``(runs, checkpoints)`` regret matrix."""
    cum = np.asarray(cum_regret, dtype=float)
    if cum.ndim != 2 or cum.shape[0] == 0:
        raise ConfigError("cannot summarize zero runs")
    rows = []
    for c, t in enumerate(checkpoints):
        mean, lo, hi = mean_ci(cum[:, c])
        rows.append(SummaryRow(int(t), mean, lo, hi, cum.shape[0]))
    return rows


def _simulate_chunk(args) -> BatchResult:
    inst, algo, horizon, seed, run_ids, cps = args
    return simulate_batch(inst, algo, horizon, seed, run_ids, checkpoints=cps)


def simulate_config(cfg: ExperimentConfig, inst: Optional[InstanceSpec] = None) -> BatchResult:
    """Run every replication of ``cfg``; replication ``r`` depends only on ``(seed, r)``."""
    cfg.validate()
    inst = inst or cfg.build_instance()
    cps = cfg.resolved_checkpoints()
    chunks = [c for c in np.array_split(np.arange(cfg.runs), cfg.workers) if c.size]
    jobs = [(inst, cfg.algo, cfg.horizon, cfg.seed, c, cps) for c in chunks]
    if len(jobs) == 1:
        parts = [_simulate_chunk(jobs[0])]
    else:
        with ProcessPoolExecutor(max_workers=len(jobs)) as pool:
            parts = list(pool.map(_simulate_chunk, jobs))
    return BatchResult(
        run_ids=np.concatenate([p.run_ids for p in parts]),
        checkpoints=parts[0].checkpoints,
        arms=np.concatenate([p.arms for p in parts]),
        cum_regret=np.concatenate([p.cum_regret for p in parts]),
    )


def _write_csv(path: Path, header, rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) if not isinstance(v, str) else v for v in row])
    path.write_text(buf.getvalue())


def trace_rows(result: BatchResult, index: int):
    run = int(result.run_ids[index])
    for c, t in enumerate(result.checkpoints):
        yield run, int(t), int(result.arms[index, c]), float(result.cum_regret[index, c])


def metadata(cfg: ExperimentConfig, inst: InstanceSpec) -> dict:
    config = asdict(cfg)
    config.pop("out")
    config.pop("workers")  # does not affect results
    return {
        "config": config,
        "checkpoints": cfg.resolved_checkpoints(),
        "instance": inst.to_dict(),
        "version": __version__,
        "ci": "normal approximation, mean +- 2.576 * sample std / sqrt(runs)",
        "rng": "numpy PCG64; per-run streams from SeedSequence([seed, run]).spawn(2) -> (environment, policy)",
        "pseudo_regret": "cumulative sum of mean gaps of the played arms",
        "baseline_note": BASELINE_NOTE if cfg.algo == "exp3rtb" else None,
    }


def run_experiment(cfg: ExperimentConfig) -> Tuple[BatchResult, List[SummaryRow]]:
    """Simulate ``cfg`` and, when ``cfg.out`` is set, write traces, summary and metadata."""
    inst = cfg.build_instance()
    result = simulate_config(cfg, inst)
    summary = summarize(result.cum_regret, result.checkpoints)
    if cfg.out:
        out = Path(cfg.out)
        (out / "traces").mkdir(parents=True, exist_ok=True)
        for i, run in enumerate(result.run_ids):
            _write_csv(out / "traces" / f"run_{int(run):05d}.csv", TRACE_HEADER, trace_rows(result, i))
        write_summary(out / "summary.csv", summary)
        (out / "metadata.json").write_text(json.dumps(metadata(cfg, inst), indent=2, sort_keys=True) + "\n")
    return result, summary


def write_summary(path: Union[str, Path], rows: Sequence[SummaryRow]) -> None:
    _write_csv(Path(path), SUMMARY_HEADER, ((r.t, r.mean, r.ci_low, r.ci_high, r.runs) for r in rows))


def read_summary(path: Union[str, Path]) -> List[SummaryRow]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != SUMMARY_HEADER:
            raise ConfigError(f"{path}: unexpected summary header {header}")
        return [SummaryRow(int(t), float(m), float(lo), float(hi), int(n)) for t, m, lo, hi, n in reader]


def plot_data_csv(summaries: Mapping[str, Sequence[SummaryRow]]) -> str:
    """Long-format CSV text for several algorithms sharing one checkpoint grid."""
    grids = {algo: [r.t for r in rows] for algo, rows in summaries.items()}
    if len({tuple(g) for g in grids.values()}) > 1:
        raise ConfigError("summaries do not share the same checkpoints")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(PLOT_HEADER)
    for algo in sorted(summaries):
        for r in sorted(summaries[algo], key=lambda r: r.t):
            writer.writerow([algo, fmt(r.t), fmt(r.mean), fmt(r.ci_low), fmt(r.ci_high)])
    return buf.getvalue()


def emit_plot_data(summaries: Mapping[str, Union[str, Path, Sequence[SummaryRow]]], out: Union[str, Path]) -> str:
    loaded = {
        algo: read_summary(src) if isinstance(src, (str, Path)) else list(src) for algo, src in summaries.items()
    }
    text = plot_data_csv(loaded)
    Path(out).write_text(text)
    return text


def read_plot_data(path: Union[str, Path]) -> Dict[str, List[SummaryRow]]:
    """Inverse of :func:`emit_plot_data`; run counts are not stored and read back as 0."""
    out: Dict[str, List[SummaryRow]] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != PLOT_HEADER:
            raise ConfigError(f"{path}: unexpected plot-data header {header}")
        for algo, t, m, lo, hi in reader:
            out.setdefault(algo, []).append(SummaryRow(int(t), float(m), float(lo), float(hi), 0))
    return out
