"""Replay per-interface latency traces under multi-interface strategies.

Traces are synchronized probe sequences, one file per interface. Playing
them back together gives the measured outcome of a strategy for every
probe; combining the per-interface empirical curves under the independence
assumption gives the predicted curve. The two are compared with the
Kolmogorov-Smirnov distance.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .errors import DimensionMismatch, EmptyInput, NoOverlap, ParseError
from .latency_model import LOST, EmpiricalCurve, InterfaceProfile, ReliabilityCurve, empirical_from_samples
from .mc_oracle import draw_latencies
from .strategy_eval import Cloning, KofN, Strategy, Weighted, check_k, decode_latency, eval_strategy

log = logging.getLogger(__name__)


@dataclass(eq=False)
class Trace:
    """Probe indices and one-way latencies (ms, ``inf`` if lost) of one interface."""

    interface_name: str
    probes: np.ndarray
    latencies: np.ndarray

    def __post_init__(self):
        self.probes = np.asarray(self.probes, dtype=np.int64)
        self.latencies = np.asarray(self.latencies, dtype=float)
        if self.probes.size == 0:
            raise EmptyInput(f"trace {self.interface_name!r} has no records")
        if self.probes.shape != self.latencies.shape:
            raise DimensionMismatch("probe and latency arrays differ in length")
        if np.any(np.diff(self.probes) <= 0):
            raise ParseError("probe indices must be strictly increasing")

    @classmethod
    def from_records(cls, name, records):
        probes = [p for p, _ in records]
        lat = [math.inf if v is LOST else float(v) for _, v in records]
        return cls(name, np.array(probes, dtype=np.int64), np.array(lat, dtype=float))

    @property
    def records(self):
        return [(int(p), None if math.isinf(v) else float(v)) for p, v in zip(self.probes, self.latencies)]

    def __len__(self):
        return self.probes.size


def load_trace(path: Union[str, Path], name: Optional[str] = None) -> Trace:
    """Read a ``probe_index,latency_ms`` CSV; an empty latency marks a lost probe.

    A header line is allowed as the first line. Raises ``OSError`` if the
    file cannot be read and ``ParseError`` (with the line number) for
    malformed content.
    """
    path = Path(path)
    probes, lat = [], []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise ParseError(f"expected 2 columns, got {len(row)}", lineno, path)
            idx_text, lat_text = row[0].strip(), row[1].strip()
            try:
                idx = int(idx_text)
            except ValueError:
                if lineno == 1 and not probes:
                    continue  # header
                raise ParseError(f"bad probe index {idx_text!r}", lineno, path) from None
            if probes and idx <= probes[-1]:
                raise ParseError(f"probe index {idx} not greater than {probes[-1]}", lineno, path)
            if lat_text == "":
                value = math.inf
            else:
                try:
                    value = float(lat_text)
                except ValueError:
                    raise ParseError(f"bad latency {lat_text!r}", lineno, path) from None
                if not math.isfinite(value) or value < 0:
                    raise ParseError(f"latency must be finite and >= 0, got {lat_text!r}", lineno, path)
            probes.append(idx)
            lat.append(value)
    if not probes:
        raise ParseError("trace file has no records", None, path)
    return Trace(name or path.stem, np.array(probes, dtype=np.int64), np.array(lat))


def synthesize_trace(profile: InterfaceProfile, n_probes: int, nbytes: float = 128.0, seed: int = 0, name: Optional[str] = None) -> Trace:
    """Trace of ``n_probes`` independent draws from the Gaussian model of ``profile``."""
    rng = np.random.default_rng(seed)
    return Trace(name or profile.name, np.arange(n_probes), draw_latencies(rng, profile, nbytes, n_probes))


def write_trace(trace: Trace, path: Union[str, Path]):
    with open(path, "w", newline="") as fh:
        fh.write("probe_index,latency_ms\n")
        for p, v in zip(trace.probes, trace.latencies):
            fh.write(f"{p},{'' if math.isinf(v) else repr(float(v))}\n")


@dataclass
class Alignment:
    probes: np.ndarray
    rows: np.ndarray  # (n_probes, n_interfaces), inf = lost
    dropped: int


def align(traces: Sequence[Trace]) -> Alignment:
    """Inner join of the traces on probe index."""
    if not traces:
        raise EmptyInput("need at least one trace")
    common = traces[0].probes
    for t in traces[1:]:
        common = np.intersect1d(common, t.probes, assume_unique=True)
    if common.size == 0:
        raise NoOverlap("traces share no probe indices")
    cols = [t.latencies[np.searchsorted(t.probes, common)] for t in traces]
    dropped = sum(len(t) for t in traces) - common.size * len(traces)
    if dropped:
        log.info("dropped %d records missing from at least one trace", dropped)
    return Alignment(common, np.column_stack(cols), dropped)


def strategy_latency(rows: np.ndarray, strategy: Strategy) -> np.ndarray:
    """Message latency per probe row under ``strategy`` (``inf`` if it fails)."""
    rows = np.asarray(rows, dtype=float)
    n = rows.shape[1]
    if isinstance(strategy, Cloning):
        return rows.min(axis=1)
    if isinstance(strategy, KofN):
        check_k(strategy.k, n)
        return np.sort(rows, axis=1)[:, strategy.k - 1]
    if isinstance(strategy, Weighted):
        alloc = strategy.allocation(n)
        # interfaces given no payload send nothing
        rows = np.where(np.asarray(alloc.gamma) > 0, rows, np.inf)
        return decode_latency(rows, alloc)
    raise TypeError(f"unknown strategy {strategy!r}")


def playback(rows: np.ndarray, strategies: Sequence[Strategy]) -> dict:
    """Empirical curve of each strategy over the aligned probe rows."""
    return {str(s): empirical_from_samples(strategy_latency(rows, s)) for s in strategies}


def marginal_curves(rows: np.ndarray) -> list:
    return [empirical_from_samples(rows[:, i]) for i in range(rows.shape[1])]


def predict(marginals: Sequence[EmpiricalCurve], strategy: Strategy) -> EmpiricalCurve:
    """Combine per-interface curves assuming independent interfaces.

    The result is exact as a step function: it can only change where some
    marginal does.
    """
    xs = np.unique(np.concatenate([m.xs for m in marginals]))
    # traces are measured at one probe size, so the payload argument is unused
    ps = np.asarray(eval_strategy(marginals, strategy, 0.0, xs), dtype=float)
    top = float(eval_strategy(marginals, strategy, 0.0, math.inf))
    ps = np.minimum(np.maximum.accumulate(ps), top) if ps.size else ps
    return EmpiricalCurve(xs, ps, top)


def predict_from_marginals(traces_or_rows, strategies: Sequence[Strategy]) -> dict:
    """Predicted curve of each strategy from the per-interface empirical curves.

    Marginals are taken over the aligned probes so that prediction and
    playback see the same data.
    """
    rows = traces_or_rows
    if not isinstance(rows, np.ndarray):
        rows = align(traces_or_rows).rows
    marg = marginal_curves(rows)
    return {str(s): predict(marg, s) for s in strategies}


def ks_distance(a: ReliabilityCurve, b: ReliabilityCurve, grid=None, nbytes=0.0) -> float:
    """Sup-norm distance between two curves, including the plateau gap.

    Empirical curves are compared exactly at the union of their
    breakpoints; pass ``grid`` to compare parametric curves.
    """
    if grid is None:
        if not (isinstance(a, EmpiricalCurve) and isinstance(b, EmpiricalCurve)):
            raise ValueError("parametric curves need an explicit comparison grid")
        grid = np.union1d(a.xs, b.xs)
    grid = np.append(np.asarray(grid, dtype=float), math.inf)
    diff = np.abs(np.asarray(a(grid, nbytes)) - np.asarray(b(grid, nbytes)))
    return float(diff.max()) if diff.size else 0.0


@dataclass
class PlaybackReport:
    interfaces: list
    n_probes: int
    dropped: int
    empirical: dict = field(default_factory=dict)
    predicted: dict = field(default_factory=dict)
    ks: dict = field(default_factory=dict)


def run_playback(traces: Sequence[Trace], strategies: Sequence[Strategy]) -> PlaybackReport:
    al = align(traces)
    emp = playback(al.rows, strategies)
    pred = predict_from_marginals(al.rows, strategies)
    ks = {name: ks_distance(emp[name], pred[name]) for name in emp}
    return PlaybackReport([t.interface_name for t in traces], int(al.probes.size), al.dropped, emp, pred, ks)
