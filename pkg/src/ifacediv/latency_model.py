"""Interface profiles and latency-reliability curves.

A latency-reliability curve F(x, B) gives the probability that a packet of
B bytes is delivered within x milliseconds. Parametric curves model the
latency as Gaussian with a size-dependent mean, scaled by the long-term
delivery probability of the interface. Empirical curves are step functions
built from measured samples.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np
from scipy.special import ndtr

from .errors import DomainError, EmptyInput

#: Marker for a probe or packet that never arrived.
LOST = None


@dataclass(frozen=True)
class InterfaceProfile:
    """Linear size/latency model of one interface.

    The mean latency of a ``b``-byte packet is ``(alpha * b + beta) / 2`` ms,
    the standard deviation is ``sigma_ratio`` times that mean, and
    ``p_succ`` is the probability the packet arrives at all.
    """

    name: str
    alpha: float
    beta: float
    p_succ: float
    sigma_ratio: float = 0.1

    def __post_init__(self):
        if not (self.alpha >= 0 and self.beta >= 0):
            raise DomainError(f"{self.name}: alpha and beta must be >= 0")
        if not 0.0 <= self.p_succ <= 1.0:
            raise DomainError(f"{self.name}: p_succ must lie in [0, 1]")
        if not self.sigma_ratio > 0:
            raise DomainError(f"{self.name}: sigma_ratio must be > 0")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(
            name=str(d["name"]),
            alpha=float(d["alpha"]),
            beta=float(d["beta"]),
            p_succ=float(d["p_succ"]),
            sigma_ratio=float(d.get("sigma_ratio", 0.1)),
        )


# Field-measured regression parameters per technology.
PRESETS = {
    "GPRS": InterfaceProfile("GPRS", alpha=0.70, beta=400.0, p_succ=0.984),
    "EDGE": InterfaceProfile("EDGE", alpha=0.46, beta=230.0, p_succ=0.983),
    "UMTS": InterfaceProfile("UMTS", alpha=0.43, beta=200.0, p_succ=0.982),
    "HSDPA": InterfaceProfile("HSDPA", alpha=0.35, beta=178.0, p_succ=0.981),
    "LTE": InterfaceProfile("LTE", alpha=0.0067, beta=41.0, p_succ=0.980),
}


def preset(name: str) -> InterfaceProfile:
    try:
        return PRESETS[name.upper()]
    except KeyError:
        raise DomainError(
            f"unknown interface preset {name!r}; choose from {sorted(PRESETS)}"
        ) from None


def load_profiles(path: Union[str, Path]) -> list[InterfaceProfile]:
    """Read one profile object or a list of them from a JSON file."""
    with open(path) as fh:
        doc = json.load(fh)
    if isinstance(doc, dict):
        doc = [doc]
    if not isinstance(doc, list) or not doc:
        raise EmptyInput(f"{path}: expected a profile object or a nonempty list")
    return [InterfaceProfile.from_dict(d) for d in doc]


def mean_latency(profile: InterfaceProfile, nbytes):
    """Mean latency in ms of a packet carrying ``nbytes`` bytes."""
    return (profile.alpha * nbytes + profile.beta) / 2.0


def normal_cdf(z):
    return ndtr(z)


def eval_parametric(profile: InterfaceProfile, x, nbytes):
    """P(packet of ``nbytes`` delivered within ``x`` ms) under the Gaussian model."""
    mu = mean_latency(profile, np.asarray(nbytes, dtype=float))
    x = np.asarray(x, dtype=float)
    sigma = profile.sigma_ratio * mu
    with np.errstate(divide="ignore", invalid="ignore"):
        gauss = profile.p_succ * ndtr((x - mu) / sigma)
    # mu == 0 means zero variance too: a step at x = 0
    out = np.where(mu > 0, gauss, np.where(x >= 0, profile.p_succ, 0.0))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class ParametricCurve:
    profile: InterfaceProfile

    @property
    def plateau(self) -> float:
        return self.profile.p_succ

    def __call__(self, x, nbytes):
        return eval_parametric(self.profile, x, nbytes)


@dataclass(frozen=True, eq=False)
class EmpiricalCurve:
    """Right-continuous step CDF.

    ``xs`` are strictly increasing latencies and ``ps[j]`` is the
    probability of a latency at most ``xs[j]``. ``plateau`` is the value
    as x goes to infinity.
    """

    xs: np.ndarray
    ps: np.ndarray
    plateau: float

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        ps = np.asarray(self.ps, dtype=float)
        if xs.shape != ps.shape or xs.ndim != 1:
            raise DomainError("xs and ps must be 1-D arrays of equal length")
        if xs.size and (np.any(np.diff(xs) <= 0) or not np.all(np.isfinite(xs))):
            raise DomainError("empirical latencies must be finite and strictly increasing")
        if ps.size and (np.any(np.diff(ps) < 0) or ps[0] < 0 or ps[-1] > self.plateau + 1e-12):
            raise DomainError("empirical probabilities must be nondecreasing within [0, plateau]")
        if not 0.0 <= self.plateau <= 1.0:
            raise DomainError("plateau must lie in [0, 1]")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ps", ps)

    def __call__(self, x, nbytes=None):
        # packet size is ignored: traces carry no size dependence
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.xs, x, side="right") - 1
        if self.ps.size:
            out = np.where(idx >= 0, self.ps[np.maximum(idx, 0)], 0.0)
        else:
            out = np.zeros_like(x)
        out = np.where(np.isposinf(x), self.plateau, out)
        return out if out.ndim else float(out)

    def points(self):
        return list(zip(self.xs.tolist(), self.ps.tolist()))


ReliabilityCurve = Union[ParametricCurve, EmpiricalCurve]


def _as_latency_array(samples: Iterable[Optional[float]]) -> np.ndarray:
    if isinstance(samples, np.ndarray):
        arr = samples.astype(float, copy=True)
    else:
        arr = np.array([math.inf if s is LOST else s for s in samples], dtype=float)
    arr[np.isnan(arr)] = math.inf
    if np.any(arr < 0):
        raise DomainError("latency samples must be nonnegative")
    return arr


def empirical_from_samples(samples: Union[Sequence[Optional[float]], np.ndarray]) -> EmpiricalCurve:
    """Empirical CDF of latency samples; ``None`` (or inf) marks a lost sample.

    Lost samples count in the denominator, so the plateau is the delivered
    fraction.
    """
    arr = _as_latency_array(samples)
    n = arr.size
    if n == 0:
        raise EmptyInput("no samples")
    delivered = arr[np.isfinite(arr)]
    xs, counts = np.unique(delivered, return_counts=True)
    ps = np.cumsum(counts) / n
    return EmpiricalCurve(xs, ps, plateau=delivered.size / n)


def eval_curve(curve: ReliabilityCurve, x, nbytes=0.0):
    """Evaluate any reliability curve at latency ``x`` for an ``nbytes`` packet."""
    return curve(x, nbytes)


def curves_for(profiles: Sequence[InterfaceProfile]) -> list[ParametricCurve]:
    return [ParametricCurve(p) for p in profiles]
