"""Combined latency-reliability of multi-interface transmission strategies.

The weighted evaluation enumerates every loss outcome of the N interfaces
(bit i set means the packet on interface i arrived in time), keeps the
outcomes whose received payload fractions are enough to decode, and sums
their probabilities. Interfaces fail independently.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import DimensionMismatch, DomainError, EmptyInput, EnumerationTooLarge, InvalidK, NotIdentical
from .latency_model import ReliabilityCurve, eval_curve

GAMMA_D = 1.05
MAX_ENUMERATED = 24
# absorbs float error in sums such as 3 * (1/3) or 0.35 + 0.7
DECODE_TOL = 1e-9


@dataclass(frozen=True)
class AllocationVector:
    """Per-interface coded-payload fractions.

    ``gamma_d`` caps each fraction and bounds the total from below for
    feasibility; ``decode_min`` is the received total needed to decode.
    """

    gamma: tuple
    gamma_d: float = GAMMA_D
    decode_min: float = 1.0

    def __post_init__(self):
        g = tuple(float(v) for v in self.gamma)
        if not g:
            raise DimensionMismatch("allocation needs at least one interface")
        for v in g:
            if not 0.0 <= v <= self.gamma_d + DECODE_TOL:
                raise DomainError(f"gamma {v} outside [0, {self.gamma_d}]")
        object.__setattr__(self, "gamma", g)

    def __len__(self):
        return len(self.gamma)

    @property
    def feasible(self) -> bool:
        return sum(self.gamma) >= self.gamma_d - DECODE_TOL


@dataclass(frozen=True)
class Cloning:
    def allocation(self, n: int) -> AllocationVector:
        return AllocationVector((1.0,) * n, decode_min=1.0)

    def __str__(self):
        return "cloning"


@dataclass(frozen=True)
class KofN:
    k: int

    def allocation(self, n: int) -> AllocationVector:
        check_k(self.k, n)
        return AllocationVector((1.0 / self.k,) * n, decode_min=1.0)

    def __str__(self):
        return f"kofn:{self.k}"


@dataclass(frozen=True)
class Weighted:
    alloc: AllocationVector

    def allocation(self, n: int) -> AllocationVector:
        if len(self.alloc) != n:
            raise DimensionMismatch(f"weighted allocation has {len(self.alloc)} entries for {n} interfaces")
        return self.alloc

    def __str__(self):
        return "weighted:" + ",".join(f"{g:.12g}" for g in self.alloc.gamma)


Strategy = Union[Cloning, KofN, Weighted]


def parse_strategy(text: str, decode_min: float = 1.0, gamma_d: float = GAMMA_D) -> Strategy:
    """Parse ``cloning``, ``kofn:K`` or ``weighted:g1,g2,...``."""
    kind, _, arg = text.strip().partition(":")
    kind = kind.lower()
    if kind == "cloning" and not arg:
        return Cloning()
    if kind == "kofn":
        try:
            return KofN(int(arg))
        except ValueError:
            raise DomainError(f"bad k in strategy {text!r}") from None
    if kind == "weighted":
        try:
            gammas = tuple(float(v) for v in arg.split(","))
        except ValueError:
            raise DomainError(f"bad gamma list in strategy {text!r}") from None
        return Weighted(AllocationVector(gammas, gamma_d=gamma_d, decode_min=decode_min))
    raise DomainError(f"unknown strategy {text!r}")


def check_k(k: int, n: int):
    if not 1 <= k <= n:
        raise InvalidK(f"k={k} must satisfy 1 <= k <= N={n}")


def _check_dims(curves, alloc):
    if len(curves) != len(alloc):
        raise DimensionMismatch(f"{len(curves)} curves but {len(alloc)} allocation entries")


def decode_indicator(outcome: int, alloc: AllocationVector) -> int:
    """1 if the fractions on the received interfaces of ``outcome`` reach ``decode_min``."""
    n = len(alloc)
    if not 0 <= outcome < (1 << n):
        raise DimensionMismatch(f"outcome {outcome} does not fit {n} interfaces")
    received = sum(g for i, g in enumerate(alloc.gamma) if outcome >> i & 1)
    return int(received >= alloc.decode_min - DECODE_TOL)


def outcome_probabilities(curves: Sequence[ReliabilityCurve], alloc: AllocationVector, payload_bytes, x):
    """Probability of every loss outcome over the interfaces with nonzero allocation.

    Returns ``(active, probs)`` where ``active`` lists the interface indices
    taking part and ``probs[h]`` is the probability of outcome bitmask ``h``
    (bit j refers to ``active[j]``).
    """
    _check_dims(curves, alloc)
    active = [i for i, g in enumerate(alloc.gamma) if g > 0]
    if len(active) > MAX_ENUMERATED:
        raise EnumerationTooLarge(f"{len(active)} active interfaces exceed the limit of {MAX_ENUMERATED}")
    x = np.asarray(x, dtype=float)
    f = [np.asarray(eval_curve(curves[i], x, alloc.gamma[i] * payload_bytes)) for i in active]
    probs = []
    for h in range(1 << len(active)):
        p = np.ones_like(x)
        for j, fj in enumerate(f):
            p = p * (fj if h >> j & 1 else 1.0 - fj)
        probs.append(p)
    return active, probs


def eval_weighted(curves: Sequence[ReliabilityCurve], alloc: AllocationVector, payload_bytes, x):
    """Reliability at latency ``x`` of the weighted split ``alloc`` of a ``payload_bytes`` message."""
    _check_dims(curves, alloc)
    active = [i for i, g in enumerate(alloc.gamma) if g > 0]
    if len(active) > MAX_ENUMERATED:
        raise EnumerationTooLarge(f"{len(active)} active interfaces exceed the limit of {MAX_ENUMERATED}")
    x = np.asarray(x, dtype=float)
    gam = [alloc.gamma[i] for i in active]
    f = [np.asarray(eval_curve(curves[i], x, alloc.gamma[i] * payload_bytes)) for i in active]
    total = np.zeros_like(x)
    threshold = alloc.decode_min - DECODE_TOL
    for h in range(1 << len(active)):
        if sum(g for j, g in enumerate(gam) if h >> j & 1) < threshold:
            continue
        p = np.ones_like(x)
        for j, fj in enumerate(f):
            p = p * (fj if h >> j & 1 else 1.0 - fj)
        total = total + p
    return total if total.ndim else float(total)


def eval_cloning(curves: Sequence[ReliabilityCurve], payload_bytes, x):
    """Parallel-system reliability when every interface carries the full message."""
    if not curves:
        raise EmptyInput("cloning needs at least one interface")
    x = np.asarray(x, dtype=float)
    miss = np.ones_like(x)
    for c in curves:
        miss = miss * (1.0 - np.asarray(eval_curve(c, x, payload_bytes)))
    out = 1.0 - miss
    return out if out.ndim else float(out)


def eval_k_of_n(curves: Sequence[ReliabilityCurve], k: int, payload_bytes, x):
    """k-of-N splitting: each interface carries 1/k of the message."""
    check_k(k, len(curves))
    return eval_weighted(curves, KofN(k).allocation(len(curves)), payload_bytes, x)


def k_of_n_binomial(p, k: int, n: int):
    """P(at least k of n independent interfaces succeed), each with probability p."""
    check_k(k, n)
    p = np.asarray(p, dtype=float)
    out = sum(math.comb(n, r) * p**r * (1.0 - p) ** (n - r) for r in range(k, n + 1))
    return out if np.ndim(out) else float(out)


def eval_k_of_n_identical(curves: Sequence[ReliabilityCurve], k: int, payload_bytes, x):
    """Binomial closed form of k-of-N; only valid when all curves are the same."""
    check_k(k, len(curves))
    first = curves[0]
    if any(c != first for c in curves[1:]):
        raise NotIdentical("closed-form k-of-N requires identical interfaces")
    p = eval_curve(first, x, payload_bytes / k)
    return k_of_n_binomial(p, k, len(curves))


def eval_strategy(curves: Sequence[ReliabilityCurve], strategy: Strategy, payload_bytes, x):
    if isinstance(strategy, Cloning):
        return eval_cloning(curves, payload_bytes, x)
    if isinstance(strategy, KofN):
        return eval_k_of_n(curves, strategy.k, payload_bytes, x)
    return eval_weighted(curves, strategy.allocation(len(curves)), payload_bytes, x)


def plateau(curves: Sequence[ReliabilityCurve], strategy: Strategy, payload_bytes) -> float:
    return float(eval_strategy(curves, strategy, payload_bytes, math.inf))


def fragment_plan(alloc: AllocationVector, payload_bytes, fragment_size):
    """Coded fragments per interface and the resulting packet size in bytes."""
    if fragment_size <= 0:
        raise DomainError("fragment_size must be positive")
    plan = []
    for g in alloc.gamma:
        # round before ceil so 0.5 * 1500 / 10 stays 75, not 75.00000001
        count = math.ceil(round(g * payload_bytes / fragment_size, 9))
        plan.append((count, count * fragment_size))
    return plan


def decode_latency(latencies: np.ndarray, alloc: AllocationVector) -> np.ndarray:
    """Per-row time at which the delivered packets first become decodable.

    ``latencies`` has one row per message and one column per interface;
    ``inf`` marks a lost packet. Packets are taken in arrival order and their
    fractions accumulated until ``decode_min`` is reached. Rows that never
    decode get ``inf``.
    """
    lat = np.asarray(latencies, dtype=float)
    if lat.ndim != 2 or lat.shape[1] != len(alloc):
        raise DimensionMismatch(f"latency matrix shape {lat.shape} does not match {len(alloc)} interfaces")
    gam = np.asarray(alloc.gamma)
    contrib = np.where(np.isfinite(lat), gam, 0.0)
    order = np.argsort(lat, axis=1, kind="stable")
    lat_sorted = np.take_along_axis(lat, order, axis=1)
    acc = np.cumsum(np.take_along_axis(contrib, order, axis=1), axis=1)
    ok = acc >= alloc.decode_min - DECODE_TOL
    first = np.argmax(ok, axis=1)
    out = lat_sorted[np.arange(lat.shape[0]), first]
    return np.where(ok.any(axis=1), out, np.inf)
