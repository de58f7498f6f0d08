"""Payload-allocation optimization.

Two solvers live here: an exhaustive grid search over allocation vectors
maximizing weighted reliability at target latencies, and a closed-form
two-interface split that minimizes the expected decode latency using
Clark's approximation of E[max(X_A, X_B)] for independent Gaussians.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.special import ndtr, ndtri

from ._parallel import ordered_map
from .errors import DimensionMismatch, DomainError, EnumerationTooLarge, InfeasibleGrid
from .latency_model import InterfaceProfile, ReliabilityCurve, eval_curve, mean_latency
from .strategy_eval import DECODE_TOL, GAMMA_D, MAX_ENUMERATED, AllocationVector, eval_weighted

log = logging.getLogger(__name__)

# Objective values this close to the maximum count as ties.
TIE_TOL = 1e-12
# Above this many grid points the objective is recomputed rather than cached.
CACHE_LIMIT = 10_000_000
MAX_GRID_POINTS = 1 << 28


@dataclass(frozen=True)
class OptimizationTarget:
    """Target latencies (ms) and the importance of reliability at each."""

    latencies: tuple
    weights: tuple

    def __post_init__(self):
        lat = tuple(float(v) for v in self.latencies)
        w = tuple(float(v) for v in self.weights)
        if len(lat) != len(w) or not lat:
            raise DimensionMismatch("latencies and weights must be nonempty and of equal length")
        if any(b <= a for a, b in zip(lat, lat[1:])):
            raise DomainError("target latencies must be strictly increasing")
        if any(v <= 0 for v in w):
            raise DomainError("target weights must be positive")
        object.__setattr__(self, "latencies", lat)
        object.__setattr__(self, "weights", w)

    def __len__(self):
        return len(self.latencies)


@dataclass(frozen=True)
class GridSpec:
    delta_gamma: float = 0.05
    gamma_d: float = GAMMA_D

    def __post_init__(self):
        if not 0 < self.delta_gamma <= self.gamma_d:
            raise DomainError(f"delta_gamma must lie in (0, {self.gamma_d}]")

    def values(self) -> np.ndarray:
        """Per-interface grid ``0, d, 2d, ...`` ending exactly at ``gamma_d``."""
        steps = int(math.floor(self.gamma_d / self.delta_gamma + 1e-9))
        vals = np.arange(steps + 1) * self.delta_gamma
        if abs(vals[-1] - self.gamma_d) <= 1e-9:
            vals[-1] = self.gamma_d
        else:
            vals = np.append(vals, self.gamma_d)
        return vals


@dataclass
class SplitSolution:
    gamma_star: AllocationVector
    objective_value: float
    evaluations: int
    gamma_scalar: Optional[float] = None
    expected_latency_ms: Optional[float] = None
    xi: Optional[float] = None
    degenerate: bool = False
    extra: dict = field(default_factory=dict)


def objective(curves: Sequence[ReliabilityCurve], alloc: AllocationVector, payload_bytes, target: OptimizationTarget) -> float:
    """Weighted sum of reliabilities at the target latencies."""
    f = eval_weighted(curves, alloc, payload_bytes, np.asarray(target.latencies))
    return float(np.dot(f, target.weights))


def expected_latency_targets(horizon_ms: float, points: int) -> OptimizationTarget:
    """Uniform latency grid whose objective is a Riemann sum of E[min(X, horizon)].

    ``horizon * (1 - objective)`` approximates the expected latency with lost
    messages charged the full horizon.
    """
    if points < 2 or horizon_ms <= 0:
        raise DomainError("need points >= 2 and horizon > 0")
    lat = tuple(horizon_ms * r / points for r in range(1, points + 1))
    return OptimizationTarget(lat, (1.0 / points,) * points)


class _GridProblem:
    """Objective tensor over the allocation grid, sliced by the first interface's index."""

    def __init__(self, curves, payload_bytes, target, vals, gamma_d, decode_min):
        self.n = len(curves)
        self.vals = vals
        self.decode_min = decode_min
        self.gamma_d = gamma_d
        self.weights = np.asarray(target.weights)
        lat = np.asarray(target.latencies)[:, None]
        # tables[i][r, g] = F_i(l_r, vals[g] * B)
        self.tables = [np.asarray(eval_curve(c, lat, vals[None, :] * payload_bytes), dtype=float) for c in curves]
        g = len(vals)
        self.rest_shape = (g,) * (self.n - 1)

    def _axis(self, arr, i):
        # place the last axis of ``arr`` on grid axis i of the remaining interfaces
        shape = [1] * (self.n - 1)
        shape[i - 1] = arr.shape[-1]
        return arr.reshape(arr.shape[:-1] + tuple(shape))

    def sums(self, g0):
        s = np.full(self.rest_shape, self.vals[g0])
        for i in range(1, self.n):
            s = s + self._axis(self.vals, i)
        return s

    def chunk(self, g0):
        """Objective for every allocation whose first entry is vals[g0]; -inf where infeasible."""
        n, R = self.n, len(self.weights)
        obj = np.zeros(self.rest_shape)
        thresh = self.decode_min - DECODE_TOL
        for h in range(1 << n):
            recv = np.full(self.rest_shape, self.vals[g0] if h & 1 else 0.0)
            for i in range(1, n):
                if h >> i & 1:
                    recv = recv + self._axis(self.vals, i)
            dec = recv >= thresh
            if not dec.any():
                continue
            t0 = self.tables[0][:, g0]
            prod = (t0 if h & 1 else 1.0 - t0).reshape((R,) + (1,) * (n - 1))
            for i in range(1, n):
                t = self.tables[i]
                prod = prod * self._axis(t if h >> i & 1 else 1.0 - t, i)
            prod = np.broadcast_to(prod, (R,) + self.rest_shape)
            obj += np.where(dec, np.tensordot(self.weights, prod, axes=1), 0.0)
        feasible = self.sums(g0) >= self.gamma_d - DECODE_TOL
        return np.where(feasible, obj, -np.inf)


def brute_force_optimize(
    curves: Sequence[ReliabilityCurve],
    payload_bytes,
    target: OptimizationTarget,
    grid: GridSpec = GridSpec(),
    decode_min: float = 1.0,
    threads: Optional[int] = None,
) -> SplitSolution:
    """Exhaustive search of the allocation grid for the best feasible allocation.

    Ties (objective within ``TIE_TOL`` of the best) go to the smallest total
    allocation, then to the lexicographically smallest vector. The result
    does not depend on the number of worker threads.
    """
    n = len(curves)
    if n < 1:
        raise DimensionMismatch("need at least one interface")
    if n > MAX_ENUMERATED:
        raise EnumerationTooLarge(f"{n} interfaces exceed the limit of {MAX_ENUMERATED}")
    vals = grid.values()
    g = len(vals)
    total_points = g**n
    if total_points > MAX_GRID_POINTS:
        raise EnumerationTooLarge(f"grid of {g}^{n} allocations exceeds the search budget")
    prob = _GridProblem(curves, payload_bytes, target, vals, grid.gamma_d, decode_min)
    g0s = range(g)
    cached = total_points <= CACHE_LIMIT
    if cached:
        chunks = ordered_map(prob.chunk, g0s, threads)
        maxima = [float(c.max()) for c in chunks]
    else:
        maxima = ordered_map(lambda i: float(prob.chunk(i).max()), g0s, threads)
    best = max(maxima)
    if best == -np.inf:
        raise InfeasibleGrid("no grid point satisfies sum(gamma) >= gamma_d")
    cutoff = best - TIE_TOL * max(1.0, abs(best))

    def pick(g0):
        if maxima[g0] < cutoff:
            return None
        obj = chunks[g0] if cached else prob.chunk(g0)
        flat = np.flatnonzero(obj.ravel() >= cutoff)
        sums = np.round(prob.sums(g0).ravel()[flat], 9)
        # flat C-order is lexicographic in the remaining indices
        j = flat[np.argmin(sums)]
        return (float(sums.min()), g0) + tuple(int(v) for v in np.unravel_index(j, prob.rest_shape))

    picks = [p for p in ordered_map(pick, g0s, threads) if p is not None]
    winner = min(picks)
    idx = winner[1:]
    alloc = AllocationVector(tuple(float(vals[i]) for i in idx), gamma_d=grid.gamma_d, decode_min=decode_min)
    feasible = sum(int(np.count_nonzero(prob.sums(i) >= grid.gamma_d - DECODE_TOL)) for i in g0s)
    value = objective(curves, alloc, payload_bytes, target)
    log.debug("grid search: %d feasible of %d, best %.12g at %s", feasible, total_points, value, alloc.gamma)
    return SplitSolution(gamma_star=alloc, objective_value=value, evaluations=feasible)


def inverse_normal_cdf(p: float) -> float:
    """Standard normal quantile."""
    if not 0.0 < p < 1.0:
        raise DomainError(f"probability {p} outside (0, 1)")
    return float(ndtri(p))


def _phi(z):
    return math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)


def expected_max_latency(mu_a: float, sigma_a: float, mu_b: float, sigma_b: float) -> float:
    """Clark's E[max(X_A, X_B)] for independent Gaussians."""
    xi = math.hypot(sigma_a, sigma_b)
    if xi == 0:
        return max(mu_a, mu_b)
    eta = (mu_a - mu_b) / xi
    return mu_a * float(ndtr(eta)) + mu_b * float(ndtr(-eta)) + xi * _phi(eta)


def _split_latency(a, b, payload_bytes, total, gamma, xi=None):
    mu_a = mean_latency(a, gamma * payload_bytes)
    mu_b = mean_latency(b, (total - gamma) * payload_bytes)
    if xi is None:
        return expected_max_latency(mu_a, a.sigma_ratio * mu_a, mu_b, b.sigma_ratio * mu_b)
    return expected_max_latency(mu_a, xi / math.sqrt(2.0), mu_b, xi / math.sqrt(2.0))


def split_latency(a: InterfaceProfile, b: InterfaceProfile, payload_bytes, total: float, gamma: float, xi: Optional[float] = None) -> float:
    """Expected decode latency when A carries ``gamma`` and B ``total - gamma`` of the message.

    With ``xi`` given, the combined spread is held at that value; otherwise
    each side uses its own size-dependent sigma.
    """
    return _split_latency(a, b, payload_bytes, total, gamma, xi)


def analytic_two_split(a: InterfaceProfile, b: InterfaceProfile, payload_bytes, total: float = 1.0) -> SplitSolution:
    """Closed-form fraction for interface A minimizing expected decode latency.

    The spread ``xi`` is evaluated once at the even split and held fixed.
    """
    if not 0 < total <= 2 * GAMMA_D + DECODE_TOL:
        raise DomainError(f"total {total} outside (0, {2 * GAMMA_D}]")
    half = total / 2.0
    mu_a0 = mean_latency(a, half * payload_bytes)
    mu_b0 = mean_latency(b, half * payload_bytes)
    xi = math.hypot(a.sigma_ratio * mu_a0, b.sigma_ratio * mu_b0)
    slope = (a.alpha + b.alpha) * payload_bytes
    degenerate = slope == 0
    if degenerate:
        log.warning("no size dependence on either interface; using the even split")
        gamma = half
    elif a.alpha == 0:
        gamma = total  # A's latency does not grow with payload
    elif b.alpha == 0:
        gamma = 0.0
    else:
        asum = a.alpha + b.alpha
        base = (b.alpha * payload_bytes * total + b.beta - a.beta) / slope
        mu_a = mean_latency(a, base * payload_bytes)
        mu_b = mean_latency(b, (total - base) * payload_bytes)
        if mu_a >= mu_b:
            gamma = base - 2.0 * xi * inverse_normal_cdf(a.alpha / asum) / slope
        else:
            gamma = base + 2.0 * xi * inverse_normal_cdf(b.alpha / asum) / slope
    gamma = min(max(gamma, 0.0), total)
    expected = _split_latency(a, b, payload_bytes, total, gamma)
    alloc = AllocationVector((min(gamma, GAMMA_D), min(total - gamma, GAMMA_D)), decode_min=min(total, 1.0))
    return SplitSolution(
        gamma_star=alloc,
        objective_value=-expected,
        evaluations=1,
        gamma_scalar=gamma,
        expected_latency_ms=expected,
        xi=xi,
        degenerate=degenerate,
    )


def grid_scan_two_split(a: InterfaceProfile, b: InterfaceProfile, payload_bytes, total: float = 1.0, delta: float = 0.001, xi: Optional[float] = None):
    """Brute-force minimizer of the expected split latency on a ``delta`` grid.

    Returns ``(gamma, expected_latency_ms)``.
    """
    steps = int(round(total / delta))
    gammas = np.linspace(0.0, total, steps + 1)
    lat = [_split_latency(a, b, payload_bytes, total, float(g), xi) for g in gammas]
    i = int(np.argmin(lat))
    return float(gammas[i]), float(lat[i])
