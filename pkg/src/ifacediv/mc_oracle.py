"""Monte Carlo simulation of multi-interface transmissions.

Used as an independent check on the analytic evaluations: per trial, every
interface carrying payload independently either loses its packet or
delivers it after a Gaussian latency, and the message latency is the first
instant at which the delivered packets can be decoded.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from ._parallel import ordered_map
from .errors import DimensionMismatch, DomainError
from .latency_model import EmpiricalCurve, InterfaceProfile, curves_for, empirical_from_samples, mean_latency
from .strategy_eval import Strategy, decode_latency, eval_strategy

BATCH = 1 << 17


@dataclass(frozen=True)
class SimConfig:
    profiles: tuple
    strategy: Strategy
    payload_bytes: float
    n_trials: int
    seed: int = 0

    def __post_init__(self):
        if self.n_trials < 1:
            raise DomainError("n_trials must be >= 1")
        object.__setattr__(self, "profiles", tuple(self.profiles))


def draw_latencies(rng, profile: InterfaceProfile, nbytes: float, n: int) -> np.ndarray:
    """``n`` packet latencies (ms, ``inf`` if lost); negative draws are resampled."""
    mu = mean_latency(profile, nbytes)
    sigma = profile.sigma_ratio * mu
    delivered = rng.random(n) < profile.p_succ
    lat = rng.normal(mu, sigma, n)
    neg = lat < 0
    while neg.any():
        lat[neg] = rng.normal(mu, sigma, int(neg.sum()))
        neg = lat < 0
    return np.where(delivered, lat, np.inf)


def simulate_packets(config: SimConfig, threads: Optional[int] = None) -> np.ndarray:
    """Per-trial, per-interface packet latency in ms (``inf`` if lost or not sent).

    Trials run in fixed-size batches, each seeded from ``(seed, batch index)``,
    so the output is identical for any thread count.
    """
    n_if = len(config.profiles)
    alloc = config.strategy.allocation(n_if)
    if len(alloc) != n_if:
        raise DimensionMismatch("strategy arity does not match the number of profiles")

    def run(batch):
        start = batch * BATCH
        n = min(BATCH, config.n_trials - start)
        rng = np.random.default_rng(np.random.SeedSequence([config.seed, batch]))
        lat = np.full((n, n_if), np.inf)
        for i, (prof, g) in enumerate(zip(config.profiles, alloc.gamma)):
            if g > 0:
                lat[:, i] = draw_latencies(rng, prof, g * config.payload_bytes, n)
        return lat

    n_batches = -(-config.n_trials // BATCH)
    return np.concatenate(ordered_map(run, range(n_batches), threads))


def simulate_latencies(config: SimConfig, threads: Optional[int] = None) -> np.ndarray:
    """Per-trial message latency in ms (``inf`` when never decodable)."""
    packets = simulate_packets(config, threads)
    return decode_latency(packets, config.strategy.allocation(len(config.profiles)))


def simulate_strategy(config: SimConfig, threads: Optional[int] = None) -> EmpiricalCurve:
    return empirical_from_samples(simulate_latencies(config, threads))


def binomial_bound(p, n_trials: int, n_sigma: float = 3.0):
    """Allowed |simulated - analytic| at analytic probability ``p``.

    ``n_sigma`` binomial standard deviations plus one count of slack
    (1/n) for the discreteness of the simulated fraction.
    """
    p = np.asarray(p, dtype=float)
    return n_sigma * np.sqrt(p * (1.0 - p) / n_trials) + 1.0 / n_trials


def probe_latencies(analytic: Callable, top: float, count: int = 20, lo: float = 0.01, hi: float = 0.999) -> np.ndarray:
    """Latencies where ``analytic`` reaches evenly spaced fractions of ``top``.

    Found by bisection; ``analytic`` must be nondecreasing.
    """
    levels = np.linspace(lo, hi, count) * top
    upper = 1.0
    while analytic(upper) < levels[-1] and upper < 1e9:
        upper *= 2.0
    out = []
    for level in levels:
        a, b = 0.0, upper
        for _ in range(80):
            m = 0.5 * (a + b)
            if analytic(m) < level:
                a = m
            else:
                b = m
        out.append(b)
    return np.asarray(out)


@dataclass
class MCCheck:
    probes: np.ndarray
    analytic: np.ndarray
    simulated: np.ndarray
    bound: np.ndarray
    n_trials: int

    @property
    def deviations(self) -> np.ndarray:
        return np.abs(self.simulated - self.analytic)

    @property
    def max_abs_deviation(self) -> float:
        return float(self.deviations.max())

    @property
    def passed(self) -> bool:
        return bool(np.all(self.deviations <= self.bound))


def mc_check(
    profiles: Sequence[InterfaceProfile],
    strategy: Strategy,
    payload_bytes: float,
    n_trials: int,
    seed: int = 0,
    analytic: Optional[Callable] = None,
    n_probes: int = 20,
    threads: Optional[int] = None,
) -> MCCheck:
    """Compare the analytic strategy curve against simulation at ``n_probes`` latencies.

    ``analytic`` defaults to the exact enumeration; pass another callable
    ``x -> F(x)`` to check (or deliberately corrupt) a different model.
    """
    curves = curves_for(profiles)
    exact = lambda x: eval_strategy(curves, strategy, payload_bytes, x)
    if analytic is None:
        analytic = exact
    top = float(exact(np.inf))
    probes = probe_latencies(exact, top, n_probes) if top > 0 else np.linspace(0.0, 1000.0, n_probes)
    sim = simulate_strategy(SimConfig(tuple(profiles), strategy, payload_bytes, n_trials, seed), threads)
    f = np.asarray(analytic(probes), dtype=float)
    return MCCheck(probes, f, np.asarray(sim(probes)), binomial_bound(f, n_trials), n_trials)
