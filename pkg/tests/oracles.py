"""Independent reference computations used to check the library.

Nothing here calls the library's enumeration, decode or quantile code.
"""
import itertools
import math

import numpy as np


def std_normal_cdf(z):
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def bisect_quantile(p, lo=-40.0, hi=40.0, iters=200):
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if std_normal_cdf(mid) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def gaussian_reliability(alpha, beta, p_succ, sigma_ratio, nbytes, x):
    mu = (alpha * nbytes + beta) / 2.0
    return p_succ * std_normal_cdf((x - mu) / (sigma_ratio * mu))


def recursive_weighted(fvals, gammas, decode_min, tol=1e-9):
    """Expand interface by interface: received with prob F, lost with 1-F."""

    def go(i, received):
        if i == len(fvals):
            return 1.0 if received >= decode_min - tol else 0.0
        return fvals[i] * go(i + 1, received + gammas[i]) + (1.0 - fvals[i]) * go(i + 1, received)

    return go(0, 0.0)


def subset_decode_time(latencies, gammas, decode_min, tol=1e-9):
    """Min over decodable subsets of delivered packets of the subset's last arrival."""
    best = math.inf
    idx = [i for i, v in enumerate(latencies) if math.isfinite(v)]
    for r in range(1, len(idx) + 1):
        for sub in itertools.combinations(idx, r):
            if sum(gammas[i] for i in sub) >= decode_min - tol:
                best = min(best, max(latencies[i] for i in sub))
    return best


def mc_expected_max(mu_a, s_a, mu_b, s_b, n, seed):
    rng = np.random.default_rng(seed)
    return float(np.maximum(rng.normal(mu_a, s_a, n), rng.normal(mu_b, s_b, n)).mean())


def recount_cdf(samples, x):
    return sum(1 for s in samples if s is not None and s <= x) / len(samples)
