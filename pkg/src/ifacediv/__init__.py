"""Latency-reliability of multi-interface transmission: evaluate, optimize, validate."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .latency_model import (
    LOST,
    PRESETS,
    EmpiricalCurve,
    InterfaceProfile,
    ParametricCurve,
    curves_for,
    empirical_from_samples,
    eval_curve,
    eval_parametric,
    load_profiles,
    mean_latency,
)
from .strategy_eval import (
    AllocationVector,
    Cloning,
    KofN,
    Weighted,
    decode_indicator,
    eval_cloning,
    eval_k_of_n,
    eval_strategy,
    eval_weighted,
    fragment_plan,
    k_of_n_binomial,
    parse_strategy,
)
from .optimizer import (
    GridSpec,
    OptimizationTarget,
    analytic_two_split,
    brute_force_optimize,
    expected_latency_targets,
    expected_max_latency,
    inverse_normal_cdf,
    objective,
)
from .mc_oracle import SimConfig, mc_check, simulate_strategy
from .trace_playback import Trace, align, ks_distance, load_trace, playback, predict_from_marginals, run_playback
from .scenarios import scenario
