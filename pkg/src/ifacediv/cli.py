"""Command-line front-end: ``ifacediv {evaluate,optimize,split2,playback,mc-check}``.

Latencies are in milliseconds throughout. JSON and CSV numbers carry 12
significant digits so repeated runs give byte-identical files.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .errors import DomainError, IfaceDivError
from .latency_model import curves_for, load_profiles, preset
from .mc_oracle import mc_check
from .optimizer import (
    GridSpec,
    OptimizationTarget,
    analytic_two_split,
    brute_force_optimize,
    expected_latency_targets,
    grid_scan_two_split,
)
from .scenarios import scenario
from .strategy_eval import GAMMA_D, Cloning, KofN, Weighted, eval_strategy, eval_weighted, parse_strategy
from .trace_playback import load_trace, run_playback

log = logging.getLogger("ifacediv")


def _num(v):
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return float(f"{v:.12g}")
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, dict):
        return {k: _num(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_num(x) for x in v]
    return v


def _dumps(doc) -> str:
    return json.dumps(_num(doc), indent=2) + "\n"


def _csv(xs, ys) -> str:
    lines = ["x_ms,reliability"]
    lines += [f"{x:.12g},{y:.12g}" for x, y in zip(xs, ys)]
    return "\n".join(lines) + "\n"


def _emit(text: str, out_dir, filename: str):
    if out_dir is None:
        sys.stdout.write(text)
        return
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / filename).write_text(text)


def _parse_targets(text: str) -> OptimizationTarget:
    lat, w = [], []
    for item in text.split(","):
        try:
            a, b = item.split(":")
            lat.append(float(a))
            w.append(float(b))
        except ValueError:
            raise DomainError(f"bad target {item!r}; expected latency_ms:weight") from None
    return OptimizationTarget(tuple(lat), tuple(w))


def _parse_range(text: str):
    try:
        start, stop, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise DomainError(f"bad grid {text!r}; expected start:stop:step") from None
    if step <= 0 or stop < start:
        raise DomainError("grid needs step > 0 and stop >= start")
    n = int(math.floor((stop - start) / step + 1e-9))
    return start + step * np.arange(n + 1)


class _Config:
    """Interfaces, payload and targets resolved from --preset / --profiles / --interfaces."""

    def __init__(self, args):
        self.preset = None
        self.horizon = None
        if getattr(args, "preset", None):
            self.preset = scenario(args.preset, getattr(args, "include_starred", False))
            self.profiles = self.preset.profiles
            self.payload = self.preset.payload_bytes
            self.target = self.preset.target
            self.horizon = self.preset.horizon_ms
        elif getattr(args, "profiles", None):
            self.profiles = load_profiles(args.profiles)
        elif getattr(args, "interfaces", None):
            self.profiles = [preset(n) for n in args.interfaces.split(",")]
        else:
            raise DomainError("give --preset, --profiles or --interfaces")
        if self.preset is None:
            self.payload = 1500.0
            self.target = None
        if getattr(args, "payload_bytes", None) is not None:
            self.payload = float(args.payload_bytes)
        if getattr(args, "targets", None):
            self.target = _parse_targets(args.targets)
            self.horizon = None
        if getattr(args, "expected_latency", None):
            horizon, points = args.expected_latency.split(":")
            self.target = expected_latency_targets(float(horizon), int(points))
            self.horizon = float(horizon)

    @property
    def names(self):
        return [p.name for p in self.profiles]


def _strategy(text, cfg, args):
    if text.strip().lower() == "optimized":
        if cfg.target is None:
            raise DomainError("strategy 'optimized' needs targets (--preset or --targets)")
        sol = brute_force_optimize(
            curves_for(cfg.profiles), cfg.payload, cfg.target, GridSpec(args.delta_gamma), args.decode_min
        )
        return Weighted(sol.gamma_star)
    s = parse_strategy(text, decode_min=args.decode_min)
    s.allocation(len(cfg.profiles))  # validates k and arity
    return s


def cmd_evaluate(args) -> int:
    cfg = _Config(args)
    strategy = _strategy(args.strategy, cfg, args)
    xs = _parse_range(args.x_grid)
    ys = np.asarray(eval_strategy(curves_for(cfg.profiles), strategy, cfg.payload, xs))
    if args.format == "json":
        doc = {"strategy": str(strategy), "interfaces": cfg.names, "payload_bytes": cfg.payload,
               "x_ms": xs, "reliability": ys,
               "plateau": eval_strategy(curves_for(cfg.profiles), strategy, cfg.payload, math.inf)}
        _emit(_dumps(doc), args.out, "curve.json")
    else:
        _emit(_csv(xs, ys), args.out, "curve.csv")
    return 0


def _comparison(curves, payload, target, n):
    rows = []
    lat = np.asarray(target.latencies)
    for s in [Cloning()] + [KofN(k) for k in range(1, n + 1)]:
        f = eval_strategy(curves, s, payload, lat)
        rows.append({"strategy": str(s), "objective": float(np.dot(f, target.weights)),
                     "reliability_at_targets": np.atleast_1d(f)})
    return rows


def cmd_optimize(args) -> int:
    cfg = _Config(args)
    if cfg.target is None:
        raise DomainError("optimize needs targets: --preset, --targets or --expected-latency")
    curves = curves_for(cfg.profiles)
    started = time.perf_counter()
    sol = brute_force_optimize(curves, cfg.payload, cfg.target, GridSpec(args.delta_gamma), args.decode_min)
    runtime = time.perf_counter() - started
    log.info("optimized in %.2f s over %d allocations", runtime, sol.evaluations)
    lat = np.asarray(cfg.target.latencies)
    f = np.atleast_1d(eval_weighted(curves, sol.gamma_star, cfg.payload, lat))
    top = eval_weighted(curves, sol.gamma_star, cfg.payload, math.inf)
    doc = {
        "interfaces": cfg.names,
        "payload_bytes": cfg.payload,
        "delta_gamma": args.delta_gamma,
        "gamma_d": GAMMA_D,
        "decode_min": args.decode_min,
        "targets": {"latencies_ms": lat, "weights": cfg.target.weights},
        "gamma_star": sol.gamma_star.gamma,
        "objective": sol.objective_value,
        "reliability_at_targets": f,
        "plateau": top,
        "evaluations": sol.evaluations,
        "comparison": _comparison(curves, cfg.payload, cfg.target, len(curves)),
    }
    if cfg.horizon is not None:
        doc["expected_latency"] = _expected_latency_block(cfg, sol, f, top)
    if args.report_runtime:
        doc["runtime_s"] = runtime
    _emit(_dumps(doc), args.out, "optimize.json")
    return 0


def _expected_latency_block(cfg, sol, f, top):
    w = np.asarray(cfg.target.weights)
    truncated = cfg.horizon * (1.0 - float(np.dot(f, w)))
    # conditional on delivery, comparable with the loss-free analytic split
    conditional = cfg.horizon * float(np.dot((top - f) / top, w)) if top > 0 else math.inf
    block = {"truncated_expected_latency_ms": truncated, "expected_latency_ms": conditional}
    if len(cfg.profiles) == 2:
        total = sum(sol.gamma_star.gamma)
        ana = analytic_two_split(cfg.profiles[0], cfg.profiles[1], cfg.payload, total)
        block["analytic_split"] = {"total": total, "gamma": ana.gamma_scalar,
                                   "expected_latency_ms": ana.expected_latency_ms}
        block["relative_gap"] = abs(conditional - ana.expected_latency_ms) / ana.expected_latency_ms
    return block


def cmd_split2(args) -> int:
    cfg = _Config(args)
    if len(cfg.profiles) != 2:
        raise DomainError(f"split2 needs exactly two interfaces, got {len(cfg.profiles)}")
    a, b = cfg.profiles
    sol = analytic_two_split(a, b, cfg.payload, args.total)
    scan_gamma, scan_latency = grid_scan_two_split(a, b, cfg.payload, args.total, args.delta)
    doc = {
        "interfaces": cfg.names,
        "payload_bytes": cfg.payload,
        "total": args.total,
        "gamma": sol.gamma_scalar,
        "expected_latency_ms": sol.expected_latency_ms,
        "xi_ms": sol.xi,
        "degenerate": sol.degenerate,
        "grid_scan_gamma": scan_gamma,
        "grid_scan_expected_latency_ms": scan_latency,
        "delta": args.delta,
    }
    _emit(_dumps(doc), args.out, "split2.json")
    return 0


def cmd_playback(args) -> int:
    traces = [load_trace(p) for p in args.traces]
    n = len(traces)
    texts = args.strategy or (["cloning"] + [f"kofn:{k}" for k in range(1, n + 1)])
    strategies = [parse_strategy(t, decode_min=args.decode_min) for t in texts]
    for s in strategies:
        s.allocation(n)
    rep = run_playback(traces, strategies)
    doc = {"interfaces": rep.interfaces, "n_probes": rep.n_probes, "dropped_records": rep.dropped,
           "strategies": {}}
    for name in rep.empirical:
        emp, pred = rep.empirical[name], rep.predicted[name]
        entry = {"ks": rep.ks[name]}
        slug = name.replace(":", "-").replace(",", "_")
        # full curves are long (one point per distinct latency), so they live in CSVs only
        for kind, curve in (("playback", emp), ("predicted", pred)):
            filename = f"{slug}_{kind}.csv" if args.out is not None else None
            entry[kind] = {"plateau": curve.plateau, "n_points": len(curve.xs), "csv": filename}
            if filename:
                _emit(_csv(curve.xs, curve.ps), args.out, filename)
        doc["strategies"][name] = entry
    _emit(_dumps(doc), args.out, "playback.json")
    return 0


def cmd_mc_check(args) -> int:
    cfg = _Config(args)
    strategy = _strategy(args.strategy, cfg, args)
    res = mc_check(cfg.profiles, strategy, cfg.payload, args.trials, args.seed, n_probes=args.probes)
    doc = {
        "interfaces": cfg.names,
        "payload_bytes": cfg.payload,
        "strategy": str(strategy),
        "n_trials": args.trials,
        "seed": args.seed,
        "probes_ms": res.probes,
        "analytic": res.analytic,
        "simulated": res.simulated,
        "bound": res.bound,
        "max_abs_deviation": res.max_abs_deviation,
        "pass": res.passed,
    }
    _emit(_dumps(doc), args.out, "mc_check.json")
    return 0


def _add_config(p, targets=False):
    src = p.add_mutually_exclusive_group()
    src.add_argument("--preset", choices=["A", "B", "C"], type=str.upper)
    src.add_argument("--profiles", help="JSON file with interface profiles")
    src.add_argument("--interfaces", help="comma-separated preset interface names, e.g. UMTS,GPRS")
    p.add_argument("--payload-bytes", type=float)
    p.add_argument("--decode-min", type=float, default=1.0)
    p.add_argument("--out", help="write output files into this directory instead of stdout")
    if targets:
        p.add_argument("--targets", help="latency_ms:weight pairs, e.g. 100:1,400:10")
        p.add_argument("--expected-latency", metavar="HORIZON:POINTS",
                       help="targets approximating expected latency up to HORIZON ms")
        p.add_argument("--include-starred", action="store_true",
                       help="scenario B: add the (900 ms, 100) target")
        p.add_argument("--delta-gamma", type=float, default=0.05)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ifacediv", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evaluate", help="latency-reliability curve of one strategy")
    _add_config(p)
    p.add_argument("--strategy", required=True, help="cloning | kofn:K | weighted:g1,g2,...")
    p.add_argument("--x-grid", default="0:1000:10", help="start:stop:step in ms")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("optimize", help="grid search for the best payload allocation")
    _add_config(p, targets=True)
    p.add_argument("--report-runtime", action="store_true",
                   help="include wall-clock runtime (makes output non-reproducible)")
    p.add_argument("--format", choices=["json"], default="json")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("split2", help="closed-form two-interface split")
    _add_config(p)
    p.add_argument("--total", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=0.001, help="step of the comparison grid scan")
    p.add_argument("--format", choices=["json"], default="json")
    p.set_defaults(func=cmd_split2)

    p = sub.add_parser("playback", help="replay traces and compare with prediction")
    p.add_argument("traces", nargs="+")
    p.add_argument("--strategy", action="append", help="repeatable; default cloning and every k-of-N")
    p.add_argument("--decode-min", type=float, default=1.0)
    p.add_argument("--out")
    p.add_argument("--format", choices=["json"], default="json")
    p.set_defaults(func=cmd_playback)

    p = sub.add_parser("mc-check", help="Monte Carlo check of the analytic curve")
    _add_config(p, targets=True)
    p.add_argument("--strategy", required=True, help="cloning | kofn:K | weighted:... | optimized")
    p.add_argument("--trials", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--probes", type=int, default=20)
    p.add_argument("--format", choices=["json"], default="json")
    p.set_defaults(func=cmd_mc_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except IfaceDivError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: IoError: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
