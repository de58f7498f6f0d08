"""Evaluation scenarios A, B and C with their interfaces and targets."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import DomainError
from .latency_model import PRESETS, InterfaceProfile
from .optimizer import OptimizationTarget, expected_latency_targets

EXPECTED_LATENCY_HORIZON_MS = 1000.0
EXPECTED_LATENCY_POINTS = 100


@dataclass(frozen=True)
class ScenarioPreset:
    id: str
    interfaces: tuple
    payload_bytes: float
    target: OptimizationTarget
    # set when the targets approximate expected latency up to this horizon
    horizon_ms: Optional[float] = None

    @property
    def profiles(self) -> list[InterfaceProfile]:
        return [PRESETS[name] for name in self.interfaces]


def scenario(name: str, include_starred: bool = False) -> ScenarioPreset:
    """Scenario preset by id; ``include_starred`` adds B's (0.9 s, 100) target."""
    key = name.upper()
    if key == "A":
        return ScenarioPreset(
            "A",
            ("UMTS", "GPRS"),
            1500.0,
            expected_latency_targets(EXPECTED_LATENCY_HORIZON_MS, EXPECTED_LATENCY_POINTS),
            horizon_ms=EXPECTED_LATENCY_HORIZON_MS,
        )
    if key == "B":
        lat, w = (100.0, 400.0), (1.0, 10.0)
        if include_starred:
            lat, w = lat + (900.0,), w + (100.0,)
        return ScenarioPreset("B", ("LTE", "HSDPA", "UMTS", "EDGE", "GPRS"), 1500.0, OptimizationTarget(lat, w))
    if key == "C":
        return ScenarioPreset(
            "C", ("HSDPA", "HSDPA", "GPRS", "GPRS", "GPRS"), 1500.0, OptimizationTarget((500.0,), (1.0,))
        )
    raise DomainError(f"unknown scenario {name!r}; choose A, B or C")
