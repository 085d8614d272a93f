"""
Latency measurement helpers.
"""
import time
from dataclasses import dataclass
from typing import Any, Callable, Dict, List

import numpy as np

from src.core.errors import ConfigError

MIN_REPS = 10


@dataclass(frozen=True)
class LatencyStats:
    """Per-call latency of one measured callable, in nanoseconds."""

    name: str
    reps: int
    median_ns: float
    p90_ns: float
    min_ns: float
    mean_ns: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "reps": self.reps,
            "median_ns": self.median_ns,
            "p90_ns": self.p90_ns,
            "min_ns": self.min_ns,
            "mean_ns": self.mean_ns,
        }


def time_callable(name: str, func: Callable[[], Any], reps: int, warmup: int = 2) -> LatencyStats:
    """
    Time ``func`` over ``reps`` calls after ``warmup`` untimed calls.

    Raises:
        ConfigError: reps < MIN_REPS or warmup < 0
    """
    if reps < MIN_REPS:
        raise ConfigError(f"Benchmarks need at least {MIN_REPS} repetitions, got {reps}")
    if warmup < 0:
        raise ConfigError(f"warmup must be non-negative, got {warmup}")

    for _ in range(warmup):
        func()
    samples: List[int] = []
    for _ in range(reps):
        start = time.perf_counter_ns()
        func()
        samples.append(time.perf_counter_ns() - start)

    values = np.asarray(samples, dtype=np.float64)
    return LatencyStats(
        name=name,
        reps=reps,
        median_ns=float(np.median(values)),
        p90_ns=float(np.percentile(values, 90)),
        min_ns=float(values.min()),
        mean_ns=float(values.mean()),
    )


def format_dt(dt: float, sign: bool = False) -> str:
    """Format a duration in seconds with a unit matching its magnitude."""
    prefix = "+" if sign else ""
    if abs(dt) > 10e-3:
        return f"{dt * 1e3:{prefix}.1f} ms"
    if abs(dt) > 10e-6:
        return f"{dt * 1e6:{prefix}.1f} us"
    return f"{dt * 1e9:{prefix}.0f} ns"


def format_table(stats: List[LatencyStats]) -> str:
    """Latency table, one row per measured callable."""
    width = max([len("pipeline")] + [len(s.name) for s in stats])
    lines = [f"{'pipeline':<{width}}  {'median':>10}  {'p90':>10}  {'median ns':>14}"]
    for s in stats:
        lines.append(
            f"{s.name:<{width}}  {format_dt(s.median_ns * 1e-9):>10}  "
            f"{format_dt(s.p90_ns * 1e-9):>10}  {s.median_ns:>14.0f}"
        )
    return "\n".join(lines)
