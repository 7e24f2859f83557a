"""Seeded Monte-Carlo sweeps comparing estimates with fine-grid ground truth."""
from __future__ import annotations

import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from functools import lru_cache

import numpy as np

from .densities import PRESETS, Density, make_density, oracle_diagram, oracle_modes, sample
from .metrics import bottleneck, matching_distance
from .modes import CalibrationWarning, EstimatorConfig, estimate_modes
from .persistence import PersistenceDiagram


def trial_seed(seed: int, n: int, trial: int) -> int:
    """Sampling seed for one trial, a pure function of (seed, n, trial)."""
    ss = np.random.SeedSequence(seed, spawn_key=(n, trial))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class ExperimentResult:
    density: str
    n: int
    trial: int
    seed: int
    h: float
    mu: float
    alpha: float
    threshold: float
    adaptive: bool
    k_hat: int
    bottleneck_error: float
    mode_error: float
    value_error: float
    wall_time: float

    @classmethod
    def columns(cls, timing: bool = True) -> list[str]:
        names = [f.name for f in fields(cls)]
        return names if timing else [c for c in names if c != "wall_time"]


@dataclass(frozen=True)
class Truth:
    diagram: PersistenceDiagram
    modes: np.ndarray
    values: np.ndarray


@lru_cache(maxsize=16)
def _cached_density(name: str, params: tuple) -> Density:
    return make_density(name, **dict(params))


def ground_truth(spec: Density, fine_m: int) -> Truth:
    modes, values = oracle_modes(spec)
    return Truth(oracle_diagram(spec, fine_m).diagram, modes, values)


def mode_errors(locations, values, truth: Truth) -> tuple[float, float]:
    """Matching distance between mode sets and the largest value error along that matching."""
    dist, pairs = matching_distance(locations, truth.modes, dim=truth.modes.shape[1], return_matching=True)
    worst = 0.0
    for i, j in pairs:
        if j < len(truth.values):
            est = values[i] if i < len(values) else 0.0
            worst = max(worst, abs(est - truth.values[j]))
    return dist, worst


def run_trial(name: str, params: tuple, n: int, trial: int, seed: int, config: EstimatorConfig,
              truth: Truth) -> ExperimentResult:
    spec = _cached_density(name, params)
    start = time.perf_counter()
    s = trial_seed(seed, n, trial)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CalibrationWarning)
        est = estimate_modes(sample(spec, n, s), config)
    elapsed = time.perf_counter() - start
    d_m, d_val = mode_errors(est.locations, est.values, truth)
    return ExperimentResult(
        density=name,
        n=n,
        trial=trial,
        seed=s,
        h=est.diagram.grid.h,
        mu=config.mu,
        alpha=config.alpha,
        threshold=est.threshold_used,
        adaptive=est.adaptive,
        k_hat=est.k_hat,
        bottleneck_error=bottleneck(est.diagram, truth.diagram),
        mode_error=d_m,
        value_error=d_val,
        wall_time=elapsed,
    )


def default_config(name: str, **overrides) -> EstimatorConfig:
    preset = PRESETS[name]
    base = dict(alpha=preset.alpha, mu=preset.mu, h_const=preset.h_const)
    base.update({k: v for k, v in overrides.items() if v is not None})
    return EstimatorConfig(**base)


def sweep(name: str, n_list, trials: int, seed: int, config: EstimatorConfig | None = None,
          params: dict | None = None, fine_m: int | None = None, workers: int = 1) -> list[ExperimentResult]:
    """One result per (n, trial), ordered by (n, trial) whatever the worker count."""
    params_key = tuple(sorted((params or {}).items()))
    spec = _cached_density(name, params_key)
    config = config or default_config(name)
    truth = ground_truth(spec, fine_m or PRESETS[name].fine_m)
    jobs = [(name, params_key, int(n), t, seed, config, truth) for n in n_list for t in range(trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_trial, *zip(*jobs)))
    else:
        results = [run_trial(*job) for job in jobs]
    return sorted(results, key=lambda r: (r.n, r.trial))


def rate_summary(results: list[ExperimentResult]) -> dict:
    """Median bottleneck error per n and the log-log slope against log(n)/n."""
    ns = sorted({r.n for r in results})
    medians = [float(np.median([r.bottleneck_error for r in results if r.n == n])) for n in ns]
    summary = {
        "n": ns,
        "median_bottleneck_error": medians,
        "non_increasing": all(b <= a for a, b in zip(medians, medians[1:])),
        "slope": None,
    }
    if len(ns) >= 2 and all(m > 0 for m in medians):
        x = np.log([math.log(n) / n for n in ns])
        summary["slope"] = float(np.polyfit(x, np.log(medians), 1)[0])
    return summary
