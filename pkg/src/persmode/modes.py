"""Grid calibration and mode estimators built on the thickened-histogram diagram."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .grid import CellField, GridSpec, build_grid, build_histogram, dilate_max, dilation_radius
from .persistence import PersistenceDiagram, superlevel_diagram


class CalibrationWarning(UserWarning):
    """The chosen h violates h > sqrt(log(1/h^d) / (n h^d))."""


@dataclass(frozen=True)
class EstimatorConfig:
    alpha: float = 0.5
    mu: float = 1.0
    h_const: float = 1.0
    h_override: float | None = None
    l_known: float | None = None
    dilation: int | None = None  # overrides ceil(sqrt(d)/mu) when set

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not 0 < self.mu <= 1:
            raise ValueError(f"mu must lie in (0, 1], got {self.mu}")
        if not self.h_const > 0:
            raise ValueError(f"h_const must be positive, got {self.h_const}")
        if self.h_override is not None and not 0 < self.h_override <= 0.5:
            raise ValueError(f"h must lie in (0, 1/2], got {self.h_override}")
        if self.l_known is not None and not self.l_known > 0:
            raise ValueError(f"l must be positive, got {self.l_known}")
        if self.dilation is not None and self.dilation < 0:
            raise ValueError(f"dilation radius must be >= 0, got {self.dilation}")


@dataclass(frozen=True)
class Calibration:
    h: float
    cells_per_axis: int
    target: float
    bound_ok: bool  # h > sqrt(log(1/h^d) / (n h^d))


@dataclass(frozen=True)
class Mode:
    location: np.ndarray
    value: float
    lifetime: float
    birth_cell: int
    location_cell: int = -1


@dataclass(frozen=True)
class ModeEstimate:
    modes: tuple[Mode, ...]
    threshold_used: float
    diagram: PersistenceDiagram = field(repr=False)
    adaptive: bool = False

    @property
    def k_hat(self) -> int:
        return len(self.modes)

    @property
    def locations(self) -> np.ndarray:
        dim = self.diagram.grid.dim if self.diagram.grid else 1
        return np.array([m.location for m in self.modes], dtype=float).reshape(-1, dim)

    @property
    def values(self) -> np.ndarray:
        return np.array([m.value for m in self.modes], dtype=float)


def snap_cells(h: float) -> int:
    """Number of cells per axis for a requested side ``h`` (nearest 1/m, m >= 2)."""
    return max(2, int(round(1.0 / h)))


def calibrate_h(n: int, d: int, alpha: float, c: float) -> Calibration:
    """Grid side c * (log n / n)^(1/(d + 2 alpha)), snapped to 1/m."""
    if n < 2:
        raise ValueError(f"calibration needs n >= 2, got {n}")
    target = c * (math.log(n) / n) ** (1.0 / (d + 2 * alpha))
    m = snap_cells(target)
    h = 1.0 / m
    vol = h**d
    ok = h > math.sqrt(math.log(1.0 / vol) / (n * vol))
    if not ok:
        warnings.warn(
            f"h = 1/{m} violates h > sqrt(log(1/h^d)/(n h^d)) for n={n}, d={d}",
            CalibrationWarning,
            stacklevel=2,
        )
    return Calibration(h, m, target, ok)


def grid_for(n: int, d: int, config: EstimatorConfig) -> GridSpec:
    if config.h_override is not None:
        return build_grid(d, snap_cells(config.h_override))
    return build_grid(d, calibrate_h(n, d, config.alpha, config.h_const).cells_per_axis)


def peak_cell(histogram: CellField, birth_cell: int, k: int) -> int:
    """Cell of largest histogram value within Chebyshev distance ``k`` of ``birth_cell``.

    After a radius-k max-filter the maximum of a component is a plateau whose
    lowest-index cell is the birth cell; the histogram peak inside that
    window is the cell that produced the plateau. Ties go to the lowest index.
    """
    grid = histogram.grid
    center = grid.multi_index(birth_cell)
    lo = [max(0, c - k) for c in center]
    window = histogram.values[tuple(slice(a, min(grid.cells_per_axis, c + k + 1)) for a, c in zip(lo, center))]
    offset = np.unravel_index(int(np.argmax(window)), window.shape)
    return grid.flat_index([a + o for a, o in zip(lo, offset)])


def _to_modes(points, grid: GridSpec, histogram: CellField | None, k: int) -> tuple[Mode, ...]:
    modes = []
    for p in points:
        cell = p.birth_cell if histogram is None or k == 0 else peak_cell(histogram, p.birth_cell, k)
        modes.append(Mode(grid.center(cell), p.birth, p.lifetime, p.birth_cell, cell))
    return tuple(modes)


def _as_samples(samples) -> np.ndarray:
    samples = np.asarray(samples, dtype=float)
    return samples[:, None] if samples.ndim == 1 else samples


def modes_above(diagram: PersistenceDiagram, l: float, strict: bool = True,
                histogram: CellField | None = None, dilation: int = 0) -> tuple[Mode, ...]:
    """Modes read off ``diagram``: essential points plus points whose lifetime clears ``l``.

    With the undilated ``histogram`` each location is refined to the
    histogram peak that produced the birth plateau (see ``peak_cell``).
    """
    keep = [p for p in diagram.points if p.essential or (p.lifetime > l if strict else p.lifetime >= l)]
    return _to_modes(keep, diagram.grid, histogram, dilation)


def _fit(samples, config: EstimatorConfig):
    samples = _as_samples(samples)
    grid = grid_for(samples.shape[0], samples.shape[1], config)
    k = dilation_radius(grid.dim, config.mu) if config.dilation is None else config.dilation
    histogram = build_histogram(samples, grid)
    return histogram, k, superlevel_diagram(dilate_max(histogram, k))


def estimate_modes_known_l(samples, config: EstimatorConfig) -> ModeEstimate:
    """Modes whose estimated lifetime exceeds half the known minimal lifetime."""
    if config.l_known is None:
        raise ValueError("estimate_modes_known_l needs config.l_known")
    histogram, k, diagram = _fit(samples, config)
    modes = modes_above(diagram, config.l_known / 2, histogram=histogram, dilation=k)
    return ModeEstimate(modes, config.l_known, diagram)


def truncation_cost(diagram: PersistenceDiagram, l: float, strict: bool = True) -> float:
    """Bottleneck distance between ``diagram`` and its truncation at ``l``.

    Every removed lifetime is at most every kept one, so the optimal
    matching sends exactly the removed points to the diagonal.
    """
    life = diagram.lifetimes()
    removed = life[life <= l] if strict else life[life < l]
    return float(removed.max()) / 2 if removed.size else 0.0


def risk_R(diagram: PersistenceDiagram, l: float, h: float, alpha: float) -> float:
    """Truncation error plus the penalty h^alpha / l."""
    if not l > 0:
        raise ValueError(f"l must be positive, got {l}")
    return truncation_cost(diagram, l) + h**alpha / l


def risk_left_limit(diagram: PersistenceDiagram, l: float, h: float, alpha: float) -> float:
    """Limit of ``risk_R`` as the threshold increases to ``l``: keeps lifetimes >= l."""
    if not l > 0:
        raise ValueError(f"l must be positive, got {l}")
    return truncation_cost(diagram, l, strict=False) + h**alpha / l


def candidate_thresholds(diagram: PersistenceDiagram) -> np.ndarray:
    life = diagram.lifetimes()
    life = life[(life > 0) & (life <= 1)]
    return np.unique(np.append(life, 1.0))


def select_l(diagram: PersistenceDiagram, h: float, alpha: float) -> float:
    """Penalized threshold: argmin of the left-limit risk over observed lifetimes in (0, 1] and 1.

    Ties go to the largest threshold.
    """
    if len(diagram) == 0:
        raise ValueError("cannot select a threshold on an empty diagram")
    best_l, best_r = None, math.inf
    for l in candidate_thresholds(diagram)[::-1]:
        r = risk_left_limit(diagram, float(l), h, alpha)
        if r < best_r:
            best_l, best_r = float(l), r
    return best_l


def estimate_modes_adaptive(samples, config: EstimatorConfig) -> ModeEstimate:
    """Modes with lifetime >= the penalized threshold (plus essential classes)."""
    histogram, k, diagram = _fit(samples, config)
    return modes_from_diagram(diagram, config.alpha, histogram, k)


def modes_from_diagram(diagram: PersistenceDiagram, alpha: float,
                       histogram: CellField | None = None, dilation: int = 0) -> ModeEstimate:
    """Adaptive thresholding of an already computed diagram."""
    l_hat = select_l(diagram, diagram.grid.h, alpha)
    modes = modes_above(diagram, l_hat, strict=False, histogram=histogram, dilation=dilation)
    return ModeEstimate(modes, l_hat, diagram, adaptive=True)


def estimate_modes(samples, config: EstimatorConfig) -> ModeEstimate:
    """Known-l estimator when ``config.l_known`` is set, adaptive otherwise."""
    if config.l_known is not None:
        return estimate_modes_known_l(samples, config)
    return estimate_modes_adaptive(samples, config)
