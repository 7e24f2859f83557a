"""Reference densities on [0,1]^d: the worked examples, the hard two-point and
sliding-bump families, quadrature normalization, rejection sampling and
fine-grid ground truth."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .grid import CellField, GridSpec, build_grid, cells_of_points
from .persistence import PersistenceDiagram, superlevel_diagram

MAX_ORACLE_CELLS = 2**22
ENVELOPE_FACTOR = 1.05
# closed-set support tests tolerate rounding at cell centers lying on a boundary
_EPS = 1e-12


def default_quad_cells(dim: int) -> int:
    """Cells per axis for midpoint quadrature: 2^15 in 1D, at most 2^22 cells otherwise."""
    if dim == 1:
        return 2**15
    return int(math.floor(MAX_ORACLE_CELLS ** (1.0 / dim) + 1e-9))


class Density:
    """Base class: subclasses provide ``dim``, ``name`` and ``_raw``."""

    dim: int
    name: str

    def _raw(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def raw(self, x) -> np.ndarray:
        """Unnormalized density clipped at zero; ``x`` has shape (N, d)."""
        x = np.asarray(x, dtype=float).reshape(-1, self.dim)
        return np.maximum(self._raw(x), 0.0)

    def analytic_modes(self) -> np.ndarray | None:
        """Mode locations forced by the formula, shape (k, d), or None."""
        return None

    @cached_property
    def normalizer(self) -> float:
        return normalize(self)

    @cached_property
    def sup(self) -> float:
        """Estimated sup of the normalized density (fine-grid max and analytic modes)."""
        m = default_quad_cells(self.dim)
        if self.dim == 1:
            m = 2**14
        best = float(evaluate_on_grid(self, build_grid(self.dim, m)).max())
        modes = self.analytic_modes()
        if modes is not None:
            best = max(best, float(self.raw(modes).max()))
        return best / self.normalizer

    def pdf(self, x) -> np.ndarray:
        return self.raw(x) / self.normalizer


def _norm2_sq(x, c):
    return np.sum((x - np.asarray(c)) ** 2, axis=1)


def _cheb(x, c):
    return np.max(np.abs(x - np.asarray(c)), axis=1)


@dataclass(frozen=True, eq=False)
class Example1(Density):
    """cos(2 pi x) + 2 * 1{x >= 1/2}, clipped at 0."""

    dim = 1
    name = "example1"

    def _raw(self, x):
        t = x[:, 0]
        return np.cos(2 * np.pi * t) + 2.0 * (t >= 0.5)

    def analytic_modes(self):
        return np.array([[0.0], [1.0]])


@dataclass(frozen=True, eq=False)
class Example2_1(Density):
    """Four truncated paraboloids on a lens-shaped support."""

    dim = 2
    name = "example2_1"

    CENTERS = ((0.25, 0.25), (0.75, 0.75), (0.75, 0.25), (0.25, 0.75))

    def _raw(self, x):
        X, Y = x[:, 0], x[:, 1]
        val = (
            2 * np.maximum(1 / 20 - _norm2_sq(x, (0.25, 0.25)), 0)
            + 4 * np.maximum(1 / 20 - _norm2_sq(x, (0.75, 0.75)), 0)
            + np.maximum(1 / 16 - _norm2_sq(x, (0.75, 0.25)), 0)
            + np.maximum(1 / 16 - _norm2_sq(x, (0.25, 0.75)), 0)
        )
        bulge = (Y - 0.25) * (Y - 0.75)
        support = (
            (Y >= 0.25 - _EPS)
            & (Y <= 0.75 + _EPS)
            & (X >= 0.25 - bulge - _EPS)
            & (X <= 0.75 + bulge + _EPS)
        )
        return np.where(support, val, 0.0)

    def analytic_modes(self):
        return np.array(self.CENTERS)


@dataclass(frozen=True, eq=False)
class Example2_2(Density):
    """Two cones, each living on a pair of diamonds that touch at its apex."""

    dim = 2
    name = "example2_2"

    def _raw(self, x):
        X, Y = x[:, 0], x[:, 1]

        def diamond(cx, cy):
            return np.abs(X - cx) + np.abs(Y - cy) <= 0.25 + _EPS

        left = 0.5 * np.maximum(1 / 8 - np.sqrt(_norm2_sq(x, (0.25, 0.5))), 0)
        right = np.maximum(1 / 8 - np.sqrt(_norm2_sq(x, (0.75, 0.5))), 0)
        in_left = diamond(0.25, 0.25) | diamond(0.25, 0.75)
        in_right = diamond(0.75, 0.75) | diamond(0.75, 0.25)
        return np.where(in_left, left, np.where(in_right, right, 0.0))

    def analytic_modes(self):
        return np.array([[0.25, 0.5], [0.75, 0.5]])


@dataclass(frozen=True, eq=False)
class LowerBound1D(Density):
    """1 + (L/2) x^alpha + a bump of height L h^alpha centred at m / floor(1/h)."""

    h: float = 0.1
    m: int = 5
    L: float = 1.0
    alpha: float = 1.0
    dim = 1
    name = "lower_bound_1d"

    def __post_init__(self):
        if not 0 < self.alpha <= 1 or not self.L > 0:
            raise ValueError("need 0 < alpha <= 1 and L > 0")
        if not 0 < self.h < 0.25:
            raise ValueError(f"h must lie in (0, 1/4), got {self.h}")
        cells = math.floor(1 / self.h)
        if not cells / 4 < self.m < 3 * cells / 4:
            raise ValueError(f"m must satisfy floor(1/h)/4 < m < 3 floor(1/h)/4, got m={self.m}")

    @property
    def bump_center(self) -> float:
        return self.m / math.floor(1 / self.h)

    def _raw(self, x):
        t = x[:, 0]
        bump = self.L * np.maximum(self.h**self.alpha - np.abs(t - self.bump_center) ** self.alpha, 0)
        return 1.0 + 0.5 * self.L * t**self.alpha + bump

    def analytic_modes(self):
        return np.array([[self.bump_center], [1.0]])


def _f0_l1(alpha: float, dim: int) -> float:
    # E ||U - c||_inf^alpha = dim 2^-alpha / (alpha + dim) for U uniform on the cube
    return 1.0 - dim * 2.0**-alpha / (alpha + dim)


@dataclass(frozen=True, eq=False)
class TwoPointF0(Density):
    """1 - ||f0||_1 + f0 with f0 = 1 - ||x - center||_inf^alpha."""

    alpha: float = 1.0
    dim: int = 2
    name = "two_point_f0"

    def __post_init__(self):
        if not 0 < self.alpha <= 1 or self.dim < 1:
            raise ValueError("need 0 < alpha <= 1 and dim >= 1")

    def _raw(self, x):
        f0 = 1.0 - _cheb(x, np.full(self.dim, 0.5)) ** self.alpha
        return 1.0 - _f0_l1(self.alpha, self.dim) + f0

    def analytic_modes(self):
        return np.full((1, self.dim), 0.5)


@dataclass(frozen=True, eq=False)
class TwoPointF1(Density):
    """TwoPointF0 plus a bump at (1/2 + h)(1,...,1), with mass removed at the corners."""

    alpha: float = 1.0
    L: float = 2.0
    h: float = 0.1
    dim: int = 2
    name = "two_point_f1"

    def __post_init__(self):
        if not 0 < self.alpha <= 1 or self.dim < 1:
            raise ValueError("need 0 < alpha <= 1 and dim >= 1")
        if not self.L > 1:
            raise ValueError(f"L must exceed 1, got {self.L}")
        if not 0 < self.h <= 0.25:
            raise ValueError(f"h must lie in (0, 1/4], got {self.h}")
        corner = 2.0 - _f0_l1(self.alpha, self.dim) - 0.5**self.alpha
        if self.L * self.h**self.alpha >= corner:
            raise ValueError("L h^alpha too large: density would vanish at the corners")

    @property
    def peak(self) -> np.ndarray:
        return np.full(self.dim, 0.5 + self.h)

    def _bump(self, x, c):
        return self.L * np.maximum(self.h**self.alpha - _cheb(x, c) ** self.alpha, 0)

    def _raw(self, x):
        f0 = 1.0 - _cheb(x, np.full(self.dim, 0.5)) ** self.alpha
        val = 1.0 - _f0_l1(self.alpha, self.dim) + f0 + self._bump(x, self.peak)
        for corner in itertools.product((0.0, 1.0), repeat=self.dim):
            val = val - self._bump(x, corner)
        return val

    def analytic_modes(self):
        peak = self.peak[None, :]
        if self.alpha < 1:
            # the cusp of f0 keeps the centre a strict local maximum as well
            return np.vstack([peak, np.full((1, self.dim), 0.5)])
        return peak


@dataclass(frozen=True, eq=False)
class GridDensity(Density):
    """Piecewise-constant density given by a cell field."""

    field: CellField = None
    name = "grid"

    @property
    def dim(self) -> int:
        return self.field.grid.dim

    def _raw(self, x):
        idx = cells_of_points(self.field.grid, x)
        return np.where(idx >= 0, self.field.flat[np.maximum(idx, 0)], 0.0)


def lower_bound_family(kind: str, **params) -> Density:
    """Hard instances: ``sliding_bump`` (1D) or ``two_point_f0`` / ``two_point_f1``."""
    kinds = {
        "sliding_bump": LowerBound1D,
        "lower_bound_1d": LowerBound1D,
        "two_point_f0": TwoPointF0,
        "two_point_f1": TwoPointF1,
    }
    if kind not in kinds:
        raise ValueError(f"unknown family {kind!r}; expected one of {sorted(kinds)}")
    return kinds[kind](**params)


def eval_unnormalized(spec: Density, x) -> np.ndarray:
    x = np.asarray(x, dtype=float).reshape(-1, spec.dim)
    if np.any((x < 0) | (x > 1)):
        raise ValueError("evaluation points must lie in [0,1]^d")
    return spec.raw(x)


def evaluate_on_grid(spec: Density, grid: GridSpec, chunk: int = 2**20) -> np.ndarray:
    """Unnormalized values at cell centers, flat-index order."""
    if isinstance(spec, GridDensity) and spec.field.grid == grid:
        return spec.field.flat.copy()
    axis = (np.arange(grid.cells_per_axis) + 0.5) / grid.cells_per_axis
    out = np.empty(grid.total_cells)
    for start in range(0, grid.total_cells, chunk):
        flat = np.arange(start, min(start + chunk, grid.total_cells))
        pts = axis[np.stack(np.unravel_index(flat, grid.shape), axis=1)]
        out[start : start + flat.size] = spec.raw(pts)
    return out


def normalize(spec: Density, quad_cells: int | None = None) -> float:
    """Integral of the clipped density by the midpoint rule."""
    if isinstance(spec, GridDensity) and quad_cells is None:
        z = spec.field.mass()
    else:
        grid = build_grid(spec.dim, quad_cells or default_quad_cells(spec.dim))
        z = float(evaluate_on_grid(spec, grid).sum() * grid.cell_volume)
    if not z > 0:
        raise ValueError(f"density {spec.name} integrates to {z}")
    return z


def cell_masses(spec: Density, grid: GridSpec, refine: int | None = None) -> np.ndarray:
    """Probability of each cell of ``grid`` under the normalized density."""
    if refine is None:
        refine = max(1, default_quad_cells(spec.dim) // grid.cells_per_axis)
    fine = build_grid(spec.dim, grid.cells_per_axis * refine)
    vals = evaluate_on_grid(spec, fine).reshape(fine.shape)
    for axis in range(spec.dim):
        shape = vals.shape[:axis] + (grid.cells_per_axis, refine) + vals.shape[axis + 1 :]
        vals = vals.reshape(shape).sum(axis=axis + 1)
    masses = vals.ravel() * fine.cell_volume
    return masses / masses.sum()


# --- counter-based uniforms: the stream for point i depends only on (seed, i)

_M64 = np.uint64(0xFFFFFFFFFFFFFFFF)


def _splitmix(z: np.ndarray) -> np.ndarray:
    z = z + np.uint64(0x9E3779B97F4A7C15)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def counter_uniforms(seed: int, index: np.ndarray, draw: np.ndarray) -> np.ndarray:
    """Uniform(0,1) numbers keyed by (seed, point index, draw number); broadcasts."""
    key = _splitmix(np.array([seed & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64))
    a = _splitmix(key ^ np.asarray(index, dtype=np.uint64))
    b = _splitmix(a ^ _splitmix(np.asarray(draw, dtype=np.uint64)))
    return (b >> np.uint64(11)).astype(np.float64) * 2.0**-53


def sample(spec: Density, n: int, seed: int, max_batch: int = 2**22) -> np.ndarray:
    """``n`` points from the normalized density by rejection from the uniform envelope.

    Point i only consumes draws keyed by (seed, i), so the first k points
    of a larger sample coincide with a sample of size k.
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    envelope = ENVELOPE_FACTOR * spec.sup
    if not envelope > 0:
        raise ValueError("rejection envelope is zero")
    d = spec.dim
    out = np.empty((n, d))
    pending = np.arange(n, dtype=np.uint64)
    per_round = int(min(max(2 * math.ceil(envelope), 4), 4096))
    attempt0 = 0
    while pending.size:
        chunk = max(1, max_batch // per_round)
        still = []
        for start in range(0, pending.size, chunk):
            idx = pending[start : start + chunk]
            attempts = np.arange(attempt0, attempt0 + per_round, dtype=np.uint64)
            # draw j of attempt a: j = a * (d + 1) + coordinate
            base = attempts[None, :, None] * np.uint64(d + 1)
            coords = np.arange(d + 1, dtype=np.uint64)[None, None, :]
            u = counter_uniforms(seed, idx[:, None, None], base + coords)
            pts = u[..., :d]
            dens = spec.pdf(pts.reshape(-1, d)).reshape(idx.size, per_round)
            accept = u[..., d] * envelope < dens
            hit = accept.any(axis=1)
            first = accept.argmax(axis=1)
            rows = np.flatnonzero(hit)
            out[idx[rows].astype(np.int64)] = pts[rows, first[rows]]
            still.append(idx[~hit])
        pending = np.concatenate(still)
        attempt0 += per_round
    return out


@dataclass(frozen=True)
class OracleDiagram:
    diagram: PersistenceDiagram
    fine_m: int
    unstable: tuple[bool, ...]  # per finite point, in diagram order
    lipschitz: float


def oracle_field(spec: Density, fine_m: int) -> CellField:
    grid = build_grid(spec.dim, fine_m)
    if grid.total_cells > MAX_ORACLE_CELLS:
        raise ValueError(f"oracle grid too large: {grid.total_cells} cells")
    return CellField(grid, evaluate_on_grid(spec, grid) / spec.normalizer)


def oracle_diagram(spec: Density, fine_m: int) -> OracleDiagram:
    """Superlevel diagram of the normalized density sampled at fine-grid centers.

    Finite points whose lifetime moves by more than 2 * Lip / fine_m when
    the grid is halved are flagged unstable.
    """
    field = oracle_field(spec, fine_m)
    diagram = superlevel_diagram(field)
    values = field.values
    lip = 0.0
    for axis in range(spec.dim):
        lip = max(lip, float(np.abs(np.diff(values, axis=axis)).max(initial=0.0)) * fine_m)
    fine_life = np.sort(diagram.lifetimes())[::-1]
    if fine_m // 2 >= 2:
        coarse_life = np.sort(superlevel_diagram(oracle_field(spec, fine_m // 2)).lifetimes())[::-1]
    else:
        coarse_life = np.zeros(0)
    tol = 2 * lip / fine_m
    moved = []
    for i, life in enumerate(fine_life):
        other = coarse_life[i] if i < coarse_life.size else 0.0
        moved.append(bool(abs(life - other) > tol))
    # map the flags, computed in lifetime order, back to diagram order
    order = np.argsort(-diagram.lifetimes(), kind="stable")
    flags = [False] * len(order)
    for rank, pos in enumerate(order):
        flags[pos] = moved[rank]
    return OracleDiagram(diagram, fine_m, tuple(flags), lip)


def oracle_modes(spec: Density, fine_m: int | None = None, min_lifetime: float = 0.01):
    """True mode locations (k, d) and normalized values (k,).

    Uses the formula's modes when it forces them; otherwise births of
    fine-grid diagram points whose lifetime exceeds ``min_lifetime`` times
    the sup.
    """
    modes = spec.analytic_modes()
    if modes is None or isinstance(spec, Example1):
        fine_m = fine_m or default_oracle_m(spec.dim)
        field = oracle_field(spec, fine_m)
        diagram = superlevel_diagram(field)
        cut = min_lifetime * float(field.values.max())
        keep = [p for p in diagram.points if p.lifetime > cut]
        modes = np.array([field.grid.center(p.birth_cell) for p in keep])
        values = np.array([p.birth for p in keep])
        return modes, values
    return modes, spec.raw(modes) / spec.normalizer


def default_oracle_m(dim: int) -> int:
    return {1: 2**14, 2: 512}.get(dim, 64)


@dataclass(frozen=True)
class Preset:
    """Density together with the estimator parameters used in the worked examples."""

    factory: type
    alpha: float
    mu: float
    h_const: float
    fine_m: int


PRESETS = {
    "example1": Preset(Example1, alpha=0.5, mu=1.0, h_const=0.25, fine_m=2**14),
    "example2_1": Preset(Example2_1, alpha=0.5, mu=0.5, h_const=1 / 6, fine_m=512),
    "example2_2": Preset(Example2_2, alpha=0.5, mu=0.5, h_const=0.25, fine_m=512),
    "lower_bound_1d": Preset(LowerBound1D, alpha=1.0, mu=1.0, h_const=1.0, fine_m=2**14),
    "two_point_f0": Preset(TwoPointF0, alpha=1.0, mu=1.0, h_const=1.0, fine_m=256),
    "two_point_f1": Preset(TwoPointF1, alpha=1.0, mu=1.0, h_const=1.0, fine_m=256),
}


def make_density(name: str, **params) -> Density:
    if name not in PRESETS:
        raise ValueError(f"unknown density {name!r}; expected one of {sorted(PRESETS)}")
    return PRESETS[name].factory(**params)
