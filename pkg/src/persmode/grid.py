"""Regular grids over the unit cube, histogram fields and max-dilation."""
from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

OUTSIDE = -1


@dataclass(frozen=True)
class GridSpec:
    """Regular orthogonal grid over [0,1]^dim with ``cells_per_axis`` cells per axis."""

    dim: int
    cells_per_axis: int

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"grid dimension must be >= 1, got {self.dim}")
        if self.cells_per_axis < 2:
            raise ValueError(f"need at least 2 cells per axis, got {self.cells_per_axis}")

    @property
    def step(self) -> Fraction:
        """Exact cell side 1/m."""
        return Fraction(1, self.cells_per_axis)

    @property
    def h(self) -> float:
        return 1.0 / self.cells_per_axis

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.cells_per_axis,) * self.dim

    @property
    def total_cells(self) -> int:
        return self.cells_per_axis**self.dim

    @property
    def cell_volume(self) -> float:
        return self.h**self.dim

    def flat_index(self, multi_index) -> int:
        return int(np.ravel_multi_index(tuple(multi_index), self.shape))

    def multi_index(self, flat: int) -> tuple[int, ...]:
        return tuple(int(i) for i in np.unravel_index(flat, self.shape))

    def center(self, flat: int) -> np.ndarray:
        """Center of the cell with row-major index ``flat``."""
        return (np.asarray(self.multi_index(flat), dtype=float) + 0.5) / self.cells_per_axis

    def centers(self) -> np.ndarray:
        """All cell centers, shape (total_cells, dim), in flat-index order."""
        axis = (np.arange(self.cells_per_axis) + 0.5) / self.cells_per_axis
        mesh = np.meshgrid(*([axis] * self.dim), indexing="ij")
        return np.stack([g.ravel() for g in mesh], axis=-1)


@dataclass(frozen=True, eq=False)
class CellField:
    """Non-negative per-cell values on a grid; ``values`` has shape ``grid.shape``."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).reshape(self.grid.shape)
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        if np.any(values < 0):
            raise ValueError("field values must be non-negative")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def flat(self) -> np.ndarray:
        return self.values.ravel()

    def mass(self) -> float:
        return float(self.values.sum() * self.grid.cell_volume)


def build_grid(dim: int, cells_per_axis: int) -> GridSpec:
    return GridSpec(int(dim), int(cells_per_axis))


def cell_of_point(grid: GridSpec, x) -> tuple[int, ...] | int:
    """Multi-index of the cell holding ``x``, or ``OUTSIDE`` if x is not in [0,1]^d.

    Cells are half-open except the last one along each axis, which also
    owns the upper face.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (grid.dim,):
        raise ValueError(f"expected a point of dimension {grid.dim}, got shape {x.shape}")
    idx = cells_of_points(grid, x[None, :])[0]
    if idx == OUTSIDE:
        return OUTSIDE
    return grid.multi_index(idx)


def cells_of_points(grid: GridSpec, points: np.ndarray) -> np.ndarray:
    """Vectorized flat cell indices; ``OUTSIDE`` for points outside the cube."""
    points = np.asarray(points, dtype=float)
    m = grid.cells_per_axis
    inside = np.all((points >= 0.0) & (points <= 1.0), axis=1)
    multi = np.minimum(np.floor(points * m), m - 1).astype(np.int64)
    flat = np.full(points.shape[0], OUTSIDE, dtype=np.int64)
    if inside.any():
        flat[inside] = np.ravel_multi_index(tuple(multi[inside].T), grid.shape)
    return flat


def build_histogram(samples, grid: GridSpec) -> CellField:
    """Histogram density: count in each cell divided by n * h^d.

    Points outside [0,1]^d still count towards n.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim == 1 and grid.dim == 1:
        samples = samples[:, None]
    if samples.ndim != 2 or samples.shape[0] == 0:
        raise ValueError("need a non-empty (n, d) array of samples")
    if samples.shape[1] != grid.dim:
        raise ValueError(f"samples have dimension {samples.shape[1]}, grid has {grid.dim}")
    n = samples.shape[0]
    flat = cells_of_points(grid, samples)
    counts = np.bincount(flat[flat != OUTSIDE], minlength=grid.total_cells)
    return CellField(grid, counts / (n * grid.cell_volume))


def dilation_radius(dim: int, mu: float) -> int:
    """Number of cells k = ceil(sqrt(d) / mu) by which superlevel sets are thickened."""
    if not 0 < mu <= 1:
        raise ValueError(f"mu must lie in (0, 1], got {mu}")
    if dim < 1:
        raise ValueError(f"dimension must be >= 1, got {dim}")
    return math.ceil(math.sqrt(dim) / mu)


def dilate_max(field: CellField, k: int) -> CellField:
    """Chebyshev max-filter of radius ``k`` (in cells), restricted to the grid.

    ``{out >= lam}`` is exactly the L-infinity thickening by k*h of
    ``{field >= lam}``, intersected with the cube.
    """
    if k < 0:
        raise ValueError(f"dilation radius must be >= 0, got {k}")
    if k == 0:
        return field
    # edge replication never brings in a cell farther than k from the target
    out = ndimage.maximum_filter(field.values, size=2 * k + 1, mode="nearest")
    return CellField(field.grid, out)
