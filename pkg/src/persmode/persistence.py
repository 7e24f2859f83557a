"""H0 persistence of superlevel-set filtrations on cubical grids."""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .grid import CellField, GridSpec, build_histogram, dilate_max, dilation_radius

BRUTE_FORCE_MAX_CELLS = 10_000


@dataclass(frozen=True)
class PersistencePoint:
    birth: float
    death: float
    birth_cell: int = -1
    essential: bool = False

    @property
    def lifetime(self) -> float:
        """birth - death; infinite for essential classes."""
        if self.essential:
            return float("inf")
        return self.birth - self.death

    def sort_key(self):
        return (not self.essential, -self.birth, -self.death, self.birth_cell)


@dataclass(frozen=True)
class PersistenceDiagram:
    points: tuple[PersistencePoint, ...] = ()
    grid: GridSpec | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(sorted(self.points, key=PersistencePoint.sort_key)))

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    @property
    def essential(self) -> list[PersistencePoint]:
        return [p for p in self.points if p.essential]

    @property
    def finite(self) -> list[PersistencePoint]:
        return [p for p in self.points if not p.essential]

    def lifetimes(self) -> np.ndarray:
        """Lifetimes of the non-essential points."""
        return np.array([p.birth - p.death for p in self.finite], dtype=float)

    def with_points(self, points) -> "PersistenceDiagram":
        return PersistenceDiagram(tuple(points), self.grid)


def chebyshev_neighbors(grid: GridSpec) -> np.ndarray:
    """(total_cells, 3^d - 1) table of neighbor flat indices, -1 where off-grid."""
    shape = grid.shape
    coords = np.indices(shape).reshape(grid.dim, -1)
    cols = []
    for offset in itertools.product((-1, 0, 1), repeat=grid.dim):
        if not any(offset):
            continue
        shifted = coords + np.asarray(offset)[:, None]
        ok = np.all((shifted >= 0) & (shifted < grid.cells_per_axis), axis=0)
        col = np.full(coords.shape[1], -1, dtype=np.int64)
        col[ok] = np.ravel_multi_index(tuple(shifted[:, ok]), shape)
        cols.append(col)
    return np.stack(cols, axis=1)


def _processing_order(values: np.ndarray) -> np.ndarray:
    # decreasing value, ties by ascending flat index
    return np.lexsort((np.arange(values.size), -values))


def superlevel_diagram(field: CellField) -> PersistenceDiagram:
    """Union-find with the elder rule over cells sorted by decreasing value.

    Cells touching at a face, edge or corner are adjacent.
    """
    values = field.flat
    vals = values.tolist()
    order = _processing_order(values).tolist()
    neighbors = chebyshev_neighbors(field.grid).tolist()

    parent = [-1] * values.size  # -1: not yet in the filtration
    birth_cell = {}  # root -> cell where its component was born

    def find(c):
        root = c
        while parent[root] != root:
            root = parent[root]
        while parent[c] != root:
            parent[c], c = root, parent[c]
        return root

    def older(a, b):
        # elder rule on roots: larger birth wins, then smaller birth cell
        ba, bb = birth_cell[a], birth_cell[b]
        va, vb = vals[ba], vals[bb]
        return va > vb or (va == vb and ba < bb)

    points = []
    for c in order:
        level = vals[c]
        roots = {find(q) for q in neighbors[c] if q >= 0 and parent[q] != -1}
        if not roots:
            parent[c] = c
            birth_cell[c] = c
            continue
        survivor = None
        for r in roots:
            if survivor is None or older(r, survivor):
                survivor = r
        parent[c] = survivor
        for r in roots:
            if r == survivor:
                continue
            b = birth_cell.pop(r)
            if vals[b] != level:
                points.append(PersistencePoint(vals[b], level, b))
            parent[r] = survivor

    for r, b in birth_cell.items():
        points.append(PersistencePoint(vals[b], 0.0, b, essential=True))
    return PersistenceDiagram(tuple(points), field.grid)


def _components(mask: np.ndarray, neighbors: np.ndarray) -> list[list[int]]:
    seen = np.zeros(mask.size, dtype=bool)
    comps = []
    for start in np.flatnonzero(mask):
        if seen[start]:
            continue
        seen[start] = True
        comp, queue = [], deque([start])
        while queue:
            c = queue.popleft()
            comp.append(int(c))
            for q in neighbors[c]:
                if q >= 0 and mask[q] and not seen[q]:
                    seen[q] = True
                    queue.append(q)
        comps.append(comp)
    return comps


def brute_force_diagram(field: CellField) -> PersistenceDiagram:
    """Reference diagram: BFS components at every distinct level.

    Component identity is carried across levels by set containment. Only
    meant for testing ``superlevel_diagram`` on small grids.
    """
    if field.grid.total_cells > BRUTE_FORCE_MAX_CELLS:
        raise ValueError(
            f"brute force limited to {BRUTE_FORCE_MAX_CELLS} cells, got {field.grid.total_cells}"
        )
    values = field.flat
    neighbors = chebyshev_neighbors(field.grid)
    alive = []  # (birth, birth_cell, frozenset of cells) at the previous level
    points = []
    for level in sorted(set(values.tolist()), reverse=True):
        current = []
        for comp in _components(values >= level, neighbors):
            cells = set(comp)
            inner = [a for a in alive if a[2] <= cells]
            if not inner:
                current.append((level, min(comp), frozenset(cells)))
                continue
            inner.sort(key=lambda a: (-a[0], a[1]))
            for b, bc, _ in inner[1:]:
                if b != level:
                    points.append(PersistencePoint(b, level, bc))
            current.append((inner[0][0], inner[0][1], frozenset(cells)))
        alive = current
    for b, bc, _ in alive:
        points.append(PersistencePoint(b, 0.0, bc, essential=True))
    return PersistenceDiagram(tuple(points), field.grid)


def estimate_diagram(samples, grid: GridSpec, mu: float, dilation: int | None = None) -> PersistenceDiagram:
    """Diagram of the histogram thickened by ceil(sqrt(d)/mu) cells.

    ``dilation`` overrides the thickening radius (0 disables it).
    """
    return superlevel_diagram(estimated_field(samples, grid, mu, dilation))


def estimated_field(samples, grid: GridSpec, mu: float, dilation: int | None = None) -> CellField:
    k = dilation_radius(grid.dim, mu) if dilation is None else dilation
    return dilate_max(build_histogram(samples, grid), k)
