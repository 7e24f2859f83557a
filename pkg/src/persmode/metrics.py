"""Bottleneck distance, diagram truncation and distances between mode sets."""
from __future__ import annotations

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .persistence import PersistenceDiagram


def _has_perfect_matching(allowed: np.ndarray) -> bool:
    if allowed.shape[0] == 0:
        return True
    match = maximum_bipartite_matching(csr_matrix(allowed), perm_type="column")
    return bool(np.all(match >= 0))


def _threshold_assignment(cost: np.ndarray) -> tuple[float, np.ndarray]:
    """Smallest t such that the square matrix ``cost`` has a perfect matching
    using entries <= t, together with one such matching (row -> column)."""
    if cost.size == 0:
        return 0.0, np.zeros(0, dtype=np.int64)
    candidates = np.unique(cost[np.isfinite(cost)])
    lo, hi = 0, candidates.size - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _has_perfect_matching(cost <= candidates[mid]):
            hi = mid
        else:
            lo = mid + 1
    t = float(candidates[lo])
    match = maximum_bipartite_matching(csr_matrix(cost <= t), perm_type="column")
    return t, match


def _finite_bottleneck(p1: np.ndarray, p2: np.ndarray) -> float:
    """Bottleneck between point sets (birth, death) with diagonal matching allowed."""
    n1, n2 = len(p1), len(p2)
    if n1 == 0 and n2 == 0:
        return 0.0
    size = n1 + n2
    cost = np.full((size, size), np.inf)
    # rows: p1 points then diagonal slots for p2; columns: p2 points then diagonal slots for p1
    if n1 and n2:
        cost[:n1, :n2] = np.maximum(
            np.abs(p1[:, None, 0] - p2[None, :, 0]), np.abs(p1[:, None, 1] - p2[None, :, 1])
        )
    if n1:
        cost[np.arange(n1), n2 + np.arange(n1)] = (p1[:, 0] - p1[:, 1]) / 2
    if n2:
        cost[n1 + np.arange(n2), np.arange(n2)] = (p2[:, 0] - p2[:, 1]) / 2
    cost[n1:, n2:] = 0.0
    return _threshold_assignment(cost)[0]


def bottleneck(d1: PersistenceDiagram, d2: PersistenceDiagram) -> float:
    """Exact bottleneck distance.

    Essential classes are matched among themselves at cost ``|b1 - b2|``;
    the distance is infinite if their counts differ.
    """
    e1 = np.sort([p.birth for p in d1.essential])
    e2 = np.sort([p.birth for p in d2.essential])
    if e1.size != e2.size:
        return float("inf")
    # sorted pairing minimizes the largest gap on the line
    ess = float(np.max(np.abs(e1 - e2))) if e1.size else 0.0
    f1 = np.array([(p.birth, p.death) for p in d1.finite], dtype=float).reshape(-1, 2)
    f2 = np.array([(p.birth, p.death) for p in d2.finite], dtype=float).reshape(-1, 2)
    return max(ess, _finite_bottleneck(f1, f2))


def truncate(diagram: PersistenceDiagram, l: float) -> PersistenceDiagram:
    """Keep essential points and points with lifetime strictly above ``l``."""
    if not l > 0:
        raise ValueError(f"truncation level must be positive, got {l}")
    return diagram.with_points(p for p in diagram.points if p.essential or p.lifetime > l)


def _as_mode_array(modes, dim: int | None) -> np.ndarray:
    arr = np.asarray(modes, dtype=float)
    if arr.size == 0:
        return np.zeros((0, dim or 1))
    if arr.ndim == 1:
        arr = arr[:, None] if dim in (None, 1) else arr[None, :]
    if not np.all(np.isfinite(arr)):
        raise ValueError("mode coordinates must be finite")
    return arr


def _pair_arrays(l1, l2, dim):
    a, b = np.asarray(l1, dtype=float), np.asarray(l2, dtype=float)
    if dim is None:
        for arr in (a, b):
            if arr.size:
                dim = 1 if arr.ndim == 1 else arr.shape[1]
                break
    a, b = _as_mode_array(a, dim), _as_mode_array(b, dim)
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"mode sets have dimensions {a.shape[1]} and {b.shape[1]}")
    return a, b


def matching_distance(l1, l2, dim: int | None = None, return_matching: bool = False):
    """Bottleneck assignment between two mode sets, the smaller padded with zeros.

    Accepts (k, d) arrays or flat sequences of reals. With
    ``return_matching`` also returns pairs ``(i, j)`` where an index equal
    to the set's length denotes a padding zero.
    """
    a, b = _pair_arrays(l1, l2, dim)
    n = max(len(a), len(b))
    pa = np.vstack([a, np.zeros((n - len(a), a.shape[1]))])
    pb = np.vstack([b, np.zeros((n - len(b), b.shape[1]))])
    cost = np.max(np.abs(pa[:, None, :] - pb[None, :, :]), axis=2) if n else np.zeros((0, 0))
    t, match = _threshold_assignment(cost)
    if not return_matching:
        return t
    pairs = [(min(i, len(a)), min(int(j), len(b))) for i, j in enumerate(match)]
    return t, pairs


def hausdorff(l1, l2, dim: int | None = None) -> float:
    """Hausdorff distance between two non-empty mode sets in the sup norm."""
    a, b = _pair_arrays(l1, l2, dim)
    if len(a) == 0 or len(b) == 0:
        raise ValueError("Hausdorff distance needs two non-empty sets")
    dist = np.max(np.abs(a[:, None, :] - b[None, :, :]), axis=2)
    return float(max(dist.min(axis=1).max(), dist.min(axis=0).max()))
