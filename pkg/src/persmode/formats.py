"""On-disk formats: samples CSV, diagram CSV, and JSON result documents.

Floats are written with ``repr`` so that reading a file back reproduces
every value bit for bit.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .experiments import ExperimentResult
from .grid import GridSpec
from .modes import ModeEstimate
from .persistence import PersistenceDiagram, PersistencePoint

SCHEMA_VERSION = 1


def _num(x: float) -> str:
    return repr(float(x))


def write_samples(path, samples: np.ndarray) -> None:
    samples = np.asarray(samples, dtype=float)
    if samples.ndim == 1:
        samples = samples[:, None]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for row in samples:
            writer.writerow([_num(v) for v in row])


def read_samples(path) -> np.ndarray:
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            if not row or row[0].startswith("#"):
                continue
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: not a number ({exc})") from None
    if not rows:
        raise ValueError(f"{path}: no samples")
    if len({len(r) for r in rows}) != 1:
        raise ValueError(f"{path}: rows have different numbers of columns")
    return np.array(rows, dtype=float)


def write_diagram_csv(path, diagram: PersistenceDiagram) -> None:
    grid = diagram.grid
    dim = grid.dim if grid else 0
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if grid:
            fh.write(f"# dim={grid.dim} cells_per_axis={grid.cells_per_axis}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["birth", "death", "essential", "birth_cell"] + [f"center_{i}" for i in range(dim)])
        for p in diagram.points:
            row = [_num(p.birth), _num(p.death), "true" if p.essential else "false", str(p.birth_cell)]
            if grid and p.birth_cell >= 0:
                row += [_num(c) for c in grid.center(p.birth_cell)]
            elif grid:
                row += [""] * dim
            writer.writerow(row)


def read_diagram_csv(path) -> PersistenceDiagram:
    grid = None
    with open(path, encoding="utf-8", newline="") as fh:
        lines = fh.read().splitlines()
    if lines and lines[0].startswith("#"):
        meta = dict(item.split("=", 1) for item in lines[0][1:].split())
        grid = GridSpec(int(meta["dim"]), int(meta["cells_per_axis"]))
        lines = lines[1:]
    reader = csv.DictReader(lines)
    if reader.fieldnames is None or reader.fieldnames[:4] != ["birth", "death", "essential", "birth_cell"]:
        raise ValueError(f"{path}: not a diagram CSV (bad header)")
    points = []
    for row in reader:
        if row["essential"] not in ("true", "false"):
            raise ValueError(f"{path}: essential must be true/false, got {row['essential']!r}")
        points.append(
            PersistencePoint(float(row["birth"]), float(row["death"]), int(row["birth_cell"]),
                             row["essential"] == "true")
        )
    return PersistenceDiagram(tuple(points), grid)


def diagram_to_json(diagram: PersistenceDiagram) -> list[dict]:
    return [
        {"birth": p.birth, "death": p.death, "essential": p.essential, "birth_cell": p.birth_cell}
        for p in diagram.points
    ]


def diagram_from_json(items, grid: GridSpec | None = None) -> PersistenceDiagram:
    return PersistenceDiagram(
        tuple(PersistencePoint(float(d["birth"]), float(d["death"]), int(d["birth_cell"]), bool(d["essential"]))
              for d in items),
        grid,
    )


def _finite_or_none(x: float):
    return None if math.isinf(x) else float(x)


def estimate_to_json(est: ModeEstimate, **extra) -> dict:
    grid = est.diagram.grid
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "mode_estimate",
        "dim": grid.dim,
        "cells_per_axis": grid.cells_per_axis,
        "h": grid.h,
        "adaptive": est.adaptive,
        "threshold": est.threshold_used,
        "k_hat": est.k_hat,
        "modes": [
            {
                "location": [float(c) for c in m.location],
                "value": m.value,
                "lifetime": _finite_or_none(m.lifetime),
                "birth_cell": m.birth_cell,
                "location_cell": m.location_cell,
            }
            for m in est.modes
        ],
        "diagram": diagram_to_json(est.diagram),
    }
    doc.update(extra)
    return doc


def write_json(path, doc: dict) -> None:
    text = json.dumps(doc, indent=2, allow_nan=False)
    Path(path).write_text(text + "\n", encoding="utf-8")


def read_json(path) -> dict:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(doc, dict) or doc.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"{path}: unsupported or missing schema_version")
    return doc


def read_any_diagram(path) -> PersistenceDiagram:
    """Diagram from a diagram CSV or from the ``diagram`` field of a JSON document."""
    if str(path).endswith(".json"):
        doc = read_json(path)
        grid = GridSpec(doc["dim"], doc["cells_per_axis"]) if "cells_per_axis" in doc else None
        return diagram_from_json(doc["diagram"], grid)
    return read_diagram_csv(path)


def write_results_csv(path, results: list[ExperimentResult]) -> None:
    """Deterministic columns to ``path``; wall times go to ``<path>.timing.csv``."""
    cols = ExperimentResult.columns(timing=False)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(cols)
        for r in results:
            writer.writerow([_cell(getattr(r, c)) for c in cols])
    with open(f"{path}.timing.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["n", "trial", "wall_time"])
        for r in results:
            writer.writerow([r.n, r.trial, _num(r.wall_time)])


def read_results_csv(path) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def _cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return _num(value)
    return str(value)
