"""Histogram-based estimation of H0 persistence diagrams and density modes."""
from .densities import PRESETS, make_density, oracle_diagram, oracle_modes, sample
from .grid import CellField, GridSpec, build_grid, build_histogram, cell_of_point, dilate_max, dilation_radius
from .metrics import bottleneck, hausdorff, matching_distance, truncate
from .modes import (
    EstimatorConfig,
    ModeEstimate,
    calibrate_h,
    estimate_modes,
    estimate_modes_adaptive,
    estimate_modes_known_l,
    risk_R,
    select_l,
)
from .persistence import (
    PersistenceDiagram,
    PersistencePoint,
    brute_force_diagram,
    estimate_diagram,
    superlevel_diagram,
)

__version__ = "0.1.0"

__all__ = [
    "PRESETS",
    "CellField",
    "EstimatorConfig",
    "GridSpec",
    "ModeEstimate",
    "PersistenceDiagram",
    "PersistencePoint",
    "bottleneck",
    "brute_force_diagram",
    "build_grid",
    "build_histogram",
    "calibrate_h",
    "cell_of_point",
    "dilate_max",
    "dilation_radius",
    "estimate_diagram",
    "estimate_modes",
    "estimate_modes_adaptive",
    "estimate_modes_known_l",
    "hausdorff",
    "make_density",
    "matching_distance",
    "oracle_diagram",
    "oracle_modes",
    "risk_R",
    "sample",
    "select_l",
    "superlevel_diagram",
    "truncate",
]
