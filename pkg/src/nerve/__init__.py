"""Volumetric edge grids for parametric curve extraction.

The ``voxelize`` and ``perturb`` functions live in their same-named
submodules; they are not re-exported here so the submodules stay importable.
"""

from .grid import NerveGrid, load_grid, save_grid
from .curves import CurveSet, load_curveset
from .pwl import PwlGraph, extract_pwl, trace_paths
from .topo import RefineParams, refine
from .fit import ParametricCurve, fit_path
from .metrics import chamfer, curve_cd, grid_report, hausdorff_avg
from .perturb import PerturbSpec

__version__ = "0.1.0"

__all__ = [
    "NerveGrid",
    "load_grid",
    "save_grid",
    "CurveSet",
    "load_curveset",
    "PwlGraph",
    "extract_pwl",
    "trace_paths",
    "RefineParams",
    "refine",
    "ParametricCurve",
    "fit_path",
    "chamfer",
    "curve_cd",
    "grid_report",
    "hausdorff_avg",
    "PerturbSpec",
]
