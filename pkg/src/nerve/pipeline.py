"""End-to-end round trip: curves -> grid -> PWL graph -> fitted curves -> scores."""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from .curves import CurveSet
from .fit import CIRCLE_THRESHOLD, ParametricCurve, fit_path
from .grid import NerveGrid
from .metrics import DEFAULT_SAMPLES, GridReport, curve_cd, grid_report
from .perturb import PerturbSpec, perturb
from .pwl import CurvePath, PwlGraph, extract_pwl, trace_paths
from .topo import RefineParams, refine
from .voxelize import grid_from_truncations, truncate, truncation_junction_fraction

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PipelineConfig:
    resolution: int = 32
    point_rule: str = "midpoint"
    refine_params: Optional[RefineParams] = None  # None: defaults scaled to the resolution
    circle_threshold: float = CIRCLE_THRESHOLD
    perturb_spec: Optional[PerturbSpec] = None
    samples_per_curve: int = DEFAULT_SAMPLES

    def params(self) -> RefineParams:
        return self.refine_params or RefineParams.for_resolution(self.resolution)


@dataclass
class PipelineResult:
    gt_grid: NerveGrid
    grid: NerveGrid
    raw_graph: PwlGraph
    graph: PwlGraph
    paths: list[CurvePath]
    fitted: list[ParametricCurve]
    cd: Optional[float]
    hd: Optional[float]
    report: GridReport
    junction_fraction: float
    seconds: float
    timings: dict = field(default_factory=dict)

    def summary(self) -> dict:
        return {
            "CD": self.cd,
            "HD": self.hd,
            **self.report.as_dict(),
            "vertices": self.graph.n_vertices,
            "edges": len(self.graph.edges),
            "junction_fraction": self.junction_fraction,
            "paths": len(self.paths),
            "circles": sum(f.kind == "circle" for f in self.fitted),
            "bsplines": sum(f.kind == "bspline" for f in self.fitted),
            "seconds": round(self.seconds, 4),
        }


def extract_and_fit(grid: NerveGrid, params: RefineParams, circle_threshold: float = CIRCLE_THRESHOLD):
    raw = extract_pwl(grid)
    refined = refine(raw, params)
    paths = trace_paths(refined)
    fitted = [fit_path(p, refined, circle_threshold) for p in paths]
    return raw, refined, paths, fitted


def run_pipeline(curves: CurveSet, config: PipelineConfig = PipelineConfig()) -> PipelineResult:
    t0 = time.perf_counter()
    timings = {}
    truncs, faces = truncate(curves, config.resolution)
    gt = grid_from_truncations(truncs, faces, config.resolution, config.point_rule)
    junctions = truncation_junction_fraction(truncs)
    timings["voxelize"] = time.perf_counter() - t0
    grid = gt if config.perturb_spec is None else perturb(gt, config.perturb_spec)
    t1 = time.perf_counter()
    raw, refined, paths, fitted = extract_and_fit(grid, config.params(), config.circle_threshold)
    timings["extract_fit"] = time.perf_counter() - t1
    if fitted:
        cd, hd = curve_cd(fitted, curves.curves, config.samples_per_curve)
    else:
        log.warning("no curves recovered; CD/HD undefined")
        cd = hd = None
    report = grid_report(grid, gt)
    return PipelineResult(gt, grid, raw, refined, paths, fitted, cd, hd, report, junctions, time.perf_counter() - t0, timings)


def _summary_job(args):
    name, curves, config = args
    return name, run_pipeline(curves, config).summary()


def run_corpus(shapes: dict[str, CurveSet], config: PipelineConfig = PipelineConfig(), jobs: int = 1) -> dict:
    """Per-shape summaries plus corpus means; shapes are processed in name order."""
    items = [(name, shapes[name], config) for name in sorted(shapes)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = dict(pool.map(_summary_job, items))
    else:
        rows = dict(map(_summary_job, items))
    return {"shapes": rows, "mean": corpus_means(rows)}


def corpus_means(rows: dict) -> dict:
    out = {}
    for key in ("CD", "HD", "R_o", "P_o", "C_e", "D_p", "junction_fraction"):
        vals = [r[key] for r in rows.values() if r[key] is not None]
        out[key] = math.fsum(vals) / len(vals) if vals else None
    out["undefined_CD"] = sum(r["CD"] is None for r in rows.values())
    return out
