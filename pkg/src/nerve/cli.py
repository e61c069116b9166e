"""``nerve`` command-line interface."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .corpus import synthetic_corpus
from .curves import CurveSet, curveset_from_json, sample_uniform
from .fit import CIRCLE_THRESHOLD, fit_points, fitted_to_json
from .grid import NerveGrid, edge_length, load_grid, save_grid
from .metrics import DEFAULT_SAMPLES, chamfer, grid_report, hausdorff_avg
from .perturb import PerturbSpec, perturb
from .pipeline import PipelineConfig, corpus_means, run_pipeline
from .pwl import extract_pwl, paths_from_json, paths_to_json, to_obj, trace_paths
from .topo import DELTA_P_CUBES, DELTA_R_CUBES, N_P, RefineParams, parse_length, refine
from .voxelize import grid_from_truncations, parse_point_rule, truncate, truncation_junction_fraction, voxelize

log = logging.getLogger("nerve")

REPORT_FIELDS = ["R_o", "P_o", "C_e", "D_p", "CD", "HD"]


def _setup_logging():
    level = os.environ.get("NERVE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")


def _write_json(obj, path):
    text = json.dumps(obj, indent=2)
    if path in (None, "-"):
        sys.stdout.write(text + "\n")
    else:
        Path(path).write_text(text + "\n")


def _csv_text(rows: list[dict], fields: list[str]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fields, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: "" if row.get(k) is None else row[k] for k in fields})
    return buf.getvalue()


def _read_curves(path) -> CurveSet:
    return curveset_from_json(Path(path).read_text())


def _refine_params(args, resolution: int) -> RefineParams:
    l = edge_length(resolution)
    return RefineParams(
        delta_r=parse_length(args.delta_r, l),
        delta_p=parse_length(args.delta_p, l),
        n_p=args.n_p,
        brep_strict=args.brep_strict,
    )


def _perturb_spec(args, resolution: int) -> PerturbSpec:
    return PerturbSpec(
        point_sigma=parse_length(args.sigma, edge_length(resolution)),
        occ_fp=args.occ_fp,
        occ_fn=args.occ_fn,
        orient_flip=args.orient_flip,
        seed=args.seed,
    )


# -- commands ---------------------------------------------------------------

def cmd_voxelize(args) -> int:
    curves = _read_curves(args.curves)
    truncs, faces = truncate(curves, args.resolution)
    grid = grid_from_truncations(truncs, faces, args.resolution, args.point_rule)
    save_grid(grid, args.output)
    stats = {
        "resolution": args.resolution,
        "occupied": grid.occupied_count,
        "junction_fraction": truncation_junction_fraction(truncs),
    }
    log.info("wrote %s: %d occupied cubes", args.output, stats["occupied"])
    if args.stats:
        _write_json(stats, args.stats)
    return 0


def cmd_extract(args) -> int:
    grid = load_grid(args.grid)
    graph = extract_pwl(grid)
    if not args.no_refine:
        graph = refine(graph, _refine_params(args, grid.resolution))
    if graph.n_vertices == 0:
        log.warning("grid has no occupied cubes; writing an empty graph")
    paths = trace_paths(graph)
    Path(args.obj).write_text(to_obj(graph))
    if args.paths:
        _write_json(paths_to_json(graph, paths, resolution=grid.resolution), args.paths)
    return 0


def cmd_fit(args) -> int:
    listing = paths_from_json(Path(args.paths).read_text())
    if not listing:
        log.warning("no paths to fit; writing an empty curve list")
    fitted = [fit_points(pts, closed, args.circle_threshold) for pts, closed in listing]
    _write_json(fitted_to_json(fitted), args.output)
    return 0


def _load_side(path):
    """A grid file or a curve JSON file, detected by content."""
    data = Path(path).read_bytes()
    head = data.lstrip()[:1]
    if head == b"{":
        obj = json.loads(data)
        if "curves" in obj:
            return curveset_from_json(obj)
    return load_grid(path)


def _side_grid_and_points(side, resolution, point_rule, samples):
    if isinstance(side, NerveGrid):
        pts = side.points[side.occupancy]
        return side, pts
    grid = voxelize(side, resolution, point_rule=point_rule)
    pts = np.vstack([sample_uniform(c, samples) for c in side.curves]) if side.curves else np.empty((0, 3))
    return grid, pts


def evaluate(pred, gt, resolution=32, point_rule="midpoint", samples=DEFAULT_SAMPLES, predicted_masks=False) -> dict:
    for side in (pred, gt):
        if isinstance(side, NerveGrid):
            resolution = side.resolution
    pg, pp = _side_grid_and_points(pred, resolution, point_rule, samples)
    gg, gp = _side_grid_and_points(gt, resolution, point_rule, samples)
    mask = pg.occupancy if predicted_masks else None
    report = grid_report(pg, gg, mask_e=mask, mask_p=mask).as_dict()
    if len(pp) and len(gp):
        report["CD"] = chamfer(pp, gp)
        report["HD"] = hausdorff_avg(pp, gp)
    else:
        report["CD"] = report["HD"] = None
    return report


def cmd_eval(args) -> int:
    report = evaluate(
        _load_side(args.pred),
        _load_side(args.gt),
        args.resolution,
        args.point_rule,
        args.samples,
        args.predicted_masks,
    )
    if args.csv:
        text = _csv_text([report], REPORT_FIELDS)
        if args.output in (None, "-"):
            sys.stdout.write(text)
        else:
            Path(args.output).write_text(text)
    else:
        _write_json(report, args.output)
    return 0


def cmd_perturb(args) -> int:
    grid = load_grid(args.grid)
    out = perturb(grid, _perturb_spec(args, grid.resolution))
    save_grid(out, args.output)
    return 0


def _pipeline_job(job):
    name, curves, config, out_dir = job
    res = run_pipeline(curves, config)
    if out_dir is not None:
        base = Path(out_dir) / name
        save_grid(res.grid, f"{base}.nerve")
        Path(f"{base}.obj").write_text(to_obj(res.graph))
        Path(f"{base}.paths.json").write_text(json.dumps(paths_to_json(res.graph, res.paths, resolution=config.resolution)))
        Path(f"{base}.curves.json").write_text(json.dumps(fitted_to_json(res.fitted)))
    return name, res.summary()


def cmd_pipeline(args) -> int:
    shapes: dict[str, CurveSet] = {}
    if args.corpus:
        shapes.update(synthetic_corpus())
    for p in args.curves:
        shapes[Path(p).stem] = _read_curves(p)
    if not shapes:
        raise ValueError("no inputs: give curve files or --corpus")
    spec = _perturb_spec(args, args.resolution)
    config = PipelineConfig(
        resolution=args.resolution,
        point_rule=str(parse_point_rule(args.point_rule)),
        refine_params=_refine_params(args, args.resolution),
        circle_threshold=args.circle_threshold,
        perturb_spec=None if spec.is_identity else spec,
        samples_per_curve=args.samples,
    )
    if args.out_dir:
        Path(args.out_dir).mkdir(parents=True, exist_ok=True)
    jobs = [(name, shapes[name], config, args.out_dir) for name in sorted(shapes)]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = dict(pool.map(_pipeline_job, jobs))
    else:
        rows = dict(map(_pipeline_job, jobs))
    summary = {"config": {"resolution": config.resolution, "point_rule": config.point_rule}, "shapes": rows, "mean": corpus_means(rows)}
    if args.csv:
        fields = ["shape"] + REPORT_FIELDS + ["junction_fraction", "paths", "circles", "bsplines", "seconds"]
        text = _csv_text([{"shape": k, **v} for k, v in rows.items()], fields)
        if args.output in (None, "-"):
            sys.stdout.write(text)
        else:
            Path(args.output).write_text(text)
    else:
        _write_json(summary, args.output)
    return 0


def cmd_corpus(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, cs in synthetic_corpus().items():
        (out / f"{name}.json").write_text(cs.dumps() + "\n")
    return 0


# -- parser -----------------------------------------------------------------

def _add_refine_flags(p):
    p.add_argument("--delta-r", default=f"{DELTA_R_CUBES:g}l", help="reconnection distance; 'l' suffix = cube edges (default %(default)s)")
    p.add_argument("--n-p", type=int, default=N_P, help="minimum spur vertex count (default %(default)s)")
    p.add_argument("--delta-p", default=f"{DELTA_P_CUBES:g}l", help="multi-path distance threshold (default %(default)s)")
    p.add_argument("--brep-strict", action="store_true", help="also remove long dangling paths")


def _add_perturb_flags(p):
    p.add_argument("--sigma", default="0", help="point jitter std, e.g. 0.01 or l/4")
    p.add_argument("--occ-fp", type=float, default=0.0)
    p.add_argument("--occ-fn", type=float, default=0.0)
    p.add_argument("--orient-flip", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nerve", description="Volumetric edge grids: voxelize curves, extract, refine, fit, evaluate.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("voxelize", help="curve JSON -> NERVE1 grid")
    p.add_argument("curves")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("-r", "--resolution", type=int, default=32)
    p.add_argument("--point-rule", default="midpoint", help="midpoint | qef | qef:<lambda>")
    p.add_argument("--stats", help="write occupied-cube count and junction-cube fraction as JSON ('-' for stdout)")
    p.set_defaults(func=cmd_voxelize)

    p = sub.add_parser("extract", help="grid -> refined PWL graph (OBJ) and path listing")
    p.add_argument("grid")
    p.add_argument("--obj", required=True)
    p.add_argument("--paths", help="write the traced paths as JSON")
    p.add_argument("--no-refine", action="store_true")
    _add_refine_flags(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("fit", help="path listing -> fitted curve JSON")
    p.add_argument("paths")
    p.add_argument("-o", "--output", default="-")
    p.add_argument("--circle-threshold", type=float, default=CIRCLE_THRESHOLD)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("eval", help="compare grids or curve sets")
    p.add_argument("pred")
    p.add_argument("gt")
    p.add_argument("-o", "--output", default="-")
    p.add_argument("-r", "--resolution", type=int, default=32, help="grid resolution when both sides are curves")
    p.add_argument("--point-rule", default="midpoint")
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES, help="samples per curve")
    p.add_argument("--predicted-masks", action="store_true", help="score C_e and D_p on predicted instead of GT occupancy")
    p.add_argument("--csv", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("perturb", help="seeded corruption of a grid")
    p.add_argument("grid")
    p.add_argument("-o", "--output", required=True)
    _add_perturb_flags(p)
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("pipeline", help="voxelize -> [perturb] -> extract -> refine -> fit -> score")
    p.add_argument("curves", nargs="*")
    p.add_argument("--corpus", action="store_true", help="include the bundled synthetic corpus")
    p.add_argument("--out-dir", help="write per-shape grid, OBJ, paths and curves here")
    p.add_argument("-o", "--output", default="-", help="summary destination")
    p.add_argument("-r", "--resolution", type=int, default=32)
    p.add_argument("--point-rule", default="midpoint")
    p.add_argument("--circle-threshold", type=float, default=CIRCLE_THRESHOLD)
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--csv", action="store_true")
    _add_refine_flags(p)
    _add_perturb_flags(p)
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("corpus", help="write the bundled synthetic corpus as curve JSON files")
    p.add_argument("out_dir")
    p.set_defaults(func=cmd_corpus)
    return ap


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"nerve {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
