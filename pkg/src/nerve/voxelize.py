"""Ground-truth edge grids from parametric curves.

Curves are sampled into polylines, every polyline segment is walked through
the grid, and the pieces falling into each cube are collected into
:class:`CubeTruncation` records from which occupancy, face flags and the cube
point are derived.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import grid as G
from .curves import BSplineCurve, Circle3D, CurveError, CurveSet, LineSegment, Polyline

log = logging.getLogger(__name__)

DEFAULT_QEF_LAMBDA = 1e-3
# default chord tolerance, as a fraction of the cube edge length
CHORD_FRACTION = 1e-3
T_MERGE = 1e-12


class QEFError(ValueError):
    pass


@dataclass(frozen=True)
class FaceCrossing:
    position: np.ndarray
    tangent: np.ndarray


@dataclass
class CubeTruncation:
    index: tuple
    runs: list = field(default_factory=list)
    endpoints: list = field(default_factory=list)
    crossings: list = field(default_factory=list)
    curve_ids: set = field(default_factory=set)


@dataclass(frozen=True)
class PointRule:
    name: str = "midpoint"
    lam: float = DEFAULT_QEF_LAMBDA

    def __str__(self):
        return self.name if self.name == "midpoint" else f"qef:{self.lam:g}"


def parse_point_rule(text) -> PointRule:
    if isinstance(text, PointRule):
        return text
    text = str(text).strip().lower()
    if text == "midpoint":
        return PointRule("midpoint")
    if text == "qef":
        return PointRule("qef", DEFAULT_QEF_LAMBDA)
    if text.startswith("qef:"):
        lam = float(text[4:])
        if lam < 0:
            raise ValueError("QEF lambda must be >= 0")
        return PointRule("qef", lam)
    raise ValueError(f"unknown point rule {text!r} (expected 'midpoint' or 'qef:<lambda>')")


# -- sampling ---------------------------------------------------------------

def _circle_segments(radius: float, tol: float) -> int:
    if tol >= radius:
        n = 8
    else:
        n = max(8, math.ceil(math.pi / math.acos(1.0 - tol / radius)))
    while radius * (1.0 - math.cos(math.pi / n)) > tol:
        n += 1
    return n


def _chord_deviation(pts, a, b) -> float:
    d = b - a
    dd = float(d @ d)
    if dd == 0:
        return float(np.linalg.norm(pts - a, axis=1).max())
    s = np.clip((pts - a) @ d / dd, 0.0, 1.0)
    return float(np.linalg.norm(pts - (a + s[:, None] * d), axis=1).max())


def _sample_bspline(curve: BSplineCurve, tol: float) -> np.ndarray:
    t0, t1 = curve.domain
    breaks = np.unique(curve.knots[(curve.knots >= t0) & (curve.knots <= t1)])
    # start from 4 pieces per knot span so that S-shaped spans are not missed
    params = np.unique(np.concatenate([np.linspace(u, w, 5) for u, w in zip(breaks[:-1], breaks[1:])]))
    params = (params - t0) / (t1 - t0)
    probe = np.linspace(0.0, 1.0, 9)[1:-1]
    out = [0.0]
    stack = [(params[i], params[i + 1], 0) for i in range(len(params) - 2, -1, -1)]
    while stack:
        u, w, depth = stack.pop()
        pts = curve.evaluate(np.concatenate([[u, w], u + probe * (w - u)]))
        # keep a 2x margin because the probes only sample the deviation
        if depth < 40 and _chord_deviation(pts[2:], pts[0], pts[1]) > 0.5 * tol:
            mid = 0.5 * (u + w)
            stack.append((mid, w, depth + 1))
            stack.append((u, mid, depth + 1))
        else:
            out.append(w)
    return curve.evaluate(np.array(out))


def sample_curve(curve, chord_tolerance: float) -> Polyline:
    """Polyline approximation with chord deviation at most ``chord_tolerance``.

    The vertices lie on the curve and the polyline starts and ends at the
    curve endpoints.  Closed curves come back as closed polylines (their
    ``path()`` repeats the first vertex).
    """
    if not chord_tolerance > 0:
        raise ValueError("chord_tolerance must be > 0")
    curve.validate()
    if isinstance(curve, LineSegment):
        return Polyline(np.stack([curve.a, curve.b]))
    if isinstance(curve, Circle3D):
        n = _circle_segments(curve.radius, chord_tolerance)
        return Polyline(curve.at_angle(2.0 * math.pi * np.arange(n) / n), closed=True)
    if isinstance(curve, BSplineCurve):
        pts = _sample_bspline(curve, chord_tolerance)
        keep = np.concatenate([[True], np.any(np.diff(pts, axis=0) != 0, axis=1)])
        pts = pts[keep]
        if len(pts) < 2:
            raise CurveError("degenerate B-spline")
        return Polyline(pts)
    if isinstance(curve, Polyline):
        return curve
    raise CurveError(f"unsupported curve {type(curve).__name__}")


# -- segment walk -----------------------------------------------------------

def segment_walk(a, b, resolution: int) -> list[tuple[tuple[int, int, int], float, float]]:
    """Cubes visited by segment ``a -> b`` with their parameter intervals.

    Intervals are contiguous and cover [0, 1].  Crossings through grid
    edges or corners produce no zero-length middle interval.  When an end
    point lies on a face and belongs (by the higher-index tie-break) to a
    cube other than the one the segment runs through, that cube is reported
    with a zero-length interval at that end.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    G.locate(np.stack([a, b]), resolution)  # domain check
    ca = tuple(int(x) for x in G.locate(a, resolution))
    if np.array_equal(a, b):
        return [(ca, 0.0, 1.0)]
    d = b - a
    planes = G.plane_coord(np.arange(1, resolution), resolution)
    ts = []
    for axis in range(3):
        if d[axis] != 0:
            # subnormal steps overflow to inf, which the (0, 1) filter drops
            with np.errstate(over="ignore"):
                t = (planes - a[axis]) / d[axis]
            ts.append(t[(t > 0) & (t < 1)])
    ts = np.sort(np.concatenate(ts)) if ts else np.empty(0)
    breaks = [0.0]
    for t in ts:
        if t - breaks[-1] > T_MERGE and 1.0 - t > T_MERGE:
            breaks.append(float(t))
    breaks.append(1.0)
    mids = np.array([0.5 * (u + w) for u, w in zip(breaks[:-1], breaks[1:])])
    cubes = G.locate(a + mids[:, None] * d, resolution)
    out = []
    for (u, w), c in zip(zip(breaks[:-1], breaks[1:]), cubes):
        c = (int(c[0]), int(c[1]), int(c[2]))
        if out and out[-1][0] == c:
            out[-1] = (c, out[-1][1], w)
        else:
            out.append((c, u, w))
    cb = tuple(int(x) for x in G.locate(b, resolution))
    if ca != out[0][0]:
        out.insert(0, (ca, 0.0, 0.0))
    if cb != out[-1][0]:
        out.append((cb, 1.0, 1.0))
    return out


# -- truncation -------------------------------------------------------------

@dataclass
class _Run:
    cube: tuple
    points: list
    dir_in: np.ndarray
    dir_out: np.ndarray


def _unit(d: np.ndarray) -> np.ndarray:
    # rescale first so subnormal steps do not underflow to a zero norm
    v = d / np.abs(d).max()
    return v / np.linalg.norm(v)


def _on_domain_boundary(p) -> bool:
    return bool(np.any(np.abs(p) == 1.0))


def _curve_runs(path: np.ndarray, closed: bool, resolution: int) -> list[_Run]:
    runs: list[_Run] = []
    last_seg = len(path) - 2
    for s in range(len(path) - 1):
        a, b = path[s], path[s + 1]
        d = b - a
        direction = _unit(d)
        walk = segment_walk(a, b, resolution)
        for n, (cube, t0, t1) in enumerate(walk):
            if t0 == t1:
                # lone end point; kept only at the two ends of an open curve
                at_start = not closed and s == 0 and n == 0
                at_end = not closed and s == last_seg and n == len(walk) - 1
                if not (at_start or at_end):
                    continue
            p0 = a if t0 == 0.0 else (b if t0 == 1.0 else a + t0 * d)
            p1 = b if t1 == 1.0 else (a if t1 == 0.0 else a + t1 * d)
            if runs and runs[-1].cube == cube:
                run = runs[-1]
                if not np.array_equal(run.points[-1], p0):
                    run.points.append(p0)
                if not np.array_equal(run.points[-1], p1):
                    run.points.append(p1)
                run.dir_out = direction
            else:
                pts = [p0] if np.array_equal(p0, p1) else [p0, p1]
                runs.append(_Run(cube, pts, direction, direction))
    if closed and len(runs) > 1 and runs[0].cube == runs[-1].cube:
        last = runs.pop()
        first = runs[0]
        pts = last.points + first.points[1:] if np.array_equal(last.points[-1], first.points[0]) else last.points + first.points
        runs[0] = _Run(first.cube, pts, last.dir_in, first.dir_out)
    return runs


def _face(c0, c1):
    """``(higher cube, axis)`` of the face shared by two face-adjacent cubes, else None."""
    diff = np.subtract(c1, c0)
    if np.abs(diff).sum() != 1:
        return None
    axis = int(np.flatnonzero(diff)[0])
    return (tuple(c1) if diff[axis] > 0 else tuple(c0)), axis


def truncate(curves: CurveSet, resolution: int, chord_tolerance: float | None = None):
    """Per-cube truncations and the set of crossed faces.

    Returns ``(truncations, faces)`` where ``truncations`` maps cube index to
    :class:`CubeTruncation` and ``faces`` is a set of ``(cube, axis)`` keys
    naming the negative-axis face of ``cube``.
    """
    resolution = G._check_resolution(resolution)
    if chord_tolerance is None:
        chord_tolerance = CHORD_FRACTION * G.edge_length(resolution)
    truncs: dict[tuple, CubeTruncation] = {}
    faces: set = set()
    for cid, curve in enumerate(curves):
        poly = sample_curve(curve, chord_tolerance)
        path = np.clip(poly.path(), -1.0, 1.0)
        closed = bool(curve.closed or poly.closed)
        runs = _curve_runs(path, closed, resolution)
        for k, run in enumerate(runs):
            tr = truncs.setdefault(run.cube, CubeTruncation(run.cube))
            tr.runs.append(np.array(run.points))
            tr.curve_ids.add(cid)
        if not closed:
            for run, p in ((runs[0], path[0]), (runs[-1], path[-1])):
                if not _on_domain_boundary(p):
                    truncs[run.cube].endpoints.append(np.array(p))
        pairs = list(zip(runs[:-1], runs[1:]))
        if closed and len(runs) > 1:
            pairs.append((runs[-1], runs[0]))
        for r0, r1 in pairs:
            q = np.array(r0.points[-1])
            crossing = FaceCrossing(q, r0.dir_out)
            truncs[r0.cube].crossings.append(crossing)
            truncs[r1.cube].crossings.append(crossing)
            face = _face(r0.cube, r1.cube)
            if face is None:
                log.debug("curve %d passes a grid edge/corner between %s and %s", cid, r0.cube, r1.cube)
            else:
                faces.add(face)
    return truncs, faces


def junction_fraction(curves: CurveSet, resolution: int, chord_tolerance: float | None = None) -> float:
    """Fraction of occupied cubes holding pieces of two or more distinct curves."""
    truncs, _ = truncate(curves, resolution, chord_tolerance)
    return truncation_junction_fraction(truncs)


def truncation_junction_fraction(truncs) -> float:
    if not truncs:
        return 0.0
    return sum(len(t.curve_ids) >= 2 for t in truncs.values()) / len(truncs)


# -- cube points ------------------------------------------------------------

def _fsum_mean(points) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    return np.array([math.fsum(pts[:, d]) for d in range(3)]) / len(pts)


def run_midpoint(run) -> np.ndarray:
    """Arc-length midpoint of an ordered point run."""
    pts = np.asarray(run, dtype=np.float64).reshape(-1, 3)
    if len(pts) == 1:
        return pts[0].copy()
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    half = 0.5 * cum[-1]
    if half == 0:
        return pts[0].copy()
    k = int(np.searchsorted(cum, half, side="right") - 1)
    k = min(k, len(seg) - 1)
    f = (half - cum[k]) / seg[k] if seg[k] > 0 else 0.0
    return pts[k] + f * (pts[k + 1] - pts[k])


def _clamp(p, index, resolution):
    lo, hi = G.cube_extent(index, resolution)
    return np.clip(p, lo, hi)


def cube_point_midpoint(trunc: CubeTruncation, resolution: int | None = None) -> np.ndarray:
    """Endpoint if the cube holds one (mean of several), else mean of run midpoints."""
    if not trunc.runs and not trunc.endpoints:
        raise ValueError("empty truncation")
    if trunc.endpoints:
        p = _fsum_mean(trunc.endpoints)
    else:
        p = _fsum_mean([run_midpoint(r) for r in trunc.runs])
    if resolution is not None:
        p = _clamp(p, trunc.index, resolution)
    return p


def qef_objective(x, crossings, lam: float) -> float:
    """Penalized QEF value with the per-crossing line parameters minimized out."""
    x = np.asarray(x, dtype=np.float64)
    total = 0.0
    for c in crossings:
        d = x - c.position
        td = float(c.tangent @ d)
        total += float(d @ d) - td * td / (1.0 + lam)
    return total


def cube_point_qef(crossings, lam: float, extent=None) -> np.ndarray:
    """Minimize sum ||x - p_i - a_i t_i||^2 + lam * sum a_i^2 over x and a_i.

    With ``a_i = t_i . (x - p_i) / (1 + lam)`` substituted the normal
    equations are a 3x3 system.  The result is clamped to ``extent`` when given.
    """
    if not crossings:
        raise QEFError("QEF needs at least one face crossing")
    if lam < 0:
        raise QEFError("lambda must be >= 0")
    A = np.zeros((3, 3))
    rhs = np.zeros(3)
    for c in crossings:
        t = np.asarray(c.tangent, dtype=np.float64)
        M = np.eye(3) - np.outer(t, t) / (1.0 + lam)
        A += M
        rhs += M @ np.asarray(c.position, dtype=np.float64)
    if np.linalg.cond(A) > 1e12:
        raise QEFError("singular QEF system (parallel tangents); use lambda > 0")
    x = np.linalg.solve(A, rhs)
    if extent is not None:
        x = np.clip(x, extent[0], extent[1])
    return x


# -- voxelize ---------------------------------------------------------------

def voxelize(
    curves: CurveSet,
    resolution: int,
    point_rule="midpoint",
    chord_tolerance: float | None = None,
) -> G.NerveGrid:
    truncs, faces = truncate(curves, resolution, chord_tolerance)
    return grid_from_truncations(truncs, faces, resolution, point_rule)


def grid_from_truncations(truncs, faces, resolution: int, point_rule="midpoint") -> G.NerveGrid:
    rule = parse_point_rule(point_rule)
    r = G._check_resolution(resolution)
    occ = np.zeros((r, r, r), dtype=bool)
    ori = np.zeros((r, r, r, 3), dtype=bool)
    pts = G.cube_centers(r)
    for idx, tr in truncs.items():
        occ[idx] = True
        if rule.name == "qef" and tr.crossings:
            p = cube_point_qef(tr.crossings, rule.lam, G.cube_extent(idx, r))
        else:
            p = cube_point_midpoint(tr, r)
        pts[idx] = p
    for cube, axis in faces:
        ori[cube + (axis,)] = True
    return G.NerveGrid(r, occ, ori, pts)
