"""Parametric curves from traced PWL paths."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import bspline
from .curves import BSplineCurve, Circle3D, curve_from_json
from .pwl import CurvePath, PwlGraph

CIRCLE_THRESHOLD = 0.001
DEGREE = 3


class FitError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ParametricCurve:
    curve: Union[BSplineCurve, Circle3D]
    residual: float

    @property
    def kind(self) -> str:
        return "circle" if isinstance(self.curve, Circle3D) else "bspline"

    def to_json(self) -> dict:
        d = self.curve.to_json()
        d["residual"] = float(self.residual)
        return d

    @classmethod
    def from_json(cls, obj: dict) -> ParametricCurve:
        return cls(curve_from_json(obj), float(obj.get("residual", 0.0)))


def chord_length_params(points: np.ndarray) -> np.ndarray:
    seg = np.linalg.norm(np.diff(points, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    return s / s[-1]


def interior_knot_count(n_points: int) -> int:
    return max(0, min(n_points // 2, n_points - 4))


def fit_bspline(points, params=None) -> ParametricCurve:
    """Least-squares clamped cubic B-spline with both end points pinned.

    Interior knots: ``floor(n/2)`` clamped to ``[0, n-4]``, uniform in (0, 1).
    Data parameters default to normalized chord length.  The first and last
    control points are fixed to the end points and removed from the
    unknowns; the remaining ones are solved as a correction to the straight
    chord (minimum-norm when the system is underdetermined).
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    n = len(pts)
    if n < 2:
        raise FitError("need at least 2 points")
    if np.ptp(pts, axis=0).max() == 0:
        raise FitError("all points coincide")
    if params is None:
        u = chord_length_params(pts)
    else:
        u = np.asarray(params, dtype=np.float64)
        if u.shape != (n,) or u[0] != 0.0 or u[-1] != 1.0 or np.any(np.diff(u) < 0):
            raise FitError("params must be nondecreasing from 0 to 1, one per point")
    knots = bspline.clamped_knots(interior_knot_count(n), DEGREE)
    B = bspline.basis_matrix(knots, DEGREE, u)
    xi = bspline.greville(knots, DEGREE)
    chord = pts[0] + xi[:, None] * (pts[-1] - pts[0])
    ctrl = chord.copy()
    target = pts - B @ chord
    free = B[:, 1:-1]
    if free.shape[1]:
        delta, *_ = np.linalg.lstsq(free, target, rcond=None)
        ctrl[1:-1] += delta
    ctrl[0] = pts[0]
    ctrl[-1] = pts[-1]
    fitted = B @ ctrl
    residual = math.sqrt(float(np.mean(np.sum((fitted - pts) ** 2, axis=1))))
    return ParametricCurve(BSplineCurve(ctrl, knots, DEGREE), residual)


def fit_circle(points) -> ParametricCurve:
    """PCA plane, algebraic 2D circle fit in that plane, lifted back to 3D.

    The residual is the RMS 3D distance of the points to the circle, i.e.
    radial and out-of-plane errors combined.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    if len(pts) < 3:
        raise FitError("circle fit needs at least 3 points")
    centroid = pts.mean(axis=0)
    centered = pts - centroid
    _, sv, vt = np.linalg.svd(centered, full_matrices=False)
    if sv[0] == 0 or sv[1] <= 1e-12 * sv[0]:
        raise FitError("points are collinear; no plane to fit a circle in")
    u, v, normal = vt[0], vt[1], np.cross(vt[0], vt[1])
    x = centered @ u
    y = centered @ v
    A = np.stack([2 * x, 2 * y, np.ones_like(x)], axis=1)
    (a, b, c), *_ = np.linalg.lstsq(A, x * x + y * y, rcond=None)
    r2 = c + a * a + b * b
    if not r2 > 0:
        raise FitError("degenerate circle fit")
    radius = math.sqrt(r2)
    center = centroid + a * u + b * v
    # normal sign fixed so its largest component is positive
    if normal[np.argmax(np.abs(normal))] < 0:
        normal = -normal
    normal = normal / np.linalg.norm(normal)
    rel = pts - center
    h = rel @ normal
    rho = np.linalg.norm(rel - h[:, None] * normal, axis=1)
    residual = math.sqrt(float(np.mean((rho - radius) ** 2 + h**2)))
    return ParametricCurve(Circle3D(center, radius, normal), residual)


def fit_path(path: CurvePath, graph: PwlGraph, circle_threshold: float = CIRCLE_THRESHOLD) -> ParametricCurve:
    return fit_points(path.points(graph), path.closed, circle_threshold)


def fit_points(points, closed: bool, circle_threshold: float = CIRCLE_THRESHOLD) -> ParametricCurve:
    """Circle first for closed loops (kept if residual < threshold), else a B-spline.

    A closed loop falling back to a spline is cut at its first vertex, which
    then appears at both ends.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    if closed:
        try:
            circle = fit_circle(pts)
        except FitError:
            circle = None
        if circle is not None and circle.residual < circle_threshold:
            return circle
        pts = np.vstack([pts, pts[:1]])
    return fit_bspline(pts)


def eval_curve(curve, t) -> np.ndarray:
    """Point(s) on a fitted or input curve at parameter(s) ``t`` in [0, 1]."""
    c = curve.curve if isinstance(curve, ParametricCurve) else curve
    out = c.evaluate(t)
    return out[0] if np.ndim(t) == 0 else out


def sample_fitted(curve, count: int) -> np.ndarray:
    if count < 2:
        raise ValueError("count must be >= 2")
    return eval_curve(curve, np.linspace(0.0, 1.0, count))


def fitted_to_json(curves: list[ParametricCurve]) -> dict:
    return {"curves": [c.to_json() for c in curves]}


def fitted_from_json(obj) -> list[ParametricCurve]:
    if isinstance(obj, (str, bytes)):
        obj = json.loads(obj)
    return [ParametricCurve.from_json(c) for c in obj["curves"]]
