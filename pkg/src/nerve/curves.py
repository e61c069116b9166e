"""Input curve types and their CurveSet JSON form."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import bspline

DOMAIN_TOL = 1e-9


class CurveError(ValueError):
    """Invalid or degenerate curve geometry, or malformed CurveSet JSON."""


def _vec(x, name) -> np.ndarray:
    v = np.asarray(x, dtype=np.float64)
    if v.shape != (3,) or not np.all(np.isfinite(v)):
        raise CurveError(f"{name} must be a finite 3D point, got {x!r}")
    return v


def _check_domain(points, what):
    pts = np.asarray(points, dtype=np.float64)
    if np.any(np.abs(pts) > 1.0 + DOMAIN_TOL):
        raise CurveError(f"{what} leaves [-1, 1]^3")


def plane_frame(normal) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic orthonormal in-plane axes ``(u, v)`` with ``u x v = normal``."""
    n = np.asarray(normal, dtype=np.float64)
    helper = np.zeros(3)
    helper[int(np.argmin(np.abs(n)))] = 1.0
    u = np.cross(n, helper)
    u /= np.linalg.norm(u)
    v = np.cross(n, u)
    return u, v


@dataclass(frozen=True, eq=False)
class LineSegment:
    a: np.ndarray
    b: np.ndarray

    closed = False

    def __post_init__(self):
        object.__setattr__(self, "a", _vec(self.a, "a"))
        object.__setattr__(self, "b", _vec(self.b, "b"))

    def validate(self):
        if np.array_equal(self.a, self.b):
            raise CurveError("zero-length line segment")
        _check_domain([self.a, self.b], "line segment")

    def evaluate(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=np.float64))[:, None]
        return (1.0 - t) * self.a + t * self.b

    def to_json(self) -> dict:
        return {"type": "line", "a": self.a.tolist(), "b": self.b.tolist()}


@dataclass(frozen=True, eq=False)
class Circle3D:
    center: np.ndarray
    radius: float
    normal: np.ndarray

    closed = True

    def __post_init__(self):
        object.__setattr__(self, "center", _vec(self.center, "center"))
        object.__setattr__(self, "normal", _vec(self.normal, "normal"))
        object.__setattr__(self, "radius", float(self.radius))

    def validate(self):
        if not self.radius > 0:
            raise CurveError(f"circle radius must be > 0, got {self.radius}")
        if abs(np.linalg.norm(self.normal) - 1.0) > 1e-9:
            raise CurveError("circle normal must be unit length")
        reach = self.radius * np.sqrt(np.clip(1.0 - self.normal**2, 0.0, None))
        _check_domain([self.center - reach, self.center + reach], "circle")

    def frame(self) -> tuple[np.ndarray, np.ndarray]:
        return plane_frame(self.normal)

    def at_angle(self, theta) -> np.ndarray:
        u, v = self.frame()
        theta = np.atleast_1d(np.asarray(theta, dtype=np.float64))[:, None]
        return self.center + self.radius * (np.cos(theta) * u + np.sin(theta) * v)

    def evaluate(self, t) -> np.ndarray:
        return self.at_angle(2.0 * math.pi * np.asarray(t, dtype=np.float64))

    def to_json(self) -> dict:
        return {
            "type": "circle",
            "center": self.center.tolist(),
            "radius": self.radius,
            "normal": self.normal.tolist(),
        }


@dataclass(frozen=True, eq=False)
class BSplineCurve:
    control_points: np.ndarray
    knots: np.ndarray
    degree: int = 3

    closed = False

    def __post_init__(self):
        cp = np.asarray(self.control_points, dtype=np.float64)
        if cp.ndim != 2 or cp.shape[1] != 3:
            raise CurveError("control points must be an (n, 3) array")
        object.__setattr__(self, "control_points", cp)
        object.__setattr__(self, "knots", np.asarray(self.knots, dtype=np.float64))
        object.__setattr__(self, "degree", int(self.degree))

    def validate(self):
        if self.degree != 3:
            raise CurveError(f"only cubic B-splines are supported, got degree {self.degree}")
        if len(self.knots) != len(self.control_points) + self.degree + 1:
            raise CurveError("knot count must equal control point count + degree + 1")
        if not bspline.is_clamped(self.knots, self.degree):
            raise CurveError("B-spline knot vector must be nondecreasing and clamped")
        if np.ptp(self.control_points, axis=0).max() == 0:
            raise CurveError("degenerate B-spline: all control points coincide")
        _check_domain(self.evaluate(np.linspace(0.0, 1.0, 257)), "B-spline")

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.knots[self.degree]), float(self.knots[-self.degree - 1])

    def evaluate(self, t) -> np.ndarray:
        t0, t1 = self.domain
        t = np.atleast_1d(np.asarray(t, dtype=np.float64))
        return bspline.evaluate(self.knots, self.control_points, self.degree, t0 + t * (t1 - t0))

    def to_json(self) -> dict:
        return {
            "type": "bspline",
            "degree": self.degree,
            "control_points": self.control_points.tolist(),
            "knots": self.knots.tolist(),
        }


@dataclass(frozen=True, eq=False)
class Polyline:
    vertices: np.ndarray
    closed: bool = False

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=np.float64)
        if v.ndim != 2 or v.shape[1] != 3:
            raise CurveError("polyline vertices must be an (n, 3) array")
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "closed", bool(self.closed))

    def validate(self):
        if len(self.vertices) < 2:
            raise CurveError("polyline needs at least 2 vertices")
        if np.any(np.linalg.norm(np.diff(self.path(), axis=0), axis=1) == 0):
            raise CurveError("polyline has a zero-length segment")
        _check_domain(self.vertices, "polyline")

    def path(self) -> np.ndarray:
        """Vertices with the first one repeated at the end when closed."""
        if self.closed:
            return np.vstack([self.vertices, self.vertices[:1]])
        return self.vertices

    def evaluate(self, t) -> np.ndarray:
        """Arc-length parameterization on [0, 1]."""
        pts = self.path()
        seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
        s = np.concatenate([[0.0], np.cumsum(seg)])
        s /= s[-1]
        t = np.clip(np.atleast_1d(np.asarray(t, dtype=np.float64)), 0.0, 1.0)
        return np.stack([np.interp(t, s, pts[:, d]) for d in range(3)], axis=-1)

    def to_json(self) -> dict:
        return {"type": "polyline", "vertices": self.vertices.tolist(), "closed": self.closed}


Curve = Union[LineSegment, Circle3D, BSplineCurve, Polyline]


@dataclass
class CurveSet:
    curves: list = field(default_factory=list)

    def validate(self) -> CurveSet:
        for c in self.curves:
            c.validate()
        return self

    def __len__(self):
        return len(self.curves)

    def __iter__(self):
        return iter(self.curves)

    def to_json(self) -> dict:
        return {"curves": [c.to_json() for c in self.curves]}

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def curve_from_json(obj: dict) -> Curve:
    try:
        kind = obj["type"]
        if kind == "line":
            return LineSegment(obj["a"], obj["b"])
        if kind == "circle":
            return Circle3D(obj["center"], obj["radius"], obj["normal"])
        if kind == "bspline":
            return BSplineCurve(obj["control_points"], obj["knots"], obj.get("degree", 3))
        if kind == "polyline":
            return Polyline(obj["vertices"], obj.get("closed", False))
    except (KeyError, TypeError) as exc:
        raise CurveError(f"malformed curve entry {obj!r}: {exc}") from None
    raise CurveError(f"unknown curve type {obj.get('type')!r}")


def curveset_from_json(obj) -> CurveSet:
    if isinstance(obj, (str, bytes)):
        try:
            obj = json.loads(obj)
        except json.JSONDecodeError as exc:
            raise CurveError(f"invalid JSON: {exc}") from None
    if not isinstance(obj, dict) or not isinstance(obj.get("curves"), list):
        raise CurveError('CurveSet JSON must be an object with a "curves" list')
    return CurveSet([curve_from_json(c) for c in obj["curves"]]).validate()


def load_curveset(path) -> CurveSet:
    with open(path) as fh:
        return curveset_from_json(fh.read())


def sample_uniform(curve: Curve, count: int) -> np.ndarray:
    """``count`` points at uniformly spaced parameters over the whole curve."""
    if count < 2:
        raise CurveError("count must be >= 2")
    return curve.evaluate(np.linspace(0.0, 1.0, count))
