"""Bundled synthetic CAD-like curve sets used by the round-trip harness."""

from __future__ import annotations

import math

import numpy as np

from .bspline import clamped_knots
from .curves import BSplineCurve, Circle3D, CurveSet, LineSegment, Polyline


def _rotation(axis, angle) -> np.ndarray:
    axis = np.asarray(axis, dtype=np.float64)
    axis = axis / np.linalg.norm(axis)
    k = np.array([[0, -axis[2], axis[1]], [axis[2], 0, -axis[0]], [-axis[1], axis[0], 0]])
    return np.eye(3) + math.sin(angle) * k + (1 - math.cos(angle)) * (k @ k)


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    return v / np.linalg.norm(v)


BOX_EDGES = [(0, 1), (2, 3), (4, 5), (6, 7), (0, 2), (1, 3), (4, 6), (5, 7), (0, 4), (1, 5), (2, 6), (3, 7)]


def box_wireframe(lo, hi, rotation=None, center=None) -> CurveSet:
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    corners = np.array([[(lo, hi)[(n >> 2) & 1][0], (lo, hi)[(n >> 1) & 1][1], (lo, hi)[n & 1][2]] for n in range(8)])
    if rotation is not None:
        mid = 0.5 * (lo + hi)
        corners = (corners - mid) @ np.asarray(rotation).T + (mid if center is None else center)
    return CurveSet([LineSegment(corners[a], corners[b]) for a, b in BOX_EDGES])


def cube_wireframe(half: float = 0.75) -> CurveSet:
    return box_wireframe([-half] * 3, [half] * 3)


def polygon(vertices) -> CurveSet:
    v = np.asarray(vertices, dtype=np.float64)
    return CurveSet([LineSegment(v[i], v[(i + 1) % len(v)]) for i in range(len(v))])


def cylinder_wireframe(radius=0.5, half_height=0.5, n_lines=4, axis=(0, 0, 1), center=(0, 0, 0)) -> CurveSet:
    axis = _unit(axis)
    center = np.asarray(center, dtype=np.float64)
    bottom = Circle3D(center - half_height * axis, radius, axis)
    top = Circle3D(center + half_height * axis, radius, axis)
    curves = [bottom, top]
    for k in range(n_lines):
        theta = 2 * math.pi * (k + 0.125) / n_lines
        p0 = bottom.at_angle(theta)[0]
        curves.append(LineSegment(p0, p0 + 2 * half_height * axis))
    return CurveSet(curves)


def theta_junction(radius=0.6, normal=(0.2, 0.3, 1.0), center=(0.05, -0.03, 0.02)) -> CurveSet:
    circle = Circle3D(center, radius, _unit(normal))
    a, b = circle.at_angle(np.array([0.3, 0.3 + math.pi]))
    return CurveSet([circle, LineSegment(a, b)])


def open_spline(control_points) -> BSplineCurve:
    cp = np.asarray(control_points, dtype=np.float64)
    return BSplineCurve(cp, clamped_knots(len(cp) - 4, 3), 3)


def helix_spline(turns=1.5, radius=0.45, height=1.2, n_ctrl=14) -> BSplineCurve:
    # control points on a slightly inflated helix; the spline is helix-like
    t = np.linspace(0.0, 1.0, n_ctrl)
    ang = 2 * math.pi * turns * t
    cp = np.stack([radius * np.cos(ang), radius * np.sin(ang), -0.5 * height + height * t], axis=1)
    return open_spline(cp)


def synthetic_corpus() -> dict[str, CurveSet]:
    """Named curve sets whose curves stay well apart except at shared end points."""
    shapes: dict[str, CurveSet] = {}
    shapes["cube_aligned"] = cube_wireframe(0.75)
    shapes["box_offset"] = box_wireframe([-0.61, -0.43, -0.31], [0.52, 0.68, 0.37])
    shapes["box_rotated_a"] = box_wireframe([-0.4, -0.35, -0.3], [0.4, 0.35, 0.3], _rotation([1, 2, 3], 0.6))
    shapes["box_rotated_b"] = box_wireframe([-0.5, -0.25, -0.45], [0.5, 0.25, 0.45], _rotation([-1, 1, 0.5], 1.1), [0.05, 0.1, -0.02])
    shapes["box_tall"] = box_wireframe([-0.27, -0.83, -0.22], [0.33, 0.79, 0.29], _rotation([0, 0, 1], 0.35))

    shapes["circle_z"] = CurveSet([Circle3D([0.02, -0.01, 0.03], 0.6, [0, 0, 1])])
    shapes["circle_x"] = CurveSet([Circle3D([0.1, 0.15, -0.2], 0.5, [1, 0, 0])])
    shapes["circle_diag"] = CurveSet([Circle3D([-0.05, 0.04, 0.0], 0.55, _unit([1, 1, 1]))])
    shapes["circle_tilted"] = CurveSet([Circle3D([0.2, -0.1, 0.15], 0.4, _unit([1, 2, 0.5]))])
    shapes["circle_large"] = CurveSet([Circle3D([0.0, 0.03, -0.02], 0.75, _unit([0.3, -0.8, 0.5]))])
    shapes["circles_pair"] = CurveSet(
        [
            Circle3D([-0.4, 0.0, 0.1], 0.33, _unit([0.1, 0.2, 1.0])),
            Circle3D([0.45, 0.05, -0.1], 0.3, _unit([1.0, -0.2, 0.3])),
        ]
    )

    shapes["cylinder"] = cylinder_wireframe(0.5, 0.55, 4, _unit([0.1, -0.2, 1.0]), [0.02, 0.01, -0.03])
    shapes["theta"] = theta_junction()

    shapes["spline_s"] = CurveSet([open_spline([[-0.8, -0.5, 0.0], [-0.4, 0.6, 0.2], [0.0, -0.6, -0.1], [0.4, 0.5, 0.1], [0.8, -0.3, 0.3]])])
    shapes["spline_arch"] = CurveSet([open_spline([[-0.7, -0.6, -0.5], [-0.5, 0.7, -0.2], [0.1, 0.8, 0.3], [0.6, 0.4, 0.6], [0.75, -0.6, 0.2]])])
    shapes["spline_helix"] = CurveSet([helix_spline()])
    shapes["spline_wave"] = CurveSet(
        [open_spline([[x, 0.35 * math.sin(3 * x), 0.25 * math.cos(2 * x)] for x in np.linspace(-0.8, 0.8, 9)])]
    )
    shapes["splines_pair"] = CurveSet(
        [
            open_spline([[-0.8, 0.5, -0.4], [-0.3, 0.8, 0.0], [0.2, 0.2, 0.3], [0.7, 0.6, 0.5]]),
            open_spline([[-0.7, -0.3, 0.5], [-0.2, -0.8, 0.2], [0.3, -0.2, -0.4], [0.8, -0.6, -0.2], [0.6, -0.1, 0.6]]),
        ]
    )

    shapes["triangle"] = polygon([[-0.6, -0.5, -0.2], [0.7, -0.3, 0.1], [0.0, 0.65, 0.4]])
    shapes["tetrahedron"] = CurveSet(
        [
            LineSegment(a, b)
            for a, b in _pairs(np.array([[0.57, 0.52, 0.61], [-0.55, -0.6, 0.47], [-0.5, 0.58, -0.56], [0.62, -0.49, -0.53]]))
        ]
    )
    shapes["square_loop"] = CurveSet(
        [Polyline(np.array([[-0.5, -0.5, 0.0], [0.5, -0.5, 0.0], [0.5, 0.5, 0.0], [-0.5, 0.5, 0.0]]) @ _rotation([1, 0.4, 0], 0.5).T, closed=True)]
    )
    shapes["spline_and_line"] = CurveSet(
        [
            open_spline([[-0.6, -0.6, 0.0], [-0.2, 0.3, 0.4], [0.3, 0.5, -0.3], [0.6, 0.6, 0.1]]),
            LineSegment([0.6, 0.6, 0.1], [0.6, -0.6, -0.2]),
            LineSegment([-0.6, -0.6, 0.0], [0.6, -0.6, -0.2]),
        ]
    )
    return shapes


def _pairs(points):
    return [(points[i], points[j]) for i in range(len(points)) for j in range(i + 1, len(points))]


def near_parallel_corpus(spacing_cubes=(0.3, 0.45, 0.6, 0.75, 0.9), resolution: int = 32) -> dict[str, CurveSet]:
    """Pairs of curves running closer than one cube edge at ``resolution``."""
    l = 2.0 / resolution
    shapes = {}
    direction = _unit([1.0, 0.37, 0.21])
    side = _unit(np.cross(direction, [0.2, -0.4, 1.0]))
    for n, s in enumerate(spacing_cubes):
        gap = s * l
        base = np.array([-0.02, 0.03 * n, -0.05 * n])
        a0 = base - 0.7 * direction
        a1 = base + 0.7 * direction
        shapes[f"lines_{s:g}l"] = CurveSet([LineSegment(a0, a1), LineSegment(a0 + gap * side, a1 + gap * side)])
        normal = _unit([0.3, 0.1 * n + 0.2, 1.0])
        shapes[f"rings_{s:g}l"] = CurveSet(
            [Circle3D([0.01 * n, -0.02, 0.03], 0.55, normal), Circle3D([0.01 * n, -0.02, 0.03], 0.55 + gap, normal)]
        )
    return shapes
