"""Clamped B-spline primitives: knot vectors, basis matrices, de Boor evaluation."""

from __future__ import annotations

import numpy as np


def clamped_knots(n_interior: int, degree: int = 3) -> np.ndarray:
    """Clamped knot vector on [0, 1] with ``n_interior`` uniformly spaced interior knots."""
    interior = np.arange(1, n_interior + 1, dtype=np.float64) / (n_interior + 1)
    return np.concatenate([np.zeros(degree + 1), interior, np.ones(degree + 1)])


def is_clamped(knots, degree: int) -> bool:
    k = np.asarray(knots, dtype=np.float64)
    if k.ndim != 1 or len(k) < 2 * (degree + 1):
        return False
    if np.any(np.diff(k) < 0):
        return False
    return bool(np.all(k[: degree + 1] == k[0]) and np.all(k[-degree - 1 :] == k[-1]) and k[-1] > k[0])


def find_span(knots: np.ndarray, degree: int, t: float) -> int:
    """Index ``s`` with ``knots[s] <= t < knots[s+1]``; the last nonempty span at the right end."""
    n_ctrl = len(knots) - degree - 1
    if t >= knots[n_ctrl]:
        s = n_ctrl - 1
        while knots[s] == knots[s + 1]:
            s -= 1
        return s
    if t <= knots[degree]:
        s = degree
        while knots[s] == knots[s + 1]:
            s += 1
        return s
    return int(np.searchsorted(knots, t, side="right") - 1)


def de_boor(knots, control_points, degree: int, t: float) -> np.ndarray:
    knots = np.asarray(knots, dtype=np.float64)
    ctrl = np.asarray(control_points, dtype=np.float64)
    t = float(np.clip(t, knots[degree], knots[len(knots) - degree - 1]))
    s = find_span(knots, degree, t)
    d = [ctrl[j + s - degree].copy() for j in range(degree + 1)]
    for r in range(1, degree + 1):
        for j in range(degree, r - 1, -1):
            i = j + s - degree
            denom = knots[i + degree + 1 - r] - knots[i]
            alpha = 0.0 if denom == 0 else (t - knots[i]) / denom
            d[j] = (1.0 - alpha) * d[j - 1] + alpha * d[j]
    return d[degree]


def evaluate(knots, control_points, degree: int, params) -> np.ndarray:
    params = np.atleast_1d(np.asarray(params, dtype=np.float64))
    return np.array([de_boor(knots, control_points, degree, t) for t in params]).reshape(len(params), -1)


def basis_matrix(knots, degree: int, params) -> np.ndarray:
    """Dense ``(len(params), n_ctrl)`` matrix of basis values by the Cox-de Boor recursion."""
    knots = np.asarray(knots, dtype=np.float64)
    params = np.atleast_1d(np.asarray(params, dtype=np.float64))
    n_ctrl = len(knots) - degree - 1
    out = np.zeros((len(params), n_ctrl))
    for row, t in enumerate(params):
        s = find_span(knots, degree, t)
        # nonzero basis functions N_{s-degree..s} (The NURBS Book, A2.2)
        n = np.zeros(degree + 1)
        left = np.zeros(degree + 1)
        right = np.zeros(degree + 1)
        n[0] = 1.0
        for j in range(1, degree + 1):
            left[j] = t - knots[s + 1 - j]
            right[j] = knots[s + j] - t
            saved = 0.0
            for r in range(j):
                temp = n[r] / (right[r + 1] + left[j - r])
                n[r] = saved + right[r + 1] * temp
                saved = left[j - r] * temp
            n[j] = saved
        out[row, s - degree : s + 1] = n
    return out


def greville(knots, degree: int) -> np.ndarray:
    """Greville abscissae; placing control points of a line there reproduces it exactly."""
    knots = np.asarray(knots, dtype=np.float64)
    n_ctrl = len(knots) - degree - 1
    return np.array([knots[i + 1 : i + degree + 1].mean() for i in range(n_ctrl)])
