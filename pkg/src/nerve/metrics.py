"""Point-set distances and masked grid scores."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from .curves import sample_uniform
from .grid import CubeMask, NerveGrid

# pair count above which nearest neighbours come from a k-d tree
BRUTE_FORCE_LIMIT = 2_000_000
CHUNK = 4096
DEFAULT_SAMPLES = 512


class MetricError(ValueError):
    pass


def _as_points(x, name) -> np.ndarray:
    pts = np.asarray(x, dtype=np.float64).reshape(-1, 3)
    if not len(pts):
        raise MetricError(f"{name} is empty")
    return pts


def _sqdist(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    dx = p[:, None, 0] - q[None, :, 0]
    dy = p[:, None, 1] - q[None, :, 1]
    dz = p[:, None, 2] - q[None, :, 2]
    return dx * dx + dy * dy + dz * dz


def nearest_sqdist(src: np.ndarray, dst: np.ndarray, method: str = "auto") -> np.ndarray:
    """Squared distance from each point of ``src`` to its nearest point in ``dst``.

    Both methods produce bit-identical results: the tree only chooses the
    neighbour, the distance itself is always recomputed with the same
    arithmetic as the brute-force path.
    """
    if method == "auto":
        method = "brute" if len(src) * len(dst) <= BRUTE_FORCE_LIMIT else "tree"
    if method == "brute":
        out = np.empty(len(src))
        for s in range(0, len(src), CHUNK):
            out[s : s + CHUNK] = _sqdist(src[s : s + CHUNK], dst).min(axis=1)
        return out
    if method == "tree":
        _, idx = cKDTree(dst).query(src, k=1)
        q = dst[idx]
        dx, dy, dz = (src[:, 0] - q[:, 0]), (src[:, 1] - q[:, 1]), (src[:, 2] - q[:, 2])
        return dx * dx + dy * dy + dz * dz
    raise ValueError(f"unknown method {method!r}")


def chamfer(X, Y, method: str = "auto") -> float:
    """Mean squared nearest distance X->Y plus Y->X."""
    X = _as_points(X, "X")
    Y = _as_points(Y, "Y")
    a = nearest_sqdist(X, Y, method)
    b = nearest_sqdist(Y, X, method)
    return math.fsum(a) / len(X) + math.fsum(b) / len(Y)


def hausdorff_avg(X, Y, method: str = "auto") -> float:
    """Mean of the two directed Hausdorff distances."""
    X = _as_points(X, "X")
    Y = _as_points(Y, "Y")
    a = math.sqrt(float(nearest_sqdist(X, Y, method).max()))
    b = math.sqrt(float(nearest_sqdist(Y, X, method).max()))
    return 0.5 * (a + b)


@dataclass
class GridReport:
    R_o: Optional[float]
    P_o: Optional[float]
    C_e: Optional[float]
    D_p: Optional[float]

    def as_dict(self) -> dict:
        return asdict(self)


def _ratio(num: int, den: int) -> Optional[float]:
    return None if den == 0 else num / den


def _mask_flags(mask, resolution, default) -> np.ndarray:
    if mask is None:
        return default
    if isinstance(mask, CubeMask):
        if mask.resolution != resolution:
            raise MetricError("mask resolution differs from grid resolution")
        return mask.flags
    flags = np.asarray(mask, dtype=bool)
    if flags.shape != (resolution,) * 3:
        raise MetricError("mask shape differs from grid shape")
    return flags


def grid_report(
    pred: NerveGrid,
    gt: NerveGrid,
    mask_o=None,
    mask_e=None,
    mask_p=None,
) -> GridReport:
    """Occupancy recall/precision in ``mask_o`` (default: all cubes), orientation
    correctness in ``mask_e`` and point error in ``mask_p`` (default: GT-occupied cubes).

    A metric whose denominator is empty is reported as ``None``.
    """
    if pred.resolution != gt.resolution:
        raise MetricError(f"resolution mismatch: {pred.resolution} vs {gt.resolution}")
    r = gt.resolution
    mo = _mask_flags(mask_o, r, np.ones((r, r, r), dtype=bool))
    me = _mask_flags(mask_e, r, gt.occupancy)
    mp = _mask_flags(mask_p, r, gt.occupancy)

    po = pred.occupancy[mo]
    go = gt.occupancy[mo]
    tp = int(np.sum(po & go))
    fn = int(np.sum(~po & go))
    fp = int(np.sum(po & ~go))

    same = np.all(pred.orientations == gt.orientations, axis=-1)[me]
    c_e = _ratio(int(same.sum()), int(same.size))

    d = pred.points[mp] - gt.points[mp]
    dist = np.sqrt(np.sum(d * d, axis=1))
    d_p = math.fsum(dist) / len(dist) if len(dist) else None
    return GridReport(_ratio(tp, tp + fn), _ratio(tp, tp + fp), c_e, d_p)


def _curve_samples(curves, samples_per_curve: int) -> np.ndarray:
    out = []
    for c in curves:
        inner = getattr(c, "curve", c)
        out.append(sample_uniform(inner, samples_per_curve))
    if not out:
        raise MetricError("no curves to sample")
    return np.vstack(out)


def curve_cd(fitted, gt, samples_per_curve: int = DEFAULT_SAMPLES) -> tuple[float, float]:
    """(CD, HD) between densely sampled fitted curves and ground-truth curves."""
    X = _curve_samples(list(fitted), samples_per_curve)
    Y = _curve_samples(list(gt), samples_per_curve)
    return chamfer(X, Y), hausdorff_avg(X, Y)
