"""Seeded corruption of edge grids, standing in for network prediction error."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .grid import CubeMask, GridError, NerveGrid, cube_centers, cube_extents, repair_orientations


@dataclass(frozen=True)
class PerturbSpec:
    point_sigma: float = 0.0
    occ_fp: float = 0.0
    occ_fn: float = 0.0
    orient_flip: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not self.point_sigma >= 0:
            raise ValueError("point_sigma must be >= 0")
        for name in ("occ_fp", "occ_fn", "orient_flip"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {p}")

    @property
    def is_identity(self) -> bool:
        return self.point_sigma == 0 and self.occ_fp == 0 and self.occ_fn == 0 and self.orient_flip == 0


def band_mask(grid: NerveGrid, width: int = 1) -> CubeMask:
    """Occupied cubes dilated by ``width`` cubes (26-connected); a stand-in surface mask."""
    flags = grid.occupancy
    if width > 0 and flags.any():
        flags = ndimage.binary_dilation(flags, structure=np.ones((3, 3, 3), dtype=bool), iterations=width)
    return CubeMask(grid.resolution, flags)


def perturb(grid: NerveGrid, spec: PerturbSpec, surface_mask: CubeMask | None = None) -> NerveGrid:
    """Flip occupancy and face flags, jitter points, then repair invariants.

    Each attribute class draws from its own child stream of ``spec.seed``
    and always draws a full-size array, so changing one probability never
    shifts the random numbers used by another.
    """
    r = grid.resolution
    if surface_mask is None:
        surface_mask = band_mask(grid)
    if surface_mask.resolution != r:
        raise GridError("surface mask resolution differs from grid resolution")
    fn_rng, fp_rng, ori_rng, pt_rng = (
        np.random.default_rng(s) for s in np.random.SeedSequence(spec.seed).spawn(4)
    )
    occ = grid.occupancy.copy()
    drop = fn_rng.random(occ.shape) < spec.occ_fn
    add = (fp_rng.random(occ.shape) < spec.occ_fp) & surface_mask.flags & ~grid.occupancy
    occ = (occ & ~drop) | add

    ori = grid.orientations ^ (ori_rng.random(grid.orientations.shape) < spec.orient_flip)
    ori = repair_orientations(ori, occ)

    noise = pt_rng.standard_normal(grid.points.shape) * spec.point_sigma
    lo, hi = cube_extents(r)
    pts = np.where(occ[..., None], np.clip(grid.points + noise, lo, hi), cube_centers(r))
    return NerveGrid(r, occ, ori, pts)
