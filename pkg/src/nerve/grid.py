"""Cube grid over [-1, 1]^3 with per-cube edge attributes.

Cube ``(i, j, k)`` spans ``[-1 + i*l, -1 + (i+1)*l]`` along x (likewise y, z),
with ``l = 2 / r``.  ``orientations[i, j, k, a]`` is the flag of the face on
the negative side of axis ``a`` of that cube, i.e. the face shared with cube
``(i, j, k) - e_a``.  Flags on the outer boundary (index 0 along ``a``) are
always false.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

MAGIC = b"NERVE1"
MAX_RESOLUTION = 1024

AXES = np.eye(3, dtype=np.int64)


class GridError(ValueError):
    """Raised for malformed grids and unreadable grid files."""


def edge_length(resolution: int) -> float:
    return 2.0 / resolution


def _check_resolution(resolution) -> int:
    if int(resolution) != resolution:
        raise GridError(f"resolution must be an integer, got {resolution!r}")
    resolution = int(resolution)
    if resolution < 2:
        raise GridError(f"resolution must be >= 2, got {resolution}")
    if resolution > MAX_RESOLUTION:
        raise GridError(f"resolution {resolution} exceeds the limit of {MAX_RESOLUTION}")
    return resolution


def plane_coord(m, resolution: int):
    """Coordinate of the m-th grid plane along any axis (m = 0 .. r)."""
    return -1.0 + 2.0 * np.asarray(m, dtype=np.float64) / resolution


def cube_extent(index, resolution: int) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(min_corner, max_corner)`` of one cube."""
    resolution = _check_resolution(resolution)
    idx = np.asarray(index, dtype=np.int64)
    if idx.shape != (3,) or np.any(idx < 0) or np.any(idx >= resolution):
        raise GridError(f"cube index {tuple(np.atleast_1d(idx))} out of range for r={resolution}")
    return plane_coord(idx, resolution), plane_coord(idx + 1, resolution)


def cube_extents(resolution: int) -> tuple[np.ndarray, np.ndarray]:
    """Min and max corners of all cubes as ``(r, r, r, 3)`` arrays."""
    m = np.arange(resolution)
    ii, jj, kk = np.meshgrid(m, m, m, indexing="ij")
    idx = np.stack([ii, jj, kk], axis=-1)
    return plane_coord(idx, resolution), plane_coord(idx + 1, resolution)


def cube_centers(resolution: int) -> np.ndarray:
    lo, hi = cube_extents(resolution)
    return 0.5 * (lo + hi)


def locate(points, resolution: int) -> np.ndarray:
    """Cube index of each point under the half-open tie-break.

    A point on an internal face belongs to the higher-index cube; a
    coordinate of exactly +1 belongs to the last cube.  Points outside
    [-1, 1]^3 raise.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.size and (np.any(~np.isfinite(pts)) or np.any(np.abs(pts) > 1.0)):
        raise GridError("point outside [-1, 1]^3")
    idx = np.floor((pts + 1.0) * (resolution / 2.0)).astype(np.int64)
    idx = np.clip(idx, 0, resolution - 1)
    # correct for rounding so the answer agrees with plane_coord exactly
    lo = plane_coord(idx, resolution)
    idx = np.where(pts < lo, idx - 1, idx)
    nxt = plane_coord(idx + 1, resolution)
    idx = np.where((pts >= nxt) & (idx < resolution - 1), idx + 1, idx)
    return idx


@dataclass(frozen=True)
class CubeMask:
    resolution: int
    flags: np.ndarray

    def __post_init__(self):
        _check_resolution(self.resolution)
        flags = np.asarray(self.flags, dtype=bool)
        if flags.shape != (self.resolution,) * 3:
            raise GridError(f"mask shape {flags.shape} does not match r={self.resolution}")
        object.__setattr__(self, "flags", flags)

    @classmethod
    def full(cls, resolution: int) -> CubeMask:
        return cls(resolution, np.ones((resolution,) * 3, dtype=bool))

    @property
    def count(self) -> int:
        return int(self.flags.sum())


def mask_from_points(points, resolution: int) -> CubeMask:
    resolution = _check_resolution(resolution)
    flags = np.zeros((resolution,) * 3, dtype=bool)
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    if len(pts):
        idx = locate(pts, resolution)
        flags[idx[:, 0], idx[:, 1], idx[:, 2]] = True
    return CubeMask(resolution, flags)


@dataclass(frozen=True, eq=False)
class NerveGrid:
    """Occupancy ``(r,r,r)`` plus per-cube orientation flags and points, both ``(r,r,r,3)``.

    Construction checks array shapes and the boundary-face rule, and requires
    every point to lie in the closed extent of its cube.  Flags that touch an
    unoccupied cube are tolerated here (predicted grids contain them) and are
    listed by :func:`inconsistent_faces`; producers in this package never
    emit them.
    """

    resolution: int
    occupancy: np.ndarray
    orientations: np.ndarray
    points: np.ndarray

    def __post_init__(self):
        r = _check_resolution(self.resolution)
        object.__setattr__(self, "resolution", r)
        occ = np.array(self.occupancy, dtype=bool)
        ori = np.array(self.orientations, dtype=bool)
        pts = np.array(self.points, dtype=np.float64)
        if occ.shape != (r, r, r):
            raise GridError(f"occupancy shape {occ.shape}, expected {(r, r, r)}")
        if ori.shape != (r, r, r, 3):
            raise GridError(f"orientations shape {ori.shape}, expected {(r, r, r, 3)}")
        if pts.shape != (r, r, r, 3):
            raise GridError(f"points shape {pts.shape}, expected {(r, r, r, 3)}")
        if ori[0, :, :, 0].any() or ori[:, 0, :, 1].any() or ori[:, :, 0, 2].any():
            raise GridError("orientation flag set on a grid-boundary face")
        if not np.all(np.isfinite(pts)):
            raise GridError("non-finite cube point")
        lo, hi = cube_extents(r)
        if np.any(pts < lo) or np.any(pts > hi):
            raise GridError("cube point outside its cube")
        for a in (occ, ori, pts):
            a.setflags(write=False)
        object.__setattr__(self, "occupancy", occ)
        object.__setattr__(self, "orientations", ori)
        object.__setattr__(self, "points", pts)

    @property
    def edge_length(self) -> float:
        return edge_length(self.resolution)

    @property
    def occupied_count(self) -> int:
        return int(self.occupancy.sum())

    def occupancy_mask(self) -> CubeMask:
        return CubeMask(self.resolution, self.occupancy)

    def __eq__(self, other):
        if not isinstance(other, NerveGrid):
            return NotImplemented
        return (
            self.resolution == other.resolution
            and np.array_equal(self.occupancy, other.occupancy)
            and np.array_equal(self.orientations, other.orientations)
            and np.array_equal(self.points, other.points)
        )

    def replace(self, **changes) -> NerveGrid:
        fields = dict(
            resolution=self.resolution,
            occupancy=self.occupancy,
            orientations=self.orientations,
            points=self.points,
        )
        fields.update(changes)
        return NerveGrid(**fields)


def new_grid(resolution: int) -> NerveGrid:
    r = _check_resolution(resolution)
    return NerveGrid(
        r,
        np.zeros((r, r, r), dtype=bool),
        np.zeros((r, r, r, 3), dtype=bool),
        cube_centers(r),
    )


def face_neighbors_occupied(occupancy: np.ndarray) -> np.ndarray:
    """``(r,r,r,3)`` bool: both cubes sharing each cube's negative face are occupied."""
    both = np.zeros(occupancy.shape + (3,), dtype=bool)
    both[1:, :, :, 0] = occupancy[1:] & occupancy[:-1]
    both[:, 1:, :, 1] = occupancy[:, 1:] & occupancy[:, :-1]
    both[:, :, 1:, 2] = occupancy[:, :, 1:] & occupancy[:, :, :-1]
    return both


def inconsistent_faces(grid: NerveGrid) -> list[tuple[tuple[int, int, int], int]]:
    """True flags whose face touches an unoccupied cube, as ``((i,j,k), axis)``."""
    bad = grid.orientations & ~face_neighbors_occupied(grid.occupancy)
    return [((int(i), int(j), int(k)), int(a)) for i, j, k, a in np.argwhere(bad)]


def repair_orientations(orientations: np.ndarray, occupancy: np.ndarray) -> np.ndarray:
    """Clear flags on boundary faces and on faces touching unoccupied cubes."""
    return np.asarray(orientations, dtype=bool) & face_neighbors_occupied(np.asarray(occupancy, dtype=bool))


# -- serialization ----------------------------------------------------------

def write_grid(grid: NerveGrid) -> bytes:
    r = grid.resolution
    return b"".join(
        [
            MAGIC,
            struct.pack("<I", r),
            grid.occupancy.astype(np.uint8).tobytes(order="C"),
            grid.orientations.astype(np.uint8).tobytes(order="C"),
            grid.points.astype("<f8").tobytes(order="C"),
        ]
    )


def read_grid(data: bytes) -> NerveGrid:
    data = bytes(data)
    if data[: len(MAGIC)] != MAGIC:
        raise GridError("not a NERVE1 grid file (bad magic)")
    off = len(MAGIC)
    if len(data) < off + 4:
        raise GridError("truncated grid file")
    (r,) = struct.unpack_from("<I", data, off)
    off += 4
    r = _check_resolution(r)
    n = r**3
    expected = off + n + 3 * n + 3 * n * 8
    if len(data) != expected:
        raise GridError(f"grid payload has {len(data)} bytes, expected {expected}")
    occ = np.frombuffer(data, dtype=np.uint8, count=n, offset=off)
    off += n
    ori = np.frombuffer(data, dtype=np.uint8, count=3 * n, offset=off)
    off += 3 * n
    pts = np.frombuffer(data, dtype="<f8", count=3 * n, offset=off)
    if occ.max(initial=0) > 1 or ori.max(initial=0) > 1:
        raise GridError("flag bytes must be 0 or 1")
    return NerveGrid(
        r,
        occ.reshape(r, r, r).astype(bool),
        ori.reshape(r, r, r, 3).astype(bool),
        pts.reshape(r, r, r, 3).astype(np.float64),
    )


def grid_to_json(grid: NerveGrid) -> str:
    return json.dumps(
        {
            "resolution": grid.resolution,
            "occupancy": grid.occupancy.astype(int).tolist(),
            "orientations": grid.orientations.astype(int).tolist(),
            "points": grid.points.tolist(),
        }
    )


def grid_from_json(text: str) -> NerveGrid:
    obj = json.loads(text)
    try:
        return NerveGrid(
            obj["resolution"],
            np.asarray(obj["occupancy"], dtype=bool),
            np.asarray(obj["orientations"], dtype=bool),
            np.asarray(obj["points"], dtype=np.float64),
        )
    except KeyError as exc:
        raise GridError(f"missing field {exc}") from None


def load_grid(path) -> NerveGrid:
    with open(path, "rb") as fh:
        data = fh.read()
    if data.lstrip()[:1] == b"{":
        return grid_from_json(data.decode())
    return read_grid(data)


def save_grid(grid: NerveGrid, path) -> None:
    with open(path, "wb") as fh:
        fh.write(write_grid(grid))
