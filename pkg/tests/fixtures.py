"""Small hand-built PWL graphs shared by the topology tests and the acceptance suite."""

import numpy as np

from nerve.corpus import cube_wireframe
from nerve.pwl import PwlGraph, extract_pwl
from nerve.voxelize import voxelize

L = 2 / 32


def chain(points, offset=0):
    n = len(points)
    return points, [(offset + i, offset + i + 1) for i in range(n - 1)]


def build(*parts):
    pos, edges = [], []
    for pts, es in parts:
        pos.extend(pts)
        edges.extend(es)
    return PwlGraph(np.array(pos, dtype=float), np.array(edges, dtype=np.int64).reshape(-1, 2))


def line_pts(start, direction, n, step=L):
    start = np.asarray(start, dtype=float)
    direction = np.asarray(direction, dtype=float)
    return [start + i * step * direction for i in range(n)]


def facing_chains(gap_cubes, second_direction=(1, 0, 0)):
    a = line_pts((0, 0, 0), (1, 0, 0), 6)
    tip_a = a[-1]
    start_b = tip_a + gap_cubes * L * np.array([1.0, 0, 0])
    b = line_pts(start_b, second_direction, 6)
    return build(chain(a), chain(b, offset=6))


def junction_with_dangle(dangle_vertices):
    """A long straight chain with a side branch of ``dangle_vertices`` off its middle vertex."""
    main = line_pts((0, 0, 0), (1, 0, 0), 21)
    g_main = chain(main)
    branch = line_pts(main[10] + np.array([0, L, 0]), (0, 1, 0), dangle_vertices - 1)
    n0 = len(main)
    edges = [(10, n0)] + [(n0 + i, n0 + i + 1) for i in range(len(branch) - 1)]
    return build(g_main, (branch, edges))


def theta_fixture(offsets):
    """Endpoints u=(0,0,0) and v=(10l,0,0) joined by one arc per y-offset (in cube units)."""
    u, v = np.zeros(3), np.array([10 * L, 0, 0])
    pos = [u, v]
    edges = []
    for off in offsets:
        base = len(pos)
        inner = [np.array([x * L, off * L, 0.0]) for x in range(1, 10)]
        pos.extend(inner)
        edges += [(0, base)] + [(base + i, base + i + 1) for i in range(8)] + [(base + 8, 1)]
    return PwlGraph(np.array(pos), np.array(edges))


def wireframe_with_gap():
    """Cube wireframe at r=32 and the same grid with one face flag deleted two cubes from a corner.

    Returns (intact graph, gapped graph); both share vertex numbering.
    """
    grid = voxelize(cube_wireframe(0.75), 32)
    corner = 4  # -0.75 falls in cube 4 at r=32
    ori = grid.orientations.copy()
    assert ori[corner + 3, corner, corner, 0]
    ori[corner + 3, corner, corner, 0] = False
    return extract_pwl(grid), extract_pwl(grid.replace(orientations=ori))
