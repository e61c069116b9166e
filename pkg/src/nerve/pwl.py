"""Piece-wise linear curve graph extracted from a NerVE grid, plus path tracing."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass

import numpy as np

from .grid import NerveGrid, face_neighbors_occupied, inconsistent_faces

log = logging.getLogger(__name__)


class GraphError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class PwlGraph:
    """Undirected graph of edge points.

    ``edges`` is an ``(m, 2)`` integer array with ``i < j`` per row, sorted
    and free of duplicates.  ``cubes`` optionally records the grid cube each
    vertex came from (at most one vertex per cube).
    """

    positions: np.ndarray
    edges: np.ndarray
    cubes: np.ndarray | None = None

    def __post_init__(self):
        pos = np.array(self.positions, dtype=np.float64).reshape(-1, 3)
        e = np.array(self.edges, dtype=np.int64).reshape(-1, 2)
        if len(e):
            if np.any(e[:, 0] == e[:, 1]):
                raise GraphError("self-loop edge")
            if e.min() < 0 or e.max() >= len(pos):
                raise GraphError("edge references a missing vertex")
            e = np.sort(e, axis=1)
            e = e[np.lexsort((e[:, 1], e[:, 0]))]
            if np.any(np.all(e[1:] == e[:-1], axis=1)):
                raise GraphError("duplicate edge")
        cubes = None
        if self.cubes is not None:
            cubes = np.array(self.cubes, dtype=np.int64).reshape(-1, 3)
            if len(cubes) != len(pos):
                raise GraphError("cubes and positions differ in length")
            if len(np.unique(cubes, axis=0)) != len(cubes):
                raise GraphError("more than one vertex in a cube")
            cubes.setflags(write=False)
        pos.setflags(write=False)
        e.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "edges", e)
        object.__setattr__(self, "cubes", cubes)

    @property
    def n_vertices(self) -> int:
        return len(self.positions)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.n_vertices)

    def adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n_vertices)]
        for i, j in self.edges.tolist():
            adj[i].append(j)
            adj[j].append(i)
        for a in adj:
            a.sort()
        return adj

    def edge_set(self) -> set[tuple[int, int]]:
        return {(int(i), int(j)) for i, j in self.edges}

    def __eq__(self, other):
        if not isinstance(other, PwlGraph):
            return NotImplemented
        same_cubes = (self.cubes is None) == (other.cubes is None) and (
            self.cubes is None or np.array_equal(self.cubes, other.cubes)
        )
        return (
            np.array_equal(self.positions, other.positions)
            and np.array_equal(self.edges, other.edges)
            and same_cubes
        )

    def with_edges(self, edges) -> PwlGraph:
        return PwlGraph(self.positions, edges, self.cubes)

    def subgraph(self, keep, edges=None) -> PwlGraph:
        """Keep vertices where ``keep`` is true (order preserved) and reindex edges.

        ``edges`` defaults to the current edges; any edge touching a dropped
        vertex is discarded.
        """
        keep = np.asarray(keep, dtype=bool)
        edges = self.edges if edges is None else np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        new_index = np.full(self.n_vertices, -1, dtype=np.int64)
        new_index[keep] = np.arange(int(keep.sum()))
        e = new_index[edges] if len(edges) else edges
        if len(e):
            e = e[np.all(e >= 0, axis=1)]
        cubes = None if self.cubes is None else self.cubes[keep]
        return PwlGraph(self.positions[keep], e, cubes)


def empty_graph() -> PwlGraph:
    return PwlGraph(np.empty((0, 3)), np.empty((0, 2), dtype=np.int64))


@dataclass(frozen=True)
class CurvePath:
    vertices: tuple
    closed: bool = False

    def __len__(self):
        return len(self.vertices)

    def edge_list(self) -> list[tuple[int, int]]:
        v = list(self.vertices)
        if self.closed:
            v = v + v[:1]
        return [(min(a, b), max(a, b)) for a, b in zip(v[:-1], v[1:])]

    def points(self, graph: PwlGraph) -> np.ndarray:
        return graph.positions[list(self.vertices)]


def extract_pwl(grid: NerveGrid) -> PwlGraph:
    """One vertex per occupied cube, one edge per true inner face between occupied cubes.

    Vertices are ordered by flat cube index (x-major).  Flags touching an
    unoccupied cube are skipped and logged; see ``grid.inconsistent_faces``.
    """
    occ = grid.occupancy
    cubes = np.argwhere(occ)
    index = np.full(occ.shape, -1, dtype=np.int64)
    index[tuple(cubes.T)] = np.arange(len(cubes))
    valid = grid.orientations & face_neighbors_occupied(occ)
    edges = []
    for axis in range(3):
        hi = np.argwhere(valid[..., axis])
        if not len(hi):
            continue
        lo = hi.copy()
        lo[:, axis] -= 1
        edges.append(np.stack([index[tuple(lo.T)], index[tuple(hi.T)]], axis=1))
    skipped = inconsistent_faces(grid)
    if skipped:
        log.warning("skipped %d orientation flag(s) touching unoccupied cubes", len(skipped))
    e = np.concatenate(edges) if edges else np.empty((0, 2), dtype=np.int64)
    positions = grid.points[tuple(cubes.T)] if len(cubes) else np.empty((0, 3))
    return PwlGraph(positions, e, cubes)


def endpoints(graph: PwlGraph) -> set[int]:
    """Vertices of degree > 2 (curve corners / junctions)."""
    return {int(v) for v in np.flatnonzero(graph.degrees() > 2)}


def trace_paths(graph: PwlGraph, stops=()) -> list[CurvePath]:
    """Partition the edges into paths.

    Open paths run between vertices of degree != 2 through degree-2 vertices;
    they are enumerated by ascending start vertex and then ascending first
    neighbour.  Leftover all-degree-2 cycles become closed paths, each
    starting at its smallest vertex and heading to its smaller neighbour.
    Vertices in ``stops`` also terminate open paths whatever their degree.
    """
    adj = graph.adjacency()
    deg = graph.degrees()
    stops = set(int(v) for v in stops)

    def terminal(v):
        return deg[v] != 2 or v in stops
    used: set[tuple[int, int]] = set()
    paths: list[CurvePath] = []

    def walk(start, nxt):
        seq = [start]
        prev, cur = start, nxt
        used.add((min(prev, cur), max(prev, cur)))
        while not terminal(cur) and cur != start:
            seq.append(cur)
            a, b = adj[cur]
            step = b if a == prev else a
            key = (min(cur, step), max(cur, step))
            if key in used:
                return seq
            used.add(key)
            prev, cur = cur, step
        seq.append(cur)
        return seq

    for v in range(graph.n_vertices):
        if deg[v] == 0 or not terminal(v):
            continue
        for w in adj[v]:
            if (min(v, w), max(v, w)) in used:
                continue
            paths.append(CurvePath(tuple(walk(v, w)), closed=False))

    for v in range(graph.n_vertices):
        if deg[v] != 2:
            continue
        w = adj[v][0]
        if (min(v, w), max(v, w)) in used:
            continue
        seq = walk(v, w)
        if seq[-1] == seq[0]:
            seq = seq[:-1]
        paths.append(CurvePath(tuple(seq), closed=True))
    return paths


def sample_pwl_midpoints(graph: PwlGraph) -> np.ndarray:
    if not graph.n_edges:
        return np.empty((0, 3))
    p = graph.positions
    return 0.5 * (p[graph.edges[:, 0]] + p[graph.edges[:, 1]])


# -- I/O --------------------------------------------------------------------

def to_obj(graph: PwlGraph) -> str:
    lines = [f"v {x:.17g} {y:.17g} {z:.17g}" for x, y, z in graph.positions.tolist()]
    lines += [f"l {i + 1} {j + 1}" for i, j in graph.edges.tolist()]
    return "\n".join(lines) + ("\n" if lines else "")


def from_obj(text: str) -> PwlGraph:
    verts, edges = [], []
    for line in text.splitlines():
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        if parts[0] == "v":
            verts.append([float(x) for x in parts[1:4]])
        elif parts[0] == "l":
            idx = [int(x) - 1 for x in parts[1:]]
            edges.extend(zip(idx[:-1], idx[1:]))
    return PwlGraph(np.array(verts).reshape(-1, 3), np.array(edges, dtype=np.int64).reshape(-1, 2))


def paths_to_json(graph: PwlGraph, paths: list[CurvePath], **extra) -> dict:
    out = dict(extra)
    out["paths"] = [
        {
            "vertices": [int(v) for v in p.vertices],
            "closed": p.closed,
            "points": p.points(graph).tolist(),
        }
        for p in paths
    ]
    return out


def paths_from_json(obj) -> list[tuple[np.ndarray, bool]]:
    """``(points, closed)`` pairs from a paths listing."""
    if isinstance(obj, (str, bytes)):
        obj = json.loads(obj)
    if not isinstance(obj, dict) or not isinstance(obj.get("paths"), list):
        raise GraphError('paths JSON must be an object with a "paths" list')
    out = []
    for p in obj["paths"]:
        pts = np.asarray(p["points"], dtype=np.float64).reshape(-1, 3)
        out.append((pts, bool(p.get("closed", False))))
    return out
