"""Topological cleanup of PWL graphs under B-Rep constraints.

Three passes, applied in order by :func:`refine`:

1. ``reconnect`` joins pairs of close, direction-consistent dangling tips.
2. ``remove_spurs`` deletes short dangling paths (all of them in strict mode).
3. ``dedupe_multipaths`` collapses geometrically close paths sharing both ends.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .grid import edge_length
from .pwl import CurvePath, PwlGraph, trace_paths

SQRT2 = math.sqrt(2.0)

# defaults, in multiples of the cube edge length where applicable
DELTA_R_CUBES = 4.0
N_P = 5
DELTA_P_CUBES = 2.0


@dataclass(frozen=True)
class RefineParams:
    delta_r: float
    delta_p: float
    n_p: int = N_P
    tangent_consistency: float = SQRT2
    brep_strict: bool = False

    def __post_init__(self):
        if not self.delta_r > 0:
            raise ValueError("delta_r must be > 0")
        if not self.delta_p > 0:
            raise ValueError("delta_p must be > 0")
        if int(self.n_p) != self.n_p or self.n_p < 2:
            raise ValueError("n_p must be an integer >= 2")
        if not 0 < self.tangent_consistency <= 2:
            raise ValueError("tangent_consistency must be in (0, 2]")

    @classmethod
    def for_resolution(cls, resolution: int, **overrides) -> RefineParams:
        l = edge_length(resolution)
        fields = dict(delta_r=DELTA_R_CUBES * l, delta_p=DELTA_P_CUBES * l)
        fields.update(overrides)
        return cls(**fields)


def parse_length(text, cube: float) -> float:
    """``"4l"`` -> 4 * cube, ``"l/4"`` -> cube / 4, ``"0.1"`` -> 0.1."""
    s = str(text).strip().replace(" ", "")
    m = re.fullmatch(r"([0-9.eE+-]*)\*?l(?:/([0-9.eE+-]+))?", s)
    if m:
        factor = float(m.group(1)) if m.group(1) else 1.0
        if m.group(2):
            factor /= float(m.group(2))
        return factor * cube
    return float(s)


def _chain_from(v, adj, deg, limit):
    """Vertices from tip ``v`` inward through degree-2 vertices, at most ``limit`` long."""
    seq = [v]
    prev, cur = -1, v
    while len(seq) < limit:
        nxt = [w for w in adj[cur] if w != prev]
        if not nxt:
            break
        prev, cur = cur, nxt[0]
        seq.append(cur)
        if deg[cur] != 2:
            break
    return seq


def tip_tangent(graph: PwlGraph, v: int, adj=None, deg=None) -> np.ndarray:
    """Unit direction leaving the dangling tip ``v`` into free space.

    Uses the principal direction of the tip and its next two chain vertices
    when available, otherwise the last edge.
    """
    adj = graph.adjacency() if adj is None else adj
    deg = graph.degrees() if deg is None else deg
    chain = _chain_from(v, adj, deg, 3)
    pts = graph.positions[chain]
    outward = pts[0] - pts[-1]
    if len(pts) >= 3:
        centered = pts - pts.mean(axis=0)
        direction = np.linalg.svd(centered)[2][0]
        if direction @ outward < 0:
            direction = -direction
    else:
        direction = outward
    n = np.linalg.norm(direction)
    return direction / n if n > 0 else direction


def tangent_consistency(p1, t1_out, p2, t2_out) -> float:
    """``t1 . t12 + t12 . t3`` with ``t12`` the unit vector p1 -> p2.

    ``t1_out``/``t2_out`` point away from their chains; the curve direction
    at ``p2`` is the reverse of its outward tangent.
    """
    d = np.asarray(p2, dtype=np.float64) - np.asarray(p1, dtype=np.float64)
    n = np.linalg.norm(d)
    t12 = d / n if n > 0 else np.asarray(t1_out, dtype=np.float64)
    return float(t1_out @ t12 + t12 @ (-np.asarray(t2_out)))


def reconnect(graph: PwlGraph, params: RefineParams) -> PwlGraph:
    deg = graph.degrees()
    tips = np.flatnonzero(deg == 1)
    if len(tips) < 2:
        return graph
    adj = graph.adjacency()
    tangents = {int(v): tip_tangent(graph, int(v), adj, deg) for v in tips}
    pos = graph.positions
    existing = graph.edge_set()
    candidates = []
    for a in range(len(tips)):
        for b in range(a + 1, len(tips)):
            i, j = int(tips[a]), int(tips[b])
            dist = float(np.linalg.norm(pos[j] - pos[i]))
            if dist >= params.delta_r or (i, j) in existing:
                continue
            if tangent_consistency(pos[i], tangents[i], pos[j], tangents[j]) > params.tangent_consistency:
                candidates.append((dist, i, j))
    candidates.sort()
    taken: set[int] = set()
    added = []
    for _, i, j in candidates:
        if i in taken or j in taken:
            continue
        taken.update((i, j))
        added.append((i, j))
    if not added:
        return graph
    return graph.with_edges(np.vstack([graph.edges, np.array(added, dtype=np.int64)]))


def dangling_paths(graph: PwlGraph) -> list[list[int]]:
    """Paths starting at a degree-1 vertex and ending at the first vertex of degree != 2."""
    deg = graph.degrees()
    adj = graph.adjacency()
    seen: set[tuple] = set()
    out = []
    for v in np.flatnonzero(deg == 1):
        seq = _chain_from(int(v), adj, deg, graph.n_vertices + 1)
        key = tuple(sorted((seq[0], seq[-1]))) + (len(seq),)
        if deg[seq[-1]] == 1 and key in seen:
            continue
        seen.add(key)
        out.append(seq)
    return out


def _drop_edges(graph: PwlGraph, drop: set[tuple[int, int]], drop_vertices: set[int]):
    """Remove edges, then those of ``drop_vertices`` left isolated; also returns the kept-vertex mask."""
    keep_e = [e for e in graph.edges.tolist() if (e[0], e[1]) not in drop]
    e = np.array(keep_e, dtype=np.int64).reshape(-1, 2)
    deg = np.bincount(e.ravel(), minlength=graph.n_vertices)
    keep_v = np.ones(graph.n_vertices, dtype=bool)
    for v in drop_vertices:
        if deg[v] == 0:
            keep_v[v] = False
    return graph.subgraph(keep_v, e), keep_v


def remove_spurs(graph: PwlGraph, params: RefineParams) -> PwlGraph:
    """Delete dangling paths with fewer than ``n_p`` vertices, repeated to a fixed point.

    Isolated vertices count as one-vertex dangling paths.  With
    ``brep_strict`` every dangling path is deleted regardless of length.
    """
    while True:
        deg = graph.degrees()
        drop_e: set[tuple[int, int]] = set()
        drop_v: set[int] = {int(v) for v in np.flatnonzero(deg == 0)}
        for seq in dangling_paths(graph):
            if params.brep_strict or len(seq) < params.n_p:
                drop_e.update(CurvePath(tuple(seq)).edge_list())
                drop_v.update(seq)
        if not drop_e and not drop_v:
            return graph
        graph, _ = _drop_edges(graph, drop_e, drop_v)


def path_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Symmetric Chamfer distance between two vertex sets, in length units.

    Mean nearest-neighbour distance taken both ways and averaged, so two
    parallel paths ``d`` apart are at distance ``d``.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    d = np.linalg.norm(a[:, None, :] - b[None, :, :], axis=-1)
    return 0.5 * (d.min(axis=1).mean() + d.min(axis=0).mean())


def _canonical(seq: tuple) -> tuple:
    rev = tuple(reversed(seq))
    return min(seq, rev)


def _find_duplicate(graph: PwlGraph, params: RefineParams, junctions):
    groups: dict[tuple, list[tuple]] = {}
    for p in trace_paths(graph, stops=junctions):
        if p.closed:
            continue
        seq = _canonical(p.vertices)
        groups.setdefault((seq[0], seq[-1]), []).append(seq)
    for key in sorted(groups):
        members = sorted(groups[key])
        for x in range(len(members)):
            for y in range(x + 1, len(members)):
                pa = graph.positions[list(members[x])]
                pb = graph.positions[list(members[y])]
                if path_distance(pa, pb) < params.delta_p:
                    return members[y]
    return None


def dedupe_multipaths(graph: PwlGraph, params: RefineParams) -> PwlGraph:
    """Keep the lexicographically smallest of each close pair of same-ended paths.

    Paths are split at the junctions of the input graph, so deleting one of
    three parallel arcs does not turn the other two into an untouchable cycle.
    """
    junction = (graph.degrees() > 2)
    while True:
        victim = _find_duplicate(graph, params, np.flatnonzero(junction))
        if victim is None:
            return graph
        edges = set(CurvePath(victim).edge_list())
        graph, keep = _drop_edges(graph, edges, set(victim[1:-1]))
        junction = junction[keep]


MAX_ROUNDS = 64


def refine(graph: PwlGraph, params: RefineParams) -> PwlGraph:
    """reconnect -> remove_spurs -> dedupe_multipaths, repeated until nothing changes."""
    for _ in range(MAX_ROUNDS):
        out = dedupe_multipaths(remove_spurs(reconnect(graph, params), params), params)
        if out == graph:
            return out
        graph = out
    return graph
