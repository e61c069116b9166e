import math

import numpy as np
import pytest
from hypothesis import given, settings

from nerve.pwl import PwlGraph, trace_paths
from nerve.topo import (
    RefineParams,
    dedupe_multipaths,
    parse_length,
    path_distance,
    reconnect,
    refine,
    remove_spurs,
    tangent_consistency,
    tip_tangent,
)
from fixtures import L, build, chain, facing_chains, junction_with_dangle, line_pts, theta_fixture, wireframe_with_gap
from strategies import chain_graphs, graphs

P = RefineParams.for_resolution(32)


# -- params -----------------------------------------------------------------

def test_default_params_snapshot():
    assert P.delta_r == 4 * L and P.delta_p == 2 * L
    assert P.n_p == 5 and P.tangent_consistency == math.sqrt(2) and P.brep_strict is False


@pytest.mark.parametrize(
    "kwargs",
    [dict(delta_r=0, delta_p=1), dict(delta_r=1, delta_p=-1), dict(delta_r=1, delta_p=1, n_p=1), dict(delta_r=1, delta_p=1, tangent_consistency=2.5)],
)
def test_param_validation(kwargs):
    with pytest.raises(ValueError):
        RefineParams(**kwargs)


def test_parse_length():
    assert parse_length("4l", 0.5) == 2.0
    assert parse_length("l/4", 0.5) == 0.125
    assert parse_length("l", 0.5) == 0.5
    assert parse_length("0.1", 0.5) == 0.1
    with pytest.raises(ValueError):
        parse_length("4m", 0.5)


# -- reconnect --------------------------------------------------------------

def test_reconnect_collinear_tips():
    g = facing_chains(2)
    t5 = tip_tangent(g, 5)
    t6 = tip_tangent(g, 6)
    # hand oracle: t1 = +x, t12 = +x, curve direction at the far tip = +x
    np.testing.assert_allclose(t5, [1, 0, 0], atol=1e-12)
    np.testing.assert_allclose(t6, [-1, 0, 0], atol=1e-12)
    assert tangent_consistency(g.positions[5], t5, g.positions[6], t6) == pytest.approx(2.0)
    out = reconnect(g, P)
    assert out.edge_set() - g.edge_set() == {(5, 6)}


def test_reconnect_perpendicular_tips():
    g = facing_chains(2, second_direction=(0, 1, 0))
    t5, t6 = tip_tangent(g, 5), tip_tangent(g, 6)
    # t1 . t12 = 1, t12 . (+y) = 0
    assert tangent_consistency(g.positions[5], t5, g.positions[6], t6) == pytest.approx(1.0)
    assert reconnect(g, P) == g


def test_reconnect_too_far():
    assert reconnect(facing_chains(5), P) == facing_chains(5)


def test_reconnect_each_tip_once_nearest_first():
    # tip 5 faces two candidate tips; the closer one wins
    a = line_pts((0, 0, 0), (1, 0, 0), 6)
    b = line_pts(a[-1] + 1.5 * L * np.array([1, 0, 0]), (1, 0, 0), 6)
    c = line_pts(a[-1] + 3.0 * L * np.array([1, 0, 0]) + [0, 0.2 * L, 0], (1, 0, 0), 6)
    g = build(chain(a), chain(b, 6), chain(c, 12))
    added = reconnect(g, P).edge_set() - g.edge_set()
    assert (5, 6) in added and all(5 not in e for e in added - {(5, 6)})


# -- spurs ------------------------------------------------------------------

def test_short_dangle_removed():
    g = junction_with_dangle(3)  # junction + 2 branch vertices = 3-vertex dangle
    out = remove_spurs(g, P)
    assert out.n_vertices == 21 and out.n_edges == 20


def test_long_dangle_kept():
    g = junction_with_dangle(6)
    out = remove_spurs(g, P)
    # the two halves of the main chain are 11-vertex dangles; the branch is 6 vertices
    assert out == g


def test_strict_removes_long_dangles():
    g = junction_with_dangle(20)
    out = remove_spurs(g, RefineParams.for_resolution(32, brep_strict=True))
    assert out.n_vertices == 0


def test_two_vertex_fragment_refines_to_empty():
    g = PwlGraph([(0, 0, 0), (L, 0, 0)], [(0, 1)])
    assert refine(g, P).n_vertices == 0


def test_isolated_vertices_are_removed():
    g = build(chain(line_pts((0, 0, 0), (1, 0, 0), 3)), ([np.array([0.5, 0.5, 0.5])], []))
    assert remove_spurs(g, P).n_vertices == 0


# -- multipaths -------------------------------------------------------------

def test_identical_arcs_deduped():
    g = theta_fixture([1.5, 1.5, -4.0])
    out = dedupe_multipaths(g, P)
    assert out.n_edges == 20 and out.n_vertices == 20
    # the lexicographically smaller copy (vertex 2 onward) survives
    np.testing.assert_array_equal(out.positions, np.delete(g.positions, range(11, 20), axis=0))


def test_far_arcs_kept():
    g = theta_fixture([1.5, -1.5, 5.0])
    a = g.positions[[0, *range(2, 11), 1]]
    b = g.positions[[0, *range(11, 20), 1]]
    # per vertex of either arc (by symmetry): shared ends 0; x=1,9 reach an end at
    # sqrt(1 + 1.5^2) l; x=2,8 at sqrt(4 + 1.5^2) l; the five middle ones sit 3l off
    per_vertex = [0, 0] + [math.hypot(1, 1.5)] * 2 + [math.hypot(2, 1.5)] * 2 + [3.0] * 5
    assert path_distance(a, b) == pytest.approx(L * sum(per_vertex) / 11, rel=1e-12)
    assert path_distance(a, b) > 2 * L
    assert dedupe_multipaths(g, P) == g


def test_three_coincident_arcs_leave_one():
    out = dedupe_multipaths(theta_fixture([1.0, 1.0, 1.0]), P)
    assert out.n_edges == 10
    assert len(trace_paths(out)) == 1


def test_dedupe_keeps_survivor_positions():
    g = theta_fixture([0.5, 0.2, 2.5, 0.0])
    out = dedupe_multipaths(g, P)
    for p in out.positions:
        assert np.any(np.all(g.positions == p, axis=1))


# -- refine -----------------------------------------------------------------

def test_clean_cycle_unchanged():
    ang = np.linspace(0, 2 * np.pi, 40, endpoint=False)
    pos = np.stack([0.5 * np.cos(ang), 0.5 * np.sin(ang), np.zeros(40)], axis=1)
    g = PwlGraph(pos, [(i, (i + 1) % 40) for i in range(40)])
    assert refine(g, P) == g


@settings(max_examples=300)
@given(chain_graphs())
def test_refine_properties_on_chains(g):
    out = refine(g, P)
    assert refine(out, P) == out
    strict = refine(g, RefineParams.for_resolution(32, brep_strict=True))
    assert not np.any(strict.degrees() == 1)
    assert refine(g, P) == out


@settings(max_examples=300)
@given(graphs(scale=0.2))
def test_step_monotonicity(g):
    assert reconnect(g, P).n_vertices >= g.n_vertices
    assert remove_spurs(g, P).n_vertices <= g.n_vertices
    d = dedupe_multipaths(g, P)
    for p in d.positions:
        assert np.any(np.all(g.positions == p, axis=1))


def test_wireframe_gap_is_reconnected():
    intact, gapped = wireframe_with_gap()
    assert gapped.n_edges == intact.n_edges - 1 and int((gapped.degrees() == 1).sum()) == 2
    assert refine(gapped, P).edge_set() == intact.edge_set()
    assert refine(intact, P) == intact
