import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nerve.curves import Circle3D, CurveSet, LineSegment
from nerve.grid import CubeMask, new_grid
from nerve.metrics import (
    MetricError,
    chamfer,
    curve_cd,
    grid_report,
    hausdorff_avg,
    nearest_sqdist,
)
from nerve.voxelize import voxelize
from oracles import chamfer_loop, hausdorff_loop


def test_single_points():
    X, Y = [(0, 0, 0)], [(1, 0, 0)]
    assert chamfer(X, Y) == 2.0
    assert hausdorff_avg(X, Y) == 1.0


def test_identical_sets_are_zero():
    X = np.random.default_rng(0).uniform(-1, 1, (50, 3))
    assert chamfer(X, X) == 0.0 and hausdorff_avg(X, X) == 0.0


def test_empty_set_rejected():
    with pytest.raises(MetricError):
        chamfer(np.empty((0, 3)), [(0, 0, 0)])


def test_random_instances_match_loop_oracle_exactly():
    rng = np.random.default_rng(123)
    for _ in range(200):
        X = rng.uniform(-1, 1, (int(rng.integers(1, 40)), 3))
        Y = rng.uniform(-1, 1, (int(rng.integers(1, 40)), 3))
        assert chamfer(X, Y) == chamfer_loop(X, Y)
        assert hausdorff_avg(X, Y) == hausdorff_loop(X, Y)
        assert chamfer(X, Y, "tree") == chamfer(X, Y, "brute")
        assert hausdorff_avg(X, Y, "tree") == hausdorff_avg(X, Y, "brute")


def test_tree_and_brute_agree_on_large_sets():
    rng = np.random.default_rng(5)
    X, Y = rng.uniform(-1, 1, (3000, 3)), rng.uniform(-1, 1, (2500, 3))
    assert np.array_equal(nearest_sqdist(X, Y, "tree"), nearest_sqdist(X, Y, "brute"))
    with pytest.raises(ValueError):
        nearest_sqdist(X, Y, "magic")


@settings(max_examples=100)
@given(st.integers(0, 2**32 - 1), st.floats(0.1, 10.0))
def test_symmetry_and_scaling(seed, s):
    rng = np.random.default_rng(seed)
    X, Y = rng.uniform(-1, 1, (15, 3)), rng.uniform(-1, 1, (9, 3))
    assert chamfer(X, Y) == chamfer(Y, X)
    assert hausdorff_avg(X, Y) == hausdorff_avg(Y, X)
    assert chamfer(s * X, s * Y) == pytest.approx(s * s * chamfer(X, Y), rel=1e-12)
    assert hausdorff_avg(s * X, s * Y) == pytest.approx(s * hausdorff_avg(X, Y), rel=1e-12)


# -- grid scores ---------------------------------------------------------------

def wire_grid(r=16):
    return voxelize(CurveSet([LineSegment((-0.7, -0.3, 0.1), (0.6, 0.4, 0.1))]), r)


def test_identical_grids_score_perfectly():
    g = wire_grid()
    rep = grid_report(g, g)
    assert rep.as_dict() == {"R_o": 1.0, "P_o": 1.0, "C_e": 1.0, "D_p": 0.0}


def test_empty_grids_give_undefined_scores():
    e = new_grid(8)
    rep = grid_report(e, e)
    assert rep.R_o is None and rep.P_o is None and rep.C_e is None and rep.D_p is None


def test_empty_prediction():
    g = wire_grid()
    rep = grid_report(new_grid(16), g)
    assert rep.R_o == 0.0 and rep.P_o is None


def test_point_error_is_mean_distance():
    g = wire_grid()
    shifted = g.points + np.where(g.occupancy[..., None], [0.003, 0, 0], 0)
    rep = grid_report(g.replace(points=shifted), g)
    assert rep.D_p == pytest.approx(0.003, abs=1e-15)


def test_counts_by_hand():
    r = 4
    occ_gt = np.zeros((r, r, r), dtype=bool)
    occ_gt[0, 0, :] = True  # 4 cubes
    occ_pred = occ_gt.copy()
    occ_pred[0, 0, 3] = False  # one miss
    occ_pred[3, 3, 3] = True  # one false alarm
    gt = new_grid(r).replace(occupancy=occ_gt)
    pred = new_grid(r).replace(occupancy=occ_pred)
    rep = grid_report(pred, gt)
    assert rep.R_o == 3 / 4 and rep.P_o == 3 / 4
    # masking out the false alarm
    mask = CubeMask(r, ~np.eye(1, r**3, r**3 - 1, dtype=bool).reshape(r, r, r))
    assert grid_report(pred, gt, mask_o=mask).P_o == 1.0


def test_orientation_correctness_in_mask():
    g = wire_grid()
    ori = g.orientations.copy()
    idx = np.argwhere(g.occupancy)[0]
    ori[tuple(idx)] = ~ori[tuple(idx)]
    rep = grid_report(g.replace(orientations=ori), g)
    assert rep.C_e == pytest.approx(1 - 1 / g.occupied_count)


def test_mask_and_resolution_mismatch():
    with pytest.raises(MetricError):
        grid_report(new_grid(4), new_grid(8))
    with pytest.raises(MetricError):
        grid_report(new_grid(4), new_grid(4), mask_o=CubeMask(8, np.zeros((8, 8, 8), dtype=bool)))
    with pytest.raises(MetricError):
        grid_report(new_grid(4), new_grid(4), mask_e=np.zeros((3, 3, 3), dtype=bool))


# -- curve distance ---------------------------------------------------------------

def test_curve_cd_of_exact_copy():
    c = [Circle3D((0.1, 0, 0), 0.5, (0, 0, 1)), LineSegment((-0.5, -0.5, 0), (0.5, 0.2, 0.3))]
    cd, hd = curve_cd(c, c)
    assert cd <= 1e-6 and hd <= 1e-6


def test_curve_cd_of_offset_circle():
    a = Circle3D((0, 0, 0), 0.5, (0, 0, 1))
    b = Circle3D((0, 0, 0.01), 0.5, (0, 0, 1))
    cd, hd = curve_cd([a], [b])
    # 2 * 0.01^2
    assert cd == pytest.approx(2e-4, rel=1e-9)
    assert hd == pytest.approx(0.01, rel=1e-9)


def test_curve_cd_needs_curves():
    with pytest.raises(MetricError):
        curve_cd([], [LineSegment((0, 0, 0), (1, 0, 0))])


def test_hausdorff_oracle_value():
    X = [(0, 0, 0), (1, 0, 0)]
    Y = [(0, 0, 0)]
    assert hausdorff_avg(X, Y) == 0.5 * (1 + 0)
    assert chamfer(X, Y) == 0.5 + 0.0
    assert math.isclose(chamfer_loop(X, Y), 0.5)
