import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nerve.grid import (
    MAGIC,
    CubeMask,
    GridError,
    cube_extent,
    cube_extents,
    edge_length,
    grid_from_json,
    grid_to_json,
    inconsistent_faces,
    load_grid,
    locate,
    mask_from_points,
    new_grid,
    read_grid,
    repair_orientations,
    save_grid,
    write_grid,
)
from oracles import locate_scalar, near_plane
from strategies import grids, point3


def test_new_grid_r2():
    g = new_grid(2)
    assert g.occupancy.shape == (2, 2, 2)
    assert g.edge_length == 1.0
    assert not g.occupancy.any() and not g.orientations.any()
    lo, hi = cube_extent((0, 0, 0), 2)
    assert lo.tolist() == [-1, -1, -1] and hi.tolist() == [0, 0, 0]
    np.testing.assert_array_equal(g.points[0, 0, 0], [-0.5, -0.5, -0.5])


def test_edge_length_r32():
    assert edge_length(32) == 0.0625


@pytest.mark.parametrize("r", [1, 0, -3, 1025])
def test_resolution_guard(r):
    with pytest.raises(GridError):
        new_grid(r)


def test_cube_extents():
    lo, hi = cube_extent((1, 0, 0), 2)
    assert lo.tolist() == [0, -1, -1] and hi.tolist() == [1, 0, 0]
    assert cube_extent((31, 31, 31), 32)[1].tolist() == [1, 1, 1]
    with pytest.raises(GridError):
        cube_extent((2, 0, 0), 2)
    with pytest.raises(GridError):
        cube_extent((0, -1, 0), 2)


@pytest.mark.parametrize("r", [2, 3, 7, 32, 100])
def test_extents_tile_the_domain(r):
    lo, hi = cube_extents(r)
    # consecutive cubes share faces exactly and the ends reach -1 and +1
    assert np.all(lo[0, :, :, 0] == -1) and np.all(hi[-1, :, :, 0] == 1)
    np.testing.assert_array_equal(hi[:-1, :, :, 0], lo[1:, :, :, 0])
    np.testing.assert_array_equal(hi[:, :-1, :, 1], lo[:, 1:, :, 1])
    np.testing.assert_array_equal(hi[:, :, :-1, 2], lo[:, :, 1:, 2])
    assert np.all(hi > lo)


def test_mask_from_points():
    m = mask_from_points([(-0.5, -0.5, -0.5)], 2)
    assert m.flags[0, 0, 0] and m.count == 1
    assert mask_from_points([], 2).count == 0
    m = mask_from_points([(0.0, 0.0, 0.0)], 2)
    assert m.flags[1, 1, 1] and m.count == 1
    m = mask_from_points([(1.0, 1.0, -1.0)], 4)
    assert m.flags[3, 3, 0]
    with pytest.raises(GridError):
        mask_from_points([(1.01, 0, 0)], 2)


@settings(max_examples=300)
@given(point3, st.integers(2, 64))
def test_locate_matches_scalar_oracle(p, r):
    got = locate(p, r)
    for d in range(3):
        if not near_plane(p[d], r):
            assert got[d] == locate_scalar(p[d], r)
    lo, hi = cube_extent(tuple(got), r)
    assert np.all(lo <= p) and np.all(p <= hi)


def test_mask_resolution_and_shape():
    with pytest.raises(GridError):
        CubeMask(2, np.zeros((3, 3, 3), dtype=bool))


def test_round_trip_fresh_grid_bytes():
    g = new_grid(32)
    data = write_grid(g)
    assert data[:6] == MAGIC
    assert len(data) == 6 + 4 + 32**3 * (1 + 3 + 24)
    assert write_grid(read_grid(data)) == data
    assert read_grid(data) == g


def test_wrong_magic_rejected():
    data = bytearray(write_grid(new_grid(2)))
    data[:6] = b"NERVE2"
    with pytest.raises(GridError, match="magic"):
        read_grid(bytes(data))


def test_truncated_rejected():
    data = write_grid(new_grid(3))
    with pytest.raises(GridError):
        read_grid(data[:-1])
    with pytest.raises(GridError):
        read_grid(data[:8])


def test_boundary_flag_rejected_on_load():
    data = bytearray(write_grid(new_grid(2)))
    off = 6 + 4 + 8
    data[off + 0] = 1  # cube (0,0,0), -x face: grid boundary
    with pytest.raises(GridError, match="boundary"):
        read_grid(bytes(data))


def test_point_outside_cube_rejected():
    g = new_grid(2)
    pts = g.points.copy()
    pts[0, 0, 0] = [0.2, -0.5, -0.5]
    with pytest.raises(GridError, match="outside"):
        g.replace(points=pts)


def test_non_flag_byte_rejected():
    data = bytearray(write_grid(new_grid(2)))
    data[10] = 2
    with pytest.raises(GridError):
        read_grid(bytes(data))


def test_grid_is_immutable():
    g = new_grid(2)
    with pytest.raises(ValueError):
        g.occupancy[0, 0, 0] = True


def test_byte_layout_is_x_major():
    occ = np.zeros((2, 2, 2), dtype=bool)
    occ[1, 0, 0] = True
    g = new_grid(2).replace(occupancy=occ)
    data = write_grid(g)
    assert list(data[10:18]) == [0, 0, 0, 0, 1, 0, 0, 0]


def test_json_mirror(tmp_path):
    g = new_grid(2).replace(occupancy=np.ones((2, 2, 2), dtype=bool))
    text = grid_to_json(g)
    assert set(json.loads(text)) == {"resolution", "occupancy", "orientations", "points"}
    assert grid_from_json(text) == g
    p = tmp_path / "g.json"
    p.write_text(text)
    assert load_grid(p) == g
    save_grid(g, tmp_path / "g.nerve")
    assert load_grid(tmp_path / "g.nerve") == g


def test_inconsistent_flags_listed_and_repaired():
    r = 3
    ori = np.zeros((r, r, r, 3), dtype=bool)
    ori[1, 0, 0, 0] = True
    occ = np.zeros((r, r, r), dtype=bool)
    occ[1, 0, 0] = True
    g = new_grid(r).replace(occupancy=occ, orientations=ori)
    assert inconsistent_faces(g) == [((1, 0, 0), 0)]
    assert not repair_orientations(ori, occ).any()


@settings(max_examples=200)
@given(grids(max_r=5, consistent=False))
def test_binary_and_json_round_trip(g):
    data = write_grid(g)
    assert read_grid(data) == g
    assert write_grid(read_grid(data)) == data
    assert write_grid(grid_from_json(grid_to_json(g))) == data
