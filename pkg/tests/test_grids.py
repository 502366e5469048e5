from fractions import Fraction

import numpy as np
import pytest

from stagwave.errors import DomainError, MisalignmentError
from stagwave.grids import (BOTH_ENDS_PRIMARY, PERIODIC, build_block_2d,
                            build_grid_1d, build_layout, ravel_index,
                            unravel_index)


def test_bounded_grid_midpoint_staggering():
    g = build_grid_1d(0, 1, 11, BOTH_ENDS_PRIMARY)
    assert g.dx == Fraction(1, 10)
    assert g.n_dual == 10
    np.testing.assert_allclose(g.dual_coords(), np.arange(10) * 0.1 + 0.05)
    assert g.primary_coord(10) == 1


def test_bounded_grid_minimum_size():
    with pytest.raises(DomainError):
        build_grid_1d(0, 1, 8, BOTH_ENDS_PRIMARY)
    build_grid_1d(0, 1, 9, BOTH_ENDS_PRIMARY)


def test_periodic_grid_spacing_and_first_dual_point():
    g = build_grid_1d(0, "0.96", 120, PERIODIC)
    assert g.dx == Fraction("0.008")
    assert g.n_dual == 120
    assert g.dual_coord(0) == Fraction("0.004")


def test_degenerate_interval_rejected():
    with pytest.raises(DomainError):
        build_grid_1d(1, 1, 12, BOTH_ENDS_PRIMARY)


def test_gap_reconstruction_is_exact():
    g = build_grid_1d("0.1", "0.9", 17, BOTH_ENDS_PRIMARY)
    duals = [g.dual_coord(j) for j in range(g.n_dual)]
    total = sum(b - a for a, b in zip(duals, duals[1:]))
    total += (duals[0] - g.x_left) + (g.x_right - duals[-1])
    assert total == g.length


def test_ravel_round_trip():
    shape = (7, 5)
    for k in range(shape[0] * shape[1]):
        assert ravel_index(*unravel_index(k, shape), shape) == k


def test_block_subgrid_shapes_match_staggering():
    block = build_block_2d(0, "0.96", 120, "0.48", "0.96", 61)
    assert block.p_shape == (120, 61)
    assert block.u_shape == (120, 61)
    assert block.v_shape == (120, 60)
    xu, yu = block.subgrid_coords("u")
    assert xu[0] == pytest.approx(0.004)
    xv, yv = block.subgrid_coords("v")
    assert yv[0] == pytest.approx(0.484)


def test_block_requires_bounded_y():
    gx = build_grid_1d(0, 1, 16, PERIODIC)
    gy = build_grid_1d(0, 1, 17, BOTH_ENDS_PRIMARY)
    with pytest.raises(DomainError):
        build_block_2d(0, 1, 16, 0, 1, 8)  # y too small
    from stagwave.grids import StaggeredBlock2D
    with pytest.raises(DomainError):
        StaggeredBlock2D(gx, gx)         # periodic y not allowed
    block = StaggeredBlock2D(gy, gy)     # bounded x is the sidewall variant
    assert not block.x_periodic
    assert block.u_shape == (16, 17)


def test_layout_requires_periodic_x():
    bottom = build_block_2d(0, "0.96", 61, 0, "0.48", 31,
                            x_alignment=BOTH_ENDS_PRIMARY)
    top = build_block_2d(0, "0.96", 121, "0.48", "0.96", 61,
                         x_alignment=BOTH_ENDS_PRIMARY)
    with pytest.raises(DomainError):
        build_layout(top, bottom)


def test_layout_accepts_2_to_1():
    bottom = build_block_2d(0, "0.96", 60, 0, "0.48", 31)
    top = build_block_2d(0, "0.96", 120, "0.48", "0.96", 61)
    layout = build_layout(top, bottom)
    assert layout.ratio == 2
    assert layout.interface_y == Fraction("0.48")


def test_layout_accepts_6_to_5():
    bottom = build_block_2d(0, "0.96", 100, 0, "0.768", 81)
    top = build_block_2d(0, "0.96", 120, "0.768", "0.96", 25)
    layout = build_layout(top, bottom)
    assert layout.ratio == Fraction(6, 5)


def test_layout_rejects_width_mismatch():
    bottom = build_block_2d(0, "1.12", 70, 0, "0.48", 31)
    top = build_block_2d(0, "0.96", 120, "0.48", "0.96", 61)
    with pytest.raises(DomainError):
        build_layout(top, bottom)


def test_layout_rejects_shifted_origin():
    bottom = build_block_2d("0.008", "0.96", 60, 0, "0.48", 31)
    top = build_block_2d(0, "0.96", 120, "0.48", "0.96", 61)
    with pytest.raises(MisalignmentError):
        build_layout(top, bottom)


def test_layout_rejects_fine_bottom():
    bottom = build_block_2d(0, "0.96", 120, 0, "0.48", 61)
    top = build_block_2d(0, "0.96", 60, "0.48", "0.96", 31)
    with pytest.raises(DomainError):
        build_layout(top, bottom)


def test_layout_requires_touching_blocks():
    bottom = build_block_2d(0, "0.96", 60, 0, "0.4", 26)
    top = build_block_2d(0, "0.96", 120, "0.48", "0.96", 61)
    with pytest.raises(DomainError):
        build_layout(top, bottom)
