import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heisenlab.forms import c_constant, make_real_heisenberg, make_weighted_q
from heisenlab.geometry import (
    DiscretePath,
    cc_crude_upper,
    cc_upper,
    dilate_path,
    horizontal_loop,
    is_horizontal,
    optimize_distance,
    path_length,
    rho_squared,
    straight_line_bound,
)
from heisenlab.group import GroupElement, Model, gcm_norm, inverse, multiply, random_model


def test_simple_lengths(heis):
    e = GroupElement.identity(heis)
    A = GroupElement([3.0, 4.0], [0.0])
    assert path_length(heis, DiscretePath.straight(A, A, 5)) == 0.0
    assert path_length(heis, DiscretePath.straight(e, A, 1)) == pytest.approx(5.0, abs=1e-14)
    assert path_length(heis, DiscretePath.straight(e, A, 37)) == pytest.approx(5.0, abs=1e-12)
    vert = DiscretePath.straight(e, GroupElement([0, 0], [2.5]), 9)
    assert path_length(heis, vert) == pytest.approx(2.5, abs=1e-14)
    assert path_length(heis, vert, rule="midpoint") == pytest.approx(2.5, abs=1e-14)
    assert is_horizontal(heis, vert).max_center_defect == pytest.approx(2.5)
    assert is_horizontal(heis, DiscretePath.straight(e, A, 4)).max_center_defect == 0.0


def test_loop_endpoint_and_length(heis):
    loop = horizontal_loop(heis, [1.0, 0.0], [0.0, 1.0], 100_000)
    assert np.max(np.abs(loop.w[-1])) <= 1e-6
    assert loop.c[-1, 0] == pytest.approx(-np.pi, abs=1e-6)
    assert path_length(heis, loop) == pytest.approx(2 * np.pi, abs=1e-6)
    assert is_horizontal(heis, loop).is_horizontal(1e-9)
    flat = horizontal_loop(heis, [1.0, 0.5], [1.0, 0.5], 64)
    assert np.allclose(flat.c[-1], 0.0, atol=1e-14)
    big = horizontal_loop(heis, np.sqrt(3) * np.array([1.0, 0.0]), np.sqrt(3) * np.array([0.0, 1.0]), 4096)
    small = horizontal_loop(heis, [1.0, 0.0], [0.0, 1.0], 4096)
    assert big.c[-1, 0] == pytest.approx(3 * small.c[-1, 0], rel=1e-12)
    with pytest.raises(ValueError):
        horizontal_loop(heis, [1, 0], [0, 1], 4)


@pytest.mark.parametrize("lam", [0.3, 2.0, 7.5])
def test_dilation_scaling_horizontal(heis, lam):
    loop = horizontal_loop(heis, [0.4, -1.0], [0.7, 0.2], 512)
    assert path_length(heis, dilate_path(lam, loop)) == pytest.approx(lam * path_length(heis, loop), abs=1e-10)


def test_straight_bound_basics(heis):
    e = GroupElement.identity(heis)
    y = GroupElement([1.0, -2.0], [0.5])
    assert straight_line_bound(heis, e, y) == pytest.approx(gcm_norm(y))
    assert straight_line_bound(heis, y, y) == 0.0


def test_optimizer_horizontal_and_abelian(heis):
    e = GroupElement.identity(heis)
    est = optimize_distance(heis, e, GroupElement([0.6, -0.8], [0.0]), segments=8)
    assert est.estimate == pytest.approx(1.0, abs=1e-6)
    flat = Model(2, 1, np.zeros((1, 2, 2)))
    x, y = GroupElement([1.0, 0.0], [0.0]), GroupElement([0.0, 2.0], [1.0])
    assert optimize_distance(flat, x, y, segments=8).estimate == pytest.approx(gcm_norm(GroupElement(y.w - x.w, y.c - x.c)), abs=1e-6)


def test_vertical_target_beats_straight_line(heis):
    e = GroupElement.identity(heis)
    y = GroupElement([0.0, 0.0], [50.0])
    est = optimize_distance(heis, e, y, segments=16)
    assert est.estimate <= cc_upper(heis, y) + 1e-9
    assert est.estimate < 50.0


def test_cc_upper_examples(heis):
    A = GroupElement([3.0, 4.0], [0.0])
    assert cc_upper(heis, A) == pytest.approx(5.0)
    vert = GroupElement([0.0, 0.0], [np.pi])
    assert cc_upper(heis, vert) == pytest.approx(2 * np.pi)
    assert cc_crude_upper(heis, vert) == pytest.approx(4 * np.pi)
    degenerate = Model(3, 2, np.array([[[0, 1, 0], [-1, 0, 0], [0, 0, 0]], [[0, 2, 0], [-2, 0, 0], [0, 0, 0]]], float))
    with pytest.raises(ValueError, match="form not total"):
        cc_upper(degenerate, GroupElement([0, 0, 0], [1.0, 0.0]))


def test_cc_upper_scaling_ratio_bounded(heis):
    ratios = []
    for A in np.logspace(-2, 2, 5):
        for a in np.logspace(-2, 2, 5):
            ratios.append(cc_upper(heis, GroupElement([A, 0.0], [a])) / (A + np.sqrt(a)))
    assert max(ratios) <= 2 * np.sqrt(np.pi) + 1e-12


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 10_000))
def test_random_optimizer_consistency(seed):
    rng = np.random.default_rng(seed)
    m = random_model(rng, int(rng.integers(2, 4)), 1)
    x = GroupElement(rng.normal(size=m.n), rng.normal(size=1))
    y = GroupElement(rng.normal(size=m.n), rng.normal(size=1))
    est = optimize_distance(m, x, y, segments=6, iters=300, extra_starts=0)
    rel = multiply(m, inverse(x), y)
    assert est.estimate <= straight_line_bound(m, x, y) + 1e-9
    assert est.estimate <= cc_upper(m, rel) * (1 + 1e-9) + 1e-9
    # lower bound from the local comparison with epsilon = 1 / C
    eps = 1.0 / c_constant(m)
    e = GroupElement.identity(m)
    d0 = optimize_distance(m, e, rel, segments=6, iters=300, extra_starts=0).estimate
    assert d0 >= 0.5 * min(eps, gcm_norm(rel)) - 1e-12


def test_triangle_for_upper_estimates():
    m = make_weighted_q([1.0, 0.5])
    rng = np.random.default_rng(4)
    x, y, z = (GroupElement(rng.normal(size=4), rng.normal(size=1)) for _ in range(3))
    xy = cc_upper(m, multiply(m, inverse(x), y))
    yz = cc_upper(m, multiply(m, inverse(y), z))
    xz = optimize_distance(m, x, z, segments=8).estimate
    assert xy + yz >= xz - 1e-9


def test_rho_squared(heis):
    assert rho_squared(heis, GroupElement.identity(heis)) == 0.0
    assert rho_squared(heis, GroupElement([3.0, 4.0], [0.0])) == pytest.approx(25.0)
    assert rho_squared(heis, GroupElement([3.0, 4.0], [2.0])) == pytest.approx(27.0)
