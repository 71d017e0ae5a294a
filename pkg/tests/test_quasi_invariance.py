import numpy as np
import pytest

from heisenlab.calculus import Poly, c_var, w_var
from heisenlab.group import AlgebraElement, Model
from heisenlab.montecarlo import RNGStream
from heisenlab import quasi_invariance as qi
from heisenlab.stochastics import TimeGrid, simulate_paths

GRID = TimeGrid(1.0, 32)
N = 8000


@pytest.fixture
def polys(heis):
    w1, w2, c = w_var(heis, 0), w_var(heis, 1), c_var(heis, 0)
    return w1, w2, c, Poly.constant(3, 1.0)


@pytest.fixture
def kpath():
    return qi.CMPath([0.0, 0.5, 1.0], [[0, 0], [0.5, -0.3], [1.0, 0.2]], [[0], [0.2], [0.4]])


def test_cm_path_basics(kpath):
    assert kpath.energy == pytest.approx((0.34 + 0.04) / 0.5 + (0.25 + 0.25 + 0.04) / 0.5)
    A, a = kpath.on_grid(GRID)
    assert A.shape == (33, 2) and a[0, 0] == 0.0
    assert qi.CMPath.from_dict(kpath.to_dict()).energy == kpath.energy
    with pytest.raises(ValueError):
        qi.CMPath([0.0, 1.0], [[1, 0], [0, 0]], [[0], [0]])
    with pytest.raises(ValueError):
        qi.CMPath([0.0, 0.5], [[0, 0], [1, 0]], [[0], [0]]).on_grid(GRID)
    lin = qi.CMPath.linear(AlgebraElement([2.0, 0.0], [1.0]), 2.0)
    assert lin.energy == pytest.approx(5.0 / 2.0)


def test_density_exact_cases(heis, kpath):
    gp = simulate_paths(heis, GRID, RNGStream(1), 64)
    zero = qi.log_ztilde(heis, qi.CMPath.zero(heis, 1.0), gp)
    assert np.array_equal(zero.log_value, np.zeros(64))
    dens = qi.log_ztilde(heis, kpath, gp)
    parts = dens.h_stochastic + dens.h_energy + dens.c_stochastic + dens.c_energy
    assert np.array_equal(dens.log_value, parts)
    assert np.array_equal(qi.log_zeta(heis, AlgebraElement.zero(heis), gp).log_value, np.zeros(64))
    shifted = qi.left_shift_path(heis, qi.CMPath.zero(heis, 1.0), gp)
    assert np.array_equal(shifted.w, gp.w) and np.array_equal(shifted.c, gp.c)
    shifted = qi.left_shift_path(heis, kpath, gp)
    A, a = kpath.on_grid(GRID)
    assert np.allclose(shifted.w, A + gp.driving.B)
    expect_c = gp.driving.B0 + a + gp.M / 2 + heis.form(A, gp.driving.B) / 2
    assert np.allclose(shifted.c, expect_c, atol=1e-14)


def test_abelian_reduces_to_classical(kpath):
    flat = Model(2, 1, np.zeros((1, 2, 2)))
    gp = simulate_paths(flat, GRID, RNGStream(2), 16)
    A, a = kpath.on_grid(GRID)
    dA, da = np.diff(A, axis=0) / GRID.dt, np.diff(a, axis=0) / GRID.dt
    classical = (
        np.sum(gp.driving.dB * dA, axis=(1, 2))
        + np.sum(gp.driving.dB0 * da, axis=(1, 2))
        - 0.5 * (np.sum(dA**2) + np.sum(da**2)) * GRID.dt
    )
    assert np.allclose(qi.log_ztilde(flat, kpath, gp).log_value, classical, atol=1e-13)
    h = AlgebraElement([0.7, -0.2], [0.0])
    closed = gp.driving.B[:, -1] @ h.A - h.A @ h.A / 2
    assert np.allclose(qi.log_zeta(flat, h, gp).log_value, closed, atol=1e-13)


def test_normalizations(heis, kpath):
    ks = [kpath, qi.CMPath.linear(AlgebraElement([1.0, 0.0], [0.5]), 1.0)]
    assert all(r["pass"] for r in qi.ztilde_normalization(heis, ks, GRID, N, RNGStream(3)))
    hs = [AlgebraElement([1.0, 0.0], [0.5]), AlgebraElement([0.0, -0.5], [1.0])]
    assert all(r["pass"] for r in qi.zeta_normalization(heis, hs, GRID, N, RNGStream(4)))


def test_path_quasi_invariance(heis, kpath, polys):
    w1, w2, c, one = polys
    fs = [qi.PathFunctional.of((1.0, one)), qi.PathFunctional.of((1.0, w1)), qi.PathFunctional.of((0.5, c), (1.0, w2))]
    recs = qi.path_qi_check(heis, kpath, fs, GRID, N, RNGStream(5))
    assert recs[0]["lhs"] == 1.0 and recs[0]["se_lhs"] == 0.0
    assert all(r["pass"] for r in recs), recs


def test_heat_quasi_invariance(heis, polys):
    w1, w2, c, one = polys
    h = AlgebraElement([1.0, 0.0], [0.5])
    fs = [one, w1, c**2, w1 * c + w2]
    left = qi.heat_qi_check(heis, h, fs, GRID, N, RNGStream(6))
    right = qi.right_qi_check(heis, h, fs, GRID, N, RNGStream(7))
    assert left[0]["lhs"] == 1.0
    assert all(r["pass"] for r in left + right), (left, right)


def test_central_right_shift_is_translation(heis):
    from heisenlab.group import mul_arrays

    gp = simulate_paths(heis, GRID, RNGStream(8), 32)
    w, c = gp.w[:, -1], gp.c[:, -1]
    a = np.array([0.8])
    w2, c2 = mul_arrays(heis, w, c, np.zeros(2), a)
    assert np.array_equal(w2, w) and np.array_equal(c2, c + a)


def test_integration_by_parts(heis, kpath, polys):
    w1, w2, c, one = polys
    h = AlgebraElement([1.0, 0.0], [0.5])
    fs = [one, w1, c, w1 * c + w2]
    heat = qi.ibp_heat(heis, h, fs, GRID, N, RNGStream(9))
    assert heat[0]["lhs"] == 0.0
    assert heat[1]["lhs"] == 1.0 and heat[1]["se_lhs"] == 0.0
    left = qi.ibp_heat_left(heis, h, fs, GRID, N, RNGStream(10))
    Fs = [qi.PathFunctional.of((1.0, w1)), qi.PathFunctional.of((0.5, c), (1.0, w2))]
    path = qi.ibp_path(heis, kpath, Fs, GRID, N, RNGStream(11))
    assert all(r["pass"] for r in heat + left + path), (heat, left, path)
    # f = c, h = (e1, 0): left side is E[omega(B(T), A)] / 2 = 0
    rec = qi.ibp_heat(heis, AlgebraElement([1.0, 0.0], [0.0]), [c], GRID, N, RNGStream(12))[0]
    assert abs(rec["lhs"]) <= 4 * rec["se_lhs"] and rec["pass"]


def test_dirichlet_adjoint(heis, polys):
    w1, w2, c, one = polys
    rec = qi.dirichlet_adjoint_check(heis, AlgebraElement([0.5, 1.0], [0.3]), w1 + c, w2 * c + one, GRID, N, RNGStream(13))
    assert rec["leibniz_exact"] and rec["pass"]


def test_lsi(heis, polys):
    w1, w2, c, one = polys
    assert qi.lsi_coefficient(-0.5, 1.0) == pytest.approx(2 * (1 - np.exp(0.5)) / -0.5)
    assert qi.lsi_coefficient(0.0, 1.7) == 3.4
    recs = qi.lsi_check(heis, [one * 2.0, one + w1 + c * 0.5], GRID, N, RNGStream(14))
    assert recs[0]["lhs"] == pytest.approx(recs[0]["rhs"], abs=1e-12) and recs[0]["pass"]
    assert recs[1]["pass"] and recs[1]["margin"] > 0
    flat = Model(2, 1, np.zeros((1, 2, 2)))
    rec = qi.lsi_check(flat, [Poly.constant(3, 1.0) + w_var(flat, 0) * 0.3], GRID, N, RNGStream(15))[0]
    assert rec["coefficient"] == pytest.approx(2.0) and rec["pass"]


def test_lp_bound(heis, polys):
    w1, _, _, one = polys
    recs = qi.lp_bound_dual_check(heis, AlgebraElement([1.0, 0.0], [0.0]), 2.0, [one, (one + w1) ** 2], GRID, N, RNGStream(16))
    assert recs[0]["distance"] == pytest.approx(1.0, abs=1e-6)
    assert recs[0]["factor"] == pytest.approx(np.exp(1.2707470412683 / 2), rel=1e-6)
    assert all(r["pass"] and r["margin"] > 0 for r in recs)
    jensen = qi.lp_bound_dual_check(heis, AlgebraElement.zero(heis), 2.0, [(one + w1) ** 2], GRID, N, RNGStream(17))[0]
    assert jensen["factor"] == 1.0 and jensen["pass"]
    with pytest.raises(ValueError):
        qi.lp_bound_dual_check(heis, AlgebraElement.zero(heis), 1.0, [one], GRID, 10, RNGStream(0))


def test_moment_probe(heis, kpath):
    zero = qi.prop54_moment_probe(heis, qi.CMPath.zero(heis, 1.0), 2.0, GRID, 1000, RNGStream(18))
    assert zero["estimate"] == 1.0 and zero["stable"]
    one = qi.prop54_moment_probe(heis, kpath, 1.0, GRID, N, RNGStream(19))
    assert abs(one["estimate"] - 1.0) <= 4 * one["stderr"]
    small = qi.CMPath([0.0, 1.0], [[0, 0], [0.3, 0.0]], [[0], [0.1]])
    assert qi.prop54_moment_probe(heis, small, 2.0, GRID, N, RNGStream(20))["stable"]


def test_abelian_degeneration():
    flat = Model(2, 1, np.zeros((1, 2, 2)))
    w1, c = w_var(flat, 0), c_var(flat, 0)
    h = AlgebraElement([0.8, 0.0], [0.4])
    fs = [w1, c**2, w1 * c]
    recs = qi.heat_qi_check(flat, h, fs, GRID, N, RNGStream(21)) + qi.ibp_heat(flat, h, fs, GRID, N, RNGStream(22))
    recs += qi.zeta_normalization(flat, [h], GRID, N, RNGStream(23))
    assert all(r["pass"] for r in recs), recs
