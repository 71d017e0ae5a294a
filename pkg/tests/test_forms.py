import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heisenlab.forms import (
    compute_constants,
    gaussian_identity_checks,
    lebesgue_measure,
    make_block_sequence,
    make_complex_heisenberg,
    make_path_space,
    make_real_heisenberg,
    make_weighted_q,
    realify_form,
    sine_basis,
    sphere_max_sigma,
)
from heisenlab.group import Model, random_model


@pytest.mark.parametrize("nc", [1, 2, 3, 5])
def test_real_heisenberg(nc):
    m = make_real_heisenberg(nc)
    const = compute_constants(m)
    assert (m.n, m.d) == (2 * nc, 1)
    assert const.hs_norm_sq == pytest.approx(2 * nc, abs=1e-12)
    assert const.uniform_lower == pytest.approx(1.0) and const.uniform_upper == pytest.approx(1.0)
    assert const.gamma == pytest.approx(1.0)
    assert np.array_equal(m.omega + m.omega.transpose(0, 2, 1), np.zeros_like(m.omega))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_complex_heisenberg_realification(n):
    m = make_complex_heisenberg(n)
    assert (m.n, m.d) == (4 * n, 2)
    assert m.complex_hs_norm_sq == pytest.approx(2 * n)
    assert compute_constants(m).hs_norm_sq == pytest.approx(4 * 2 * n, abs=1e-10)
    # realified form reproduces Im/Re parts of the complex form on random inputs
    rng = np.random.default_rng(n)
    J = np.zeros((2 * n, 2 * n))
    J[:n, n:], J[n:, :n] = np.eye(n), -np.eye(n)
    z = rng.normal(size=2 * n) + 1j * rng.normal(size=2 * n)
    u = rng.normal(size=2 * n) + 1j * rng.normal(size=2 * n)
    real = realify_form(J[None])
    zr = np.stack([z.real, z.imag], 1).reshape(-1)
    ur = np.stack([u.real, u.imag], 1).reshape(-1)
    val = z @ J @ u
    out = np.array([zr @ om @ ur for om in real])
    assert np.allclose(out, [val.real, val.imag], atol=1e-12)


def test_weighted_q_and_blocks():
    q = np.array([1.0, 0.5, 1 / 3])
    for conj, factor in ((False, 1), (True, 4)):
        m = make_weighted_q(q, conjugated=conj)
        assert compute_constants(m).hs_norm_sq == pytest.approx(factor * 2 * q @ q, abs=1e-12)
    single = make_weighted_q([1.0])
    assert np.array_equal(single.omega, make_real_heisenberg(1).omega)

    alpha = make_real_heisenberg(1)
    qb = 1.0 / np.arange(1, 7) ** 2
    blocks = make_block_sequence(alpha, qb)
    c = np.array([1.7])
    lhs = np.sum(np.tensordot(c, blocks.omega, 1) ** 2)
    rhs = (qb @ qb) * np.sum(np.tensordot(c, alpha.omega, 1) ** 2)
    assert lhs == pytest.approx(rhs, abs=1e-12)
    assert compute_constants(blocks).uniform_upper <= compute_constants(alpha).uniform_upper + 1e-12
    assert np.array_equal(make_block_sequence(alpha, [1.0]).omega, alpha.omega)
    with pytest.raises(ValueError):
        make_weighted_q([1.0, 0.0])


def test_path_space_kernel_and_norms():
    s = np.linspace(0, 1, 101)
    L = sine_basis(s, 200)
    assert np.max(np.abs(L.T @ L - np.minimum.outer(s, s))) < 2e-2
    alpha = make_real_heisenberg(1)
    leb = make_path_space(alpha, lebesgue_measure(1024), 200)
    assert compute_constants(leb).hs_norm_sq / (2.0 / 6) == pytest.approx(1.0, rel=1e-3)
    delta = make_path_space(alpha, ([1.0], [1.0]), 200)
    assert compute_constants(delta).hs_norm_sq / 2.0 == pytest.approx(1.0, rel=1e-2)
    with pytest.raises(ValueError):
        make_path_space(alpha, ([], []), 4)


def test_zero_form_constants():
    m = Model(3, 2, np.zeros((2, 3, 3)))
    const = compute_constants(m)
    assert const.hs_norm_sq == const.uniform_upper == const.gamma == const.c_constant == 0.0
    res = gaussian_identity_checks(m, 2000, np.random.default_rng(0))
    assert res["records"][0]["estimate"] == 0.0


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_constant_orderings(seed):
    rng = np.random.default_rng(seed)
    m = random_model(rng, int(rng.integers(2, 7)), int(rng.integers(1, 4)))
    const = compute_constants(m)
    assert const.uniform_lower <= const.uniform_upper + 1e-12
    assert const.gamma <= const.hs_norm_sq + 1e-12
    assert const.c_constant <= const.c2 * const.uniform_upper + 1e-12
    assert const.c_constant <= const.c_constant_upper + 1e-12
    if m.d == 1:
        assert const.uniform_lower == pytest.approx(const.uniform_upper)


def test_sphere_max_sigma_exact_for_two_components():
    # c1 A + c2 B = (2 c1 + c2) B, so the sup over the unit circle is sqrt(5)
    A = np.array([[0.0, -2.0], [2.0, 0.0]])
    B = np.array([[0.0, -1.0], [1.0, 0.0]])
    val, exact = sphere_max_sigma(np.stack([A, B]))
    assert val == pytest.approx(np.sqrt(5.0), rel=1e-6)
    assert exact


@pytest.mark.parametrize("maker", [lambda: make_real_heisenberg(2), lambda: make_weighted_q([1.0, 0.5]), lambda: make_complex_heisenberg(1)])
def test_gaussian_identities(maker):
    res = gaussian_identity_checks(maker(), 20000, np.random.default_rng(11))
    assert res["pass"], res
