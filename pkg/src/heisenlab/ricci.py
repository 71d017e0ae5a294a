"""Ricci curvature of the left-invariant Cameron-Martin metric.

Two routes are implemented: the closed form specific to step-2 algebras,
and the general formula for left-invariant metrics built from structure
constants, ad and its adjoint.  They must agree.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .forms import (
    make_block_sequence,
    make_complex_heisenberg,
    make_path_space,
    make_real_heisenberg,
    make_weighted_q,
    min_kernel_hs,
    sine_basis,
)
from .group import AlgebraElement, Model

SERIES_CUTOFF = 1e-6
CLOSED_FORM_TOL = 1e-10
PATH_SPACE_TOL = 1e-2  # truncation of the kernel at J modes


@dataclass(frozen=True, eq=False)
class RicciForm:
    matrix: np.ndarray
    k_lower: float
    model: Model
    trace_terms: float = 0.0

    def quadratic(self, X) -> float:
        X = np.asarray(X, dtype=float)
        return float(X @ self.matrix @ X)

    @property
    def horizontal_block(self) -> np.ndarray:
        return self.matrix[: self.model.n, : self.model.n]

    @property
    def center_block(self) -> np.ndarray:
        return self.matrix[self.model.n :, self.model.n :]


def _make_form(model: Model, mat: np.ndarray, trace_terms: float = 0.0) -> RicciForm:
    mat = (mat + mat.T) / 2
    return RicciForm(mat, float(np.linalg.eigvalsh(mat)[0]), model, trace_terms)


def ricci_step2(model: Model) -> RicciForm:
    """<Ric(A,a),(A,a)> = sum_{jk} <omega(e_k,e_j),a>^2 / 4 - sum_k |omega(A,e_k)|^2 / 2."""
    om = np.asarray(model.omega)
    n, d = model.n, model.d
    mat = np.zeros((n + d, n + d))
    mat[:n, :n] = -0.5 * np.einsum("lki,lkj->ij", om, om)
    mat[n:, n:] = 0.25 * np.einsum("lij,mij->lm", om, om)
    return _make_form(model, mat)


def structure_constants(model: Model) -> np.ndarray:
    """S[k, i, j] = <[E_i, E_j], E_k> in the orthonormal basis of H x C."""
    n, d = model.n, model.d
    N = n + d
    S = np.zeros((N, N, N))
    S[n:, :n, :n] = model.omega
    return S


def ad_matrix(S: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Matrix of ad_X: (ad_X)[k, j] = <[X, E_j], E_k>."""
    return np.einsum("i,kij->kj", X, S)


def ad_star(S: np.ndarray, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """ad*_X Y, the metric adjoint of ad_X applied to Y."""
    return ad_matrix(S, X).T @ Y


def covariant_derivative(model: Model, X: AlgebraElement, Y: AlgebraElement) -> AlgebraElement:
    S = structure_constants(model)
    x, y = X.vector, Y.vector
    br = ad_matrix(S, x) @ y
    v = 0.5 * (br - ad_star(S, x, y) - ad_star(S, y, x))
    return AlgebraElement(v[: model.n], v[model.n :])


def ricci_structure_constants(model: Model) -> RicciForm:
    """General left-invariant formula

        <Ric X, X> = tr(ad_{ad*_X X}) - tr(ad_X^2) / 2
                     + sum_Y |ad*_Y X|^2 / 4 - sum_Y |ad_Y X|^2 / 2

    written as quadratic forms in X via the structure tensor.  The two trace
    terms vanish for nilpotent algebras; their largest entry is reported.
    """
    S = structure_constants(model)
    tr_ad = np.einsum("aba->b", S)  # tr(ad_{E_b})
    t1 = np.einsum("j,kij->ik", tr_ad, S)  # tr(ad_{ad*_X X})
    t2 = np.einsum("kaj,jbk->ab", S, S)  # tr(ad_X^2)
    t3 = np.einsum("aij,bij->ab", S, S)  # sum_i |ad*_{E_i} X|^2
    t4 = np.einsum("kia,kib->ab", S, S)  # sum_i |[E_i, X]|^2
    t1 = (t1 + t1.T) / 2
    t2 = (t2 + t2.T) / 2
    mat = t1 - 0.5 * t2 + 0.25 * t3 - 0.5 * t4
    traces = max(np.max(np.abs(t1), initial=0.0), np.max(np.abs(t2), initial=0.0))
    return _make_form(model, mat, float(traces))


def ricci_general_value(model: Model, X: np.ndarray) -> float:
    """Direct evaluation of the general formula at one algebra element."""
    S = structure_constants(model)
    N = S.shape[0]
    X = np.asarray(X, dtype=float)
    adX = ad_matrix(S, X)
    v = adX.T @ X
    val = np.trace(ad_matrix(S, v)) - 0.5 * np.trace(adX @ adX)
    for i in range(N):
        E = np.zeros(N)
        E[i] = 1.0
        val += 0.25 * np.sum(ad_star(S, E, X) ** 2) - 0.5 * np.sum((ad_matrix(S, E) @ X) ** 2)
    return float(val)


def k_P(model: Model, m: int) -> float:
    """-1/2 of the top eigenvalue of sum_l Omega_l^T Omega_l on the first m coordinates."""
    if not 1 <= m <= model.n:
        raise ValueError(f"projection size must lie in [1, {model.n}]")
    om = model.omega[:, :m, :m]
    gram = np.einsum("lki,lkj->ij", om, om)
    return -0.5 * float(np.linalg.eigvalsh(gram)[-1])


def k_omega(model: Model) -> float:
    return k_P(model, model.n)


def c_function(t: float) -> float:
    """t / (e^t - 1) with value 1 at t = 0."""
    t = float(t)
    if abs(t) < SERIES_CUTOFF:
        return 1.0 - t / 2 + t * t / 12
    return t / np.expm1(t)


def _record(name: str, computed, expected) -> dict:
    computed = np.asarray(computed, dtype=float)
    expected = np.asarray(expected, dtype=float)
    err = float(np.max(np.abs(computed - expected)))
    scale = float(max(1.0, np.max(np.abs(expected))))
    return {
        "name": name,
        "max_abs_error": err,
        "relative_error": err / scale,
        "tolerance_rule": f"max abs error <= {CLOSED_FORM_TOL:g}",
        "pass": bool(err <= CLOSED_FORM_TOL),
    }


def closed_form_checks(rng: np.random.Generator | None = None, trials: int = 5) -> dict:
    """Compare the step-2 Ricci form with closed forms for the example families."""
    rng = rng or np.random.default_rng(2024)
    records = []

    for nc in (1, 2, 3):
        form = ricci_step2(make_complex_heisenberg(nc))
        errs = []
        for _ in range(trials):
            z = rng.normal(size=4 * nc)
            c = rng.normal(size=2)
            errs.append(form.quadratic(np.concatenate([z, c])) - (nc * c @ c - z @ z))
        records.append(_record(f"complex-heisenberg(n={nc})", errs, 0.0))

    q = np.array([1.0, 0.5, 1 / 3])
    form = ricci_step2(make_weighted_q(q))
    errs = []
    for _ in range(trials):
        h = rng.normal(size=6)
        c = rng.normal()
        qh = np.repeat(q, 2) * h
        errs.append(form.quadratic(np.append(h, c)) - 0.5 * (c * c * q @ q - qh @ qh))
    records.append(_record("weighted-q", errs, 0.0))

    form = ricci_step2(make_weighted_q(q, conjugated=True))
    errs = []
    for _ in range(trials):
        k = rng.normal(size=12)
        c = rng.normal(size=2)
        qk = np.repeat(np.concatenate([q, q]), 2) * k
        errs.append(form.quadratic(np.concatenate([k, c])) - (c @ c * q @ q - qk @ qk))
    records.append(_record("weighted-q(conjugated)", errs, 0.0))

    alpha = make_real_heisenberg(1)
    qb = 1.0 / np.arange(1, 6) ** 2
    form = ricci_step2(make_block_sequence(alpha, qb))
    ric_a = ricci_step2(alpha)
    errs = []
    for _ in range(trials):
        v = rng.normal(size=(qb.size, alpha.n))
        c = rng.normal(size=alpha.d)
        expected = sum(
            qj**2 * ric_a.quadratic(np.concatenate([vj, np.zeros(alpha.d)])) for qj, vj in zip(qb, v)
        ) + (qb @ qb) * ric_a.quadratic(np.concatenate([np.zeros(alpha.n), c]))
        errs.append(form.quadratic(np.concatenate([v.reshape(-1), c])) - expected)
    records.append(_record("block-sequence", errs, 0.0))

    records.append(_path_space_record(alpha, ([1.0], [1.0]), 200, rng, "path-space(delta_1)"))
    return {"records": records}


def path_space_sides(alpha: Model, eta, J: int, coeffs: np.ndarray, c: np.ndarray):
    """Both sides of the path-space Ricci identity for real alpha and real eta.

    ``coeffs`` has shape (J, dim V): h = sum_j l_j coeffs[j].  Returns
    (step-2 form on the truncated model, closed form with the exact kernel).
    """
    model = make_path_space(alpha, eta, J)
    form = ricci_step2(model)
    lhs = form.quadratic(np.concatenate([coeffs.reshape(-1), c]))
    nodes, weights = (np.asarray(x, dtype=float) for x in eta)
    h_at = sine_basis(nodes, J).T @ coeffs  # (nodes, dim V)
    alpha_c = np.tensordot(c, alpha.omega, axes=1)
    # alpha_{h(s)} u = alpha(h(s), u); tr(alpha*_{h(t)} alpha_{h(s)}) = sum_a <alpha(h(t),u_a), alpha(h(s),u_a)>
    ah = np.einsum("sv,lvu->slu", h_at, alpha.omega)
    cross = np.einsum("slu,tlu->st", ah, ah)
    mn = np.minimum.outer(nodes, nodes)
    rhs = 0.25 * min_kernel_hs(eta) * float(np.sum(alpha_c**2)) - 0.5 * float(
        weights @ (mn * cross) @ weights
    )
    return lhs, rhs


def _path_space_record(alpha, eta, J, rng, name):
    coeffs = rng.normal(size=(J, alpha.n)) / np.arange(1, J + 1)[:, None]
    c = rng.normal(size=alpha.d)
    lhs, rhs = path_space_sides(alpha, eta, J, coeffs, c)
    err = abs(lhs - rhs)
    rel = err / max(abs(rhs), 1e-300)
    return {
        "name": name,
        "lhs": lhs,
        "rhs": rhs,
        "max_abs_error": err,
        "relative_error": rel,
        "tolerance_rule": f"relative error <= {PATH_SPACE_TOL:g}",
        "pass": bool(rel <= PATH_SPACE_TOL),
    }
