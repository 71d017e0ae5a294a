"""Catalog of example forms and their norm constants.

Realified complex coordinates are interleaved: a complex vector
``z = x + i y`` of length m becomes ``(x_1, y_1, ..., x_m, y_m)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .group import Model

GRID_RESOLUTION = np.pi / 180


def realify_form(omega_c: np.ndarray) -> np.ndarray:
    """Real matrices of a complex bilinear form C^m x C^m -> C^dc.

    ``omega_c[l, i, j]`` is the coefficient of ``z_i z'_j``.  The result has
    shape (2 dc, 2m, 2m) with real and imaginary parts of each output
    component interleaved.
    """
    omega_c = np.asarray(omega_c, dtype=complex)
    dc, m, _ = omega_c.shape
    P, R = omega_c.real, omega_c.imag
    out = np.zeros((2 * dc, 2 * m, 2 * m))
    for l in range(dc):
        re = out[2 * l]
        im = out[2 * l + 1]
        # (x + iy)(u + iv) = (xu - yv) + i(xv + yu), then times (P + iR)
        re[0::2, 0::2] = P[l]
        re[0::2, 1::2] = -R[l]
        re[1::2, 0::2] = -R[l]
        re[1::2, 1::2] = -P[l]
        im[0::2, 0::2] = R[l]
        im[0::2, 1::2] = P[l]
        im[1::2, 0::2] = P[l]
        im[1::2, 1::2] = -R[l]
    return out


def _positive(q: Sequence[float], name: str = "q") -> np.ndarray:
    q = np.atleast_1d(np.asarray(q, dtype=float))
    if q.ndim != 1 or q.size == 0:
        raise ValueError(f"{name} must be a non-empty sequence")
    if np.any(q <= 0) or not np.all(np.isfinite(q)):
        raise ValueError(f"{name} entries must be positive")
    return q


def _symplectic_blocks(q: np.ndarray) -> np.ndarray:
    """sum_j q_j (y_j u_j - x_j v_j) on interleaved (x_j, y_j) pairs."""
    m = q.size
    om = np.zeros((1, 2 * m, 2 * m))
    for j, qj in enumerate(q):
        om[0, 2 * j, 2 * j + 1] = -qj
        om[0, 2 * j + 1, 2 * j] = qj
    return om


def make_real_heisenberg(n_complex: int) -> Model:
    """Imaginary part of the Hermitian product on C^n, realified to R^{2n}."""
    if n_complex < 1:
        raise ValueError("n_complex must be at least 1")
    om = _symplectic_blocks(np.ones(n_complex))
    return Model(2 * n_complex, 1, om, label=f"real-heisenberg(n={n_complex})")


def _complex_heisenberg_form(q: np.ndarray) -> np.ndarray:
    """Coefficients of sum_j q_j (w1_j z2_j - w2_j z1_j) on C^{2m}."""
    m = q.size
    om = np.zeros((1, 2 * m, 2 * m), dtype=complex)
    for j, qj in enumerate(q):
        om[0, j, m + j] = qj
        om[0, m + j, j] = -qj
    return om


def make_complex_heisenberg(n: int) -> Model:
    """w1 . z2 - w2 . z1 on C^n x C^n with values in C, realified."""
    if n < 1:
        raise ValueError("n must be at least 1")
    omc = _complex_heisenberg_form(np.ones(n))
    return Model(
        4 * n,
        2,
        realify_form(omc),
        label=f"complex-heisenberg(n={n})",
        complex_hs_norm_sq=float(np.sum(np.abs(omc) ** 2)),
    )


def make_weighted_q(q: Sequence[float], conjugated: bool = False) -> Model:
    """Weighted symplectic form, or its complex conjugation variant.

    Without conjugation: ``sum_j q_j (y_j u_j - x_j v_j)`` on K = C^m realified,
    d = 1.  With conjugation: ``<w1, conj z2>_Q - <w2, conj z1>_Q`` on K x K,
    values in C.  W-weights carry Q in both cases.
    """
    q = _positive(q)
    if not conjugated:
        om = _symplectic_blocks(q)
        return Model(
            2 * q.size, 1, om, w_weights=np.repeat(q, 2), label="weighted-q"
        )
    omc = _complex_heisenberg_form(q)
    weights = np.repeat(np.concatenate([q, q]), 2)
    return Model(
        4 * q.size,
        2,
        realify_form(omc),
        w_weights=weights,
        label="weighted-q(conjugated)",
        complex_hs_norm_sq=float(np.sum(np.abs(omc) ** 2)),
    )


def make_block_sequence(alpha: Model, q: Sequence[float]) -> Model:
    """Block-diagonal form with j-th block q_j * alpha on V^J."""
    q = _positive(q)
    k = alpha.n
    om = np.zeros((alpha.d, k * q.size, k * q.size))
    for j, qj in enumerate(q):
        om[:, j * k : (j + 1) * k, j * k : (j + 1) * k] = qj * alpha.omega
    return Model(
        k * q.size,
        alpha.d,
        om,
        w_weights=np.repeat(q, k),
        label=f"block-sequence(J={q.size})",
    )


def sine_basis(s: np.ndarray, J: int) -> np.ndarray:
    """l_j(s) = sqrt(2) sin((j - 1/2) pi s) / ((j - 1/2) pi), shape (J, len(s))."""
    freq = (np.arange(1, J + 1) - 0.5) * np.pi
    return np.sqrt(2.0) * np.sin(np.outer(freq, np.asarray(s, float))) / freq[:, None]


def lebesgue_measure(nodes: int = 1024) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [0, 1]."""
    x, wts = np.polynomial.legendre.leggauss(nodes)
    return (x + 1) / 2, wts / 2


def make_path_space(
    alpha: Model, eta: tuple[Sequence[float], Sequence[float]], J: int
) -> Model:
    """omega(s1, s2) = int alpha(s1(s), s2(s)) d eta(s) on the truncated sine basis.

    ``eta`` is (nodes, weights) of a real discrete measure on [0, 1].
    Coordinates are ordered basis-function major: index j * dim V + a.
    """
    nodes, weights = (np.asarray(x, dtype=float) for x in eta)
    if nodes.size == 0 or nodes.shape != weights.shape:
        raise ValueError("measure needs matching, non-empty nodes and weights")
    if np.any(nodes < 0) or np.any(nodes > 1):
        raise ValueError("measure nodes must lie in [0, 1]")
    if J < 1:
        raise ValueError("J must be at least 1")
    L = sine_basis(nodes, J)
    K = (L * weights) @ L.T
    om = np.stack([np.kron(K, a) for a in alpha.omega])
    return Model(
        J * alpha.n,
        alpha.d,
        om,
        label=f"path-space(J={J})",
        info={"kernel": K, "nodes": nodes, "weights": weights, "alpha_n": alpha.n},
    )


def min_kernel_hs(eta: tuple[Sequence[float], Sequence[float]]) -> float:
    """Double integral of (s ^ t)^2 against eta x eta."""
    nodes, weights = (np.asarray(x, dtype=float) for x in eta)
    mn = np.minimum.outer(nodes, nodes)
    return float(weights @ (mn**2) @ weights)


@dataclass(frozen=True)
class FormConstants:
    hs_norm_sq: float
    uniform_lower: float
    uniform_upper: float
    c_constant: float
    c_constant_upper: float
    gamma: float
    gamma_exact: bool
    c2: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _combo(mats: np.ndarray, c: np.ndarray) -> np.ndarray:
    return np.tensordot(c, mats, axes=1)


def _spectral(m: np.ndarray) -> float:
    return float(np.linalg.norm(m, 2)) if m.size else 0.0


def _alternating_ascent(mats: np.ndarray, c: np.ndarray, iters: int = 200) -> float:
    """Monotone ascent of sup_{|c|=1} sigma_max(sum c_l mats_l) from c."""
    best = 0.0
    for _ in range(iters):
        U, S, Vt = np.linalg.svd(_combo(mats, c))
        u, v = U[:, 0], Vt[0]
        x = np.einsum("i,lij,j->l", u, mats, v)
        val = float(np.linalg.norm(x))
        if val <= best * (1 + 1e-14):
            best = max(best, val)
            break
        best = val
        c = x / val
    return best


def sphere_max_sigma(
    mats: np.ndarray, resolution: float = GRID_RESOLUTION, seed: int = 0
) -> tuple[float, bool]:
    """max over unit c of the largest singular value of sum_l c_l mats_l.

    Exact for one matrix; grid plus local ascent for two or three;
    random multistart ascent beyond, flagged as approximate.
    """
    mats = np.asarray(mats, dtype=float)
    d = mats.shape[0]
    if not np.any(mats):
        return 0.0, True
    if d == 1:
        return _spectral(mats[0]), True
    if d == 2:
        th = np.arange(0.0, np.pi, resolution)
        cands = np.stack([np.cos(th), np.sin(th)], axis=1)
    elif d == 3:
        th = np.arange(0.0, np.pi / 2 + resolution / 2, resolution)
        ph = np.arange(0.0, 2 * np.pi, resolution)
        T, P = np.meshgrid(th, ph, indexing="ij")
        cands = np.stack(
            [np.sin(T) * np.cos(P), np.sin(T) * np.sin(P), np.cos(T)], axis=-1
        ).reshape(-1, 3)
    else:
        rng = np.random.default_rng(seed)
        cands = rng.normal(size=(64, d))
        cands /= np.linalg.norm(cands, axis=1, keepdims=True)
    vals = np.array([_spectral(_combo(mats, c)) for c in cands])
    order = np.argsort(vals)[::-1][:8]
    best = max(float(vals[order[0]]), *(_alternating_ascent(mats, cands[i]) for i in order))
    return best, d <= 3


def compute_constants(model: Model) -> FormConstants:
    om = np.asarray(model.omega)
    hs = float(np.sum(om * om))
    scale = 1.0 / np.sqrt(model.w_weights)
    om_w = om * scale[None, :, None] * scale[None, None, :]
    uniform_lower, _ = sphere_max_sigma(om_w)
    if model.d == 1:
        uniform_upper = uniform_lower
    else:
        uniform_upper = float(np.sqrt(sum(_spectral(m) ** 2 for m in om_w)))
        uniform_lower = min(uniform_lower, uniform_upper)
    c_val, exact = sphere_max_sigma(om)
    c_upper = c_val if model.d == 1 else float(np.sqrt(sum(_spectral(m) ** 2 for m in om)))
    return FormConstants(
        hs_norm_sq=hs,
        uniform_lower=uniform_lower,
        uniform_upper=uniform_upper,
        c_constant=c_val,
        c_constant_upper=max(c_upper, c_val),
        gamma=c_val**2,
        gamma_exact=exact,
        c2=float(np.sum(model.w_weights)),
    )


def c_constant(model: Model) -> float:
    return compute_constants(model).c_constant


def gaussian_identity_checks(model: Model, samples: int, rng: np.random.Generator) -> dict:
    """Monte Carlo versions of the Gaussian trace identities at truncation."""
    if samples < 1000:
        raise ValueError("need at least 1000 samples")
    n = model.n
    x = rng.standard_normal((samples, n))
    y = rng.standard_normal((samples, n))
    records = []

    vals = np.sum(model.form(x, y) ** 2, axis=1)
    records.append(_mc_record("double-integral-of-form", vals, float(np.sum(model.omega**2))))

    u = rng.normal(size=n)
    records.append(_mc_record("linear-functional-variance", (x @ u) ** 2, float(u @ u)))

    # a linear map phi(x) = omega(w0, x) into C
    w0 = rng.normal(size=n)
    phi = np.einsum("i,lij->lj", w0, model.omega)
    vals = np.sum(model.form(w0, x) ** 2, axis=1)
    records.append(_mc_record("linear-map-hs-norm", vals, float(np.sum(phi**2))))
    return {"samples": samples, "records": records, "pass": all(r["pass"] for r in records)}


def _mc_record(name: str, values: np.ndarray, exact: float) -> dict:
    est = float(np.mean(values))
    se = float(np.std(values, ddof=1) / np.sqrt(values.size))
    return {
        "name": name,
        "estimate": est,
        "stderr": se,
        "exact": exact,
        "pass": bool(abs(est - exact) <= 4 * se + 1e-12 * max(1.0, abs(exact))),
    }
