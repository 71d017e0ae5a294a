"""Cameron-Martin shifts of the group Brownian motion.

Densities, dual Monte Carlo estimators of the quasi-invariance identities,
integration by parts, the dual L^p density bound and the log-Sobolev
inequality.  Dual estimators draw the two sides from independent streams
(``rng.child(0)`` and ``rng.child(1)``) so their standard errors combine
in quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import xlogy

from .calculus import Poly, gradient, left_invariant_derivative, right_derivative
from .geometry import optimize_distance, straight_line_bound
from .group import AlgebraElement, GroupElement, Model
from .heat_kernel import TestFunction, apply
from .montecarlo import RNGStream, Estimate, agree, estimate, log_mean_exp, one_sided, replica_map
from .ricci import c_function, k_omega
from .stochastics import GPath, TimeGrid, simulate_paths


@dataclass(frozen=True, eq=False)
class CMPath:
    """Piecewise-linear Cameron-Martin path k(t) = (A(t), a(t)) with k(0) = 0."""

    times: np.ndarray
    A: np.ndarray
    a: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        a = np.atleast_2d(np.asarray(self.a, dtype=float))
        if t.ndim != 1 or t.size < 2 or np.any(np.diff(t) <= 0) or t[0] != 0.0:
            raise ValueError("knot times must start at 0 and increase")
        if A.shape[0] != t.size or a.shape[0] != t.size:
            raise ValueError("knot values disagree with knot times")
        if np.any(A[0] != 0) or np.any(a[0] != 0):
            raise ValueError("a Cameron-Martin path must start at 0")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "a", a)

    @classmethod
    def linear(cls, h: AlgebraElement, T: float) -> "CMPath":
        """k(t) = (t / T) h."""
        return cls([0.0, T], np.stack([np.zeros_like(h.A), h.A]), np.stack([np.zeros_like(h.a), h.a]))

    @classmethod
    def zero(cls, model: Model, T: float) -> "CMPath":
        return cls([0.0, T], np.zeros((2, model.n)), np.zeros((2, model.d)))

    @property
    def energy(self) -> float:
        dt = np.diff(self.times)
        return float(np.sum((np.sum(np.diff(self.A, axis=0) ** 2, 1) + np.sum(np.diff(self.a, axis=0) ** 2, 1)) / dt))

    def on_grid(self, grid: TimeGrid) -> tuple[np.ndarray, np.ndarray]:
        if self.times[-1] < grid.T - 1e-12:
            raise ValueError("Cameron-Martin path does not cover the time grid")
        t = grid.times
        A = np.stack([np.interp(t, self.times, col) for col in self.A.T], axis=1)
        a = np.stack([np.interp(t, self.times, col) for col in self.a.T], axis=1)
        return A, a

    def at(self, t: float) -> AlgebraElement:
        return AlgebraElement(
            [np.interp(t, self.times, col) for col in self.A.T],
            [np.interp(t, self.times, col) for col in self.a.T],
        )

    def to_dict(self) -> dict:
        return {"times": self.times.tolist(), "A": self.A.tolist(), "a": self.a.tolist()}

    @classmethod
    def from_dict(cls, data) -> "CMPath":
        return cls(data["times"], data["A"], data["a"])


@dataclass(frozen=True, eq=False)
class DensityEvaluation:
    h_stochastic: np.ndarray
    h_energy: np.ndarray
    c_stochastic: np.ndarray
    c_energy: np.ndarray

    @property
    def log_value(self) -> np.ndarray:
        return self.h_stochastic + self.h_energy + self.c_stochastic + self.c_energy


def log_ztilde(model: Model, k: CMPath, gpath: GPath) -> DensityEvaluation:
    """Log path-space density of the left shift by k, left-point sums."""
    grid = gpath.grid
    dt = grid.dt
    A, a = k.on_grid(grid)
    Adot = np.diff(A, axis=0) / dt
    adot = np.diff(a, axis=0) / dt
    B = gpath.driving.B[..., :-1, :]
    v = adot + model.form(A[:-1] - 2 * B, Adot) / 2
    return DensityEvaluation(
        h_stochastic=np.sum(gpath.driving.dB * Adot, axis=(-2, -1)),
        h_energy=np.full(B.shape[:-2], -0.5 * np.sum(Adot**2) * dt),
        c_stochastic=np.sum(v * gpath.driving.dB0, axis=(-2, -1)),
        c_energy=-0.5 * np.sum(v**2, axis=(-2, -1)) * dt,
    )


def left_shift_path(model: Model, k: CMPath, gpath: GPath) -> GPath:
    """Pointwise product k(t) g(t)."""
    A, a = k.on_grid(gpath.grid)
    w = A + gpath.w
    c = a + gpath.c + model.form(A, gpath.w) / 2
    return GPath(gpath.driving, gpath.M, w, c)


def log_zeta(model: Model, h: AlgebraElement, gpath: GPath) -> DensityEvaluation:
    """Log density of the left shift by h at the terminal time."""
    grid = gpath.grid
    T, dt = grid.T, grid.dt
    B = gpath.driving.B
    u = h.a - model.form(B[..., :-1, :], h.A)
    return DensityEvaluation(
        h_stochastic=B[..., -1, :] @ h.A / T,
        h_energy=np.full(B.shape[:-2], -float(h.A @ h.A) / (2 * T)),
        c_stochastic=np.sum(u * gpath.driving.dB0, axis=(-2, -1)) / T,
        c_energy=-np.sum(u * u, axis=(-2, -1)) * dt / (2 * T * T),
    )


@dataclass(frozen=True)
class PathFunctional:
    """Product of cylinder polynomials evaluated at fixed grid times."""

    factors: tuple[tuple[float, Poly], ...]

    @classmethod
    def of(cls, *factors: tuple[float, Poly]) -> "PathFunctional":
        return cls(tuple(factors))

    def _values(self, grid: TimeGrid, w: np.ndarray, c: np.ndarray) -> list[np.ndarray]:
        out = []
        for t, f in self.factors:
            k = grid.index(t)
            out.append(f.evaluate(np.concatenate([w[..., k, :], c[..., k, :]], axis=-1)))
        return out

    def evaluate(self, grid: TimeGrid, w: np.ndarray, c: np.ndarray) -> np.ndarray:
        vals = self._values(grid, w, c)
        out = np.ones(w.shape[:-2])
        for v in vals:
            out = out * v
        return out

    def right_derivative(self, model: Model, k: CMPath, grid: TimeGrid, w, c) -> np.ndarray:
        """d/ds F((s k) g) at s = 0, by the product rule over factors."""
        vals = self._values(grid, w, c)
        total = np.zeros(w.shape[:-2])
        for m, (t, f) in enumerate(self.factors):
            kidx = grid.index(t)
            df = right_derivative(model, k.at(t), f)
            term = df.evaluate(np.concatenate([w[..., kidx, :], c[..., kidx, :]], axis=-1))
            for j, v in enumerate(vals):
                if j != m:
                    term = term * v
            total = total + term
        return total


def _columns(N: int, rng: RNGStream, model: Model, grid: TimeGrid, stat: Callable[[GPath], list[np.ndarray]]) -> np.ndarray:
    return replica_map(lambda rr: np.stack(stat(simulate_paths(model, grid, rng, rr)), axis=1), N)


def ztilde_normalization(model: Model, ks: Sequence[CMPath], grid: TimeGrid, N: int, rng: RNGStream) -> list[dict]:
    vals = _columns(N, rng, model, grid, lambda gp: [log_ztilde(model, k, gp).log_value for k in ks])
    return [_normalization_record(vals[:, j]) for j in range(len(ks))]


def zeta_normalization(model: Model, hs: Sequence[AlgebraElement], grid: TimeGrid, N: int, rng: RNGStream) -> list[dict]:
    vals = _columns(N, rng, model, grid, lambda gp: [log_zeta(model, h, gp).log_value for h in hs])
    return [_normalization_record(vals[:, j]) for j in range(len(hs))]


def _normalization_record(logs: np.ndarray) -> dict:
    rec = agree(log_mean_exp(logs), 1.0)
    rec["plain_mean"] = float(np.mean(np.exp(logs)))
    return rec


def _dual(model, grid, N, rng, lhs_stat, rhs_stat) -> list[dict]:
    left = _columns(N, rng.child(0), model, grid, lhs_stat)
    right = _columns(N, rng.child(1), model, grid, rhs_stat)
    return [agree(estimate(left[:, j]), estimate(right[:, j])) for j in range(left.shape[1])]


def path_qi_check(model: Model, k: CMPath, functionals: Sequence[PathFunctional], grid: TimeGrid, N: int, rng: RNGStream) -> list[dict]:
    """E F(k g) against E Z_k F(g) on independent samples."""

    def lhs(gp):
        sh = left_shift_path(model, k, gp)
        return [F.evaluate(grid, sh.w, sh.c) for F in functionals]

    def rhs(gp):
        z = np.exp(log_ztilde(model, k, gp).log_value)
        return [z * F.evaluate(grid, gp.w, gp.c) for F in functionals]

    return _dual(model, grid, N, rng, lhs, rhs)


def _end(gp: GPath):
    return gp.w[:, -1], gp.c[:, -1]


def heat_qi_check(model: Model, h: AlgebraElement, fs: Sequence[TestFunction], grid: TimeGrid, N: int, rng: RNGStream) -> list[dict]:
    """E f(h g(T)) against E f(g(T)) zeta_h."""

    def lhs(gp):
        w, c = _end(gp)
        hw = h.A + w
        hc = h.a + c + model.form(h.A, w) / 2
        return [apply(f, hw, hc) for f in fs]

    def rhs(gp):
        w, c = _end(gp)
        z = np.exp(log_zeta(model, h, gp).log_value)
        return [z * apply(f, w, c) for f in fs]

    return _dual(model, grid, N, rng, lhs, rhs)


def right_qi_check(model: Model, h: AlgebraElement, fs: Sequence[TestFunction], grid: TimeGrid, N: int, rng: RNGStream) -> list[dict]:
    """E f(g(T) h) against E f(g(T)^{-1}) zeta_{h^{-1}}."""
    hinv = AlgebraElement(-h.A, -h.a)

    def lhs(gp):
        w, c = _end(gp)
        return [apply(f, w + h.A, c + h.a + model.form(w, h.A) / 2) for f in fs]

    def rhs(gp):
        w, c = _end(gp)
        z = np.exp(log_zeta(model, hinv, gp).log_value)
        return [z * apply(f, -w, -c) for f in fs]

    return _dual(model, grid, N, rng, lhs, rhs)


def z_path(model: Model, k: CMPath, gpath: GPath) -> np.ndarray:
    """Divergence weight for path-space integration by parts."""
    grid = gpath.grid
    A, a = k.on_grid(grid)
    Adot = np.diff(A, axis=0) / grid.dt
    adot = np.diff(a, axis=0) / grid.dt
    B = gpath.driving.B[..., :-1, :]
    u = adot - model.form(B, Adot)
    return np.sum(gpath.driving.dB * Adot, axis=(-2, -1)) + np.sum(u * gpath.driving.dB0, axis=(-2, -1))


def z_heat(model: Model, h: AlgebraElement, gpath: GPath) -> np.ndarray:
    """Divergence weight for heat-kernel integration by parts."""
    B, B0 = gpath.driving.B, gpath.driving.B0
    drift = np.sum(model.form(B[..., :-1, :], h.A) * gpath.driving.dB0, axis=(-2, -1))
    return (B[..., -1, :] @ h.A + B0[..., -1, :] @ h.a - drift) / gpath.grid.T


def ibp_path(model: Model, k: CMPath, functionals: Sequence[PathFunctional], grid: TimeGrid, N: int, rng: RNGStream) -> list[dict]:
    def lhs(gp):
        return [F.right_derivative(model, k, grid, gp.w, gp.c) for F in functionals]

    def rhs(gp):
        z = z_path(model, k, gp)
        return [z * F.evaluate(grid, gp.w, gp.c) for F in functionals]

    return _dual(model, grid, N, rng, lhs, rhs)


def ibp_heat(model: Model, h: AlgebraElement, fs: Sequence[Poly], grid: TimeGrid, N: int, rng: RNGStream) -> list[dict]:
    """E (h^ f)(g(T)) against E f(g(T)) z_h, with h^ the right-shift derivative."""
    dfs = [right_derivative(model, h, f) for f in fs]

    def lhs(gp):
        w, c = _end(gp)
        return [apply(df, w, c) for df in dfs]

    def rhs(gp):
        w, c = _end(gp)
        z = z_heat(model, h, gp)
        return [z * apply(f, w, c) for f in fs]

    return _dual(model, grid, N, rng, lhs, rhs)


def ibp_heat_left(model: Model, h: AlgebraElement, fs: Sequence[Poly], grid: TimeGrid, N: int, rng: RNGStream) -> list[dict]:
    """E (h~ f)(g(T)) against -E f(g(T)^{-1}) z_h."""
    dfs = [left_invariant_derivative(model, h, f) for f in fs]

    def lhs(gp):
        w, c = _end(gp)
        return [apply(df, w, c) for df in dfs]

    def rhs(gp):
        w, c = _end(gp)
        z = z_heat(model, h, gp)
        return [-z * apply(f, -w, -c) for f in fs]

    return _dual(model, grid, N, rng, lhs, rhs)


def dirichlet_adjoint_check(model: Model, h: AlgebraElement, u: Poly, v: Poly, grid: TimeGrid, N: int, rng: RNGStream) -> dict:
    """E (h~u) v against -E u (h~v) - E (uv)(g^{-1}) z_h.

    Combines the exact product rule with left integration by parts.
    """
    hu = left_invariant_derivative(model, h, u)
    hv = left_invariant_derivative(model, h, v)
    leibniz = left_invariant_derivative(model, h, u * v).allclose(hu * v + u * hv)
    uv = u * v

    def lhs(gp):
        w, c = _end(gp)
        return [apply(hu, w, c) * apply(v, w, c)]

    def rhs(gp):
        w, c = _end(gp)
        z = z_heat(model, h, gp)
        return [-apply(u, w, c) * apply(hv, w, c) - z * apply(uv, -w, -c)]

    rec = _dual(model, grid, N, rng, lhs, rhs)[0]
    rec["leibniz_exact"] = bool(leibniz)
    rec["pass"] = bool(rec["pass"] and leibniz)
    return rec


def lsi_coefficient(k: float, T: float) -> float:
    """2 (1 - e^{-kT}) / k, equal to 2T at k = 0."""
    if k == 0:
        return 2.0 * T
    return float(-2.0 * np.expm1(-k * T) / k)


def cm_distance_upper(model: Model, h: AlgebraElement) -> float:
    e = GroupElement.identity(model)
    g = GroupElement(h.A, h.a)
    return min(optimize_distance(model, e, g).estimate, straight_line_bound(model, e, g))


def lp_bound_dual_check(
    model: Model,
    h: AlgebraElement,
    p: float,
    fs: Sequence[TestFunction],
    grid: TimeGrid,
    N: int,
    rng: RNGStream,
) -> list[dict]:
    """E f(h g(T)) <= exp(c(kT)(p-1) d^2 / (2T)) (E f^q(g(T)))^{1/q}."""
    if not p > 1:
        raise ValueError("p must exceed 1")
    q = p / (p - 1)
    T = grid.T
    dist = cm_distance_upper(model, h)
    kval = k_omega(model)
    factor = float(np.exp(c_function(kval * T) * (p - 1) * dist**2 / (2 * T)))

    def lhs(gp):
        w, c = _end(gp)
        return [apply(f, h.A + w, h.a + c + model.form(h.A, w) / 2) for f in fs]

    def rhs(gp):
        w, c = _end(gp)
        return [apply(f, w, c) ** q for f in fs]

    left = _columns(N, rng.child(0), model, grid, lhs)
    right = _columns(N, rng.child(1), model, grid, rhs)
    out = []
    for j in range(len(fs)):
        mq = estimate(right[:, j])
        val = factor * mq.mean ** (1 / q)
        se = factor * (1 / q) * mq.mean ** (1 / q - 1) * mq.stderr if mq.mean > 0 else 0.0
        rec = one_sided(estimate(left[:, j]), Estimate(val, se, mq.n))
        rec.update({"p": p, "q": q, "distance": dist, "factor": factor})
        out.append(rec)
    return out


def lsi_check(model: Model, fs: Sequence[Poly], grid: TimeGrid, N: int, rng: RNGStream, k: float | None = None) -> list[dict]:
    """E f^2 ln f^2 <= coef E|grad f|^2 + E f^2 ln E f^2, one-sided, delta-method SE."""
    kval = k_omega(model) if k is None else k
    coef = lsi_coefficient(kval, grid.T)
    grads = [gradient(model, f) for f in fs]

    def stat(gp):
        w, c = _end(gp)
        cols = []
        for f, g in zip(fs, grads):
            fv = apply(f, w, c)
            sq = fv * fv
            cols += [xlogy(sq, sq), sum(apply(gi, w, c) ** 2 for gi in g), sq]
        return cols

    vals = _columns(N, rng, model, grid, stat)
    out = []
    for j in range(len(fs)):
        X, Y, Z = vals[:, 3 * j], vals[:, 3 * j + 1], vals[:, 3 * j + 2]
        ez = float(np.mean(Z))
        ent = float(xlogy(ez, ez))
        lhs = float(np.mean(X))
        rhs = coef * float(np.mean(Y)) + ent
        grad_vec = np.array([1.0, -coef, -(np.log(ez) + 1.0) if ez > 0 else 0.0])
        cov = np.atleast_2d(np.cov(np.stack([X, Y, Z]), ddof=1))
        se = float(np.sqrt(max(grad_vec @ cov @ grad_vec, 0.0) / X.size))
        gap = lhs - rhs
        out.append(
            {
                "lhs": lhs,
                "rhs": rhs,
                "stderr": se,
                "margin": -gap,
                "coefficient": coef,
                "k": kval,
                "tolerance_rule": "lhs - rhs <= 4 * delta-method SE",
                "pass": bool(gap <= 4 * se + 1e-12 * max(1.0, abs(rhs))),
            }
        )
    return out


def prop54_moment_probe(model: Model, k: CMPath, p: float, grid: TimeGrid, N: int, rng: RNGStream) -> dict:
    """Empirical E Z_k^p with a sample-size stability diagnostic."""
    logs = _columns(N, rng, model, grid, lambda gp: [p * log_ztilde(model, k, gp).log_value])[:, 0]
    trail = [log_mean_exp(logs[: max(2, N // m)]) for m in (4, 2, 1)]
    drift = abs(trail[2].mean - trail[1].mean)
    return {
        "estimate": trail[2].mean,
        "stderr": trail[2].stderr,
        "trail": [e.to_dict() for e in trail],
        "drift": drift,
        "stable": bool(drift <= 2 * trail[2].stderr or trail[2].stderr == 0.0),
    }
