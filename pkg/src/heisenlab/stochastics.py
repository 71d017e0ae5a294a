"""Brownian motion on the group: driving noise, Ito area, projections.

Arrays carry an optional leading replica axis: ``B`` has shape
``(replicas, steps + 1, n)`` or ``(steps + 1, n)``.  The area is built from
left-point sums ``M_{i+1} = M_i + omega(B_i, dB_i)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .forms import compute_constants
from .group import Model
from .montecarlo import RNGStream, agree, estimate, log_mean_exp, normals, one_sided, replica_map


@dataclass(frozen=True)
class TimeGrid:
    T: float
    steps: int

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError("T must be positive")
        if self.steps < 1:
            raise ValueError("steps must be at least 1")

    @property
    def dt(self) -> float:
        return self.T / self.steps

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.steps + 1)

    def index(self, t: float) -> int:
        """Grid index of time t, which must sit on the grid."""
        k = int(round(t / self.dt))
        if not 0 <= k <= self.steps or abs(k * self.dt - t) > 1e-9 * max(1.0, self.T):
            raise ValueError(f"time {t} is not on the grid")
        return k


@dataclass(frozen=True, eq=False)
class DrivingPath:
    grid: TimeGrid
    B: np.ndarray
    B0: np.ndarray

    @property
    def dB(self) -> np.ndarray:
        return np.diff(self.B, axis=-2)

    @property
    def dB0(self) -> np.ndarray:
        return np.diff(self.B0, axis=-2)


@dataclass(frozen=True, eq=False)
class GPath:
    driving: DrivingPath
    M: np.ndarray
    w: np.ndarray
    c: np.ndarray

    @property
    def grid(self) -> TimeGrid:
        return self.driving.grid

    def at(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        return self.w[..., k, :], self.c[..., k, :]

    def endpoint(self) -> tuple[np.ndarray, np.ndarray]:
        return self.at(-1)


def _prepend_zero(increments: np.ndarray) -> np.ndarray:
    zero = np.zeros_like(increments[..., :1, :])
    return np.concatenate([zero, np.cumsum(increments, axis=-2)], axis=-2)


def driving_from_increments(model: Model, grid: TimeGrid, dB: np.ndarray, dB0: np.ndarray) -> DrivingPath:
    return DrivingPath(grid, _prepend_zero(dB), _prepend_zero(dB0))


def sample_driving(model: Model, grid: TimeGrid, rng: RNGStream, replicas=1) -> DrivingPath:
    """Gaussian increments with covariance dt * I, one stream per replica.

    Coordinates are drawn in the fixed order (B_1..B_n, B0_1..B0_d) per step.
    """
    rr = range(replicas) if isinstance(replicas, int) else replicas
    z = normals(rng, rr, (grid.steps, model.n + model.d)) * np.sqrt(grid.dt)
    return driving_from_increments(model, grid, z[..., : model.n], z[..., model.n :])


def _area(model: Model, B: np.ndarray, dB: np.ndarray) -> np.ndarray:
    return _prepend_zero(model.form(B[..., :-1, :], dB))


def ito_area(model: Model, driving: DrivingPath, rule: str = "left") -> np.ndarray:
    B = driving.B
    dB = driving.dB
    if rule == "left":
        return _area(model, B, dB)
    if rule == "midpoint":
        mid = (B[..., :-1, :] + B[..., 1:, :]) / 2
        return _prepend_zero(model.form(mid, dB))
    raise ValueError(f"unknown rule {rule!r}")


def area_rule_gap(model: Model, driving: DrivingPath) -> np.ndarray:
    """Half the sum of omega(dB, dB): the midpoint minus left-point correction."""
    dB = driving.dB
    return np.sum(model.form(dB, dB), axis=-2) / 2


def simulate_g(model: Model, driving: DrivingPath) -> GPath:
    M = ito_area(model, driving)
    return GPath(driving, M, driving.B, driving.B0 + M / 2)


def simulate_paths(model: Model, grid: TimeGrid, rng: RNGStream, replicas=1) -> GPath:
    return simulate_g(model, sample_driving(model, grid, rng, replicas))


def project_g(model: Model, gpath: GPath, m: int):
    """Projected motion driven by the same noise, and the defect path.

    Returns ``(g_P, defect)`` where ``g_P`` lives on the first m coordinates
    (embedded with zeros) and ``defect = (w, c)`` are the coordinates of
    g_P(t)^{-1} pi_P(g(t)), computed with the group law.
    """
    if not 1 <= m <= model.n:
        raise ValueError(f"projection size must lie in [1, {model.n}]")
    B = gpath.driving.B
    PB = B.copy()
    PB[..., m:] = 0
    dPB = np.diff(PB, axis=-2)
    M_P = _area(model, PB, dPB)
    c_P = gpath.driving.B0 + M_P / 2
    drv = DrivingPath(gpath.grid, PB, gpath.driving.B0)
    g_P = GPath(drv, M_P, PB, c_P)
    # g_P^{-1} * (P w, c)
    dw = -PB + PB
    dc = -c_P + gpath.c + model.form(-PB, PB) / 2
    return g_P, (dw, dc)


def projection_defect_sum(model: Model, gpath: GPath, m: int) -> np.ndarray:
    """Running sum of (omega(B, dB) - omega(PB, PdB)) / 2."""
    B = gpath.driving.B
    PB = B.copy()
    PB[..., m:] = 0
    full = model.form(B[..., :-1, :], np.diff(B, axis=-2))
    proj = model.form(PB[..., :-1, :], np.diff(PB, axis=-2))
    return _prepend_zero((full - proj) / 2)


def complement_factor(model: Model, gpath: GPath, m: int):
    """Coordinates of g_P(t)^{-1} g(t); its w part is (I - P) B."""
    g_P, _ = project_g(model, gpath, m)
    dc = -g_P.c + gpath.c + model.form(-g_P.w, gpath.w) / 2
    return -g_P.w + gpath.w, dc


def quadratic_variation(model: Model, driving: DrivingPath) -> np.ndarray:
    """Matrix-valued bracket <M_l, M_m>_t as left-point Riemann sums."""
    V = np.einsum("...i,lij->...lj", driving.B[..., :-1, :], model.omega)
    incr = np.einsum("...lj,...mj->...lm", V, V) * driving.grid.dt
    zero = np.zeros_like(incr[..., :1, :, :])
    return np.concatenate([zero, np.cumsum(incr, axis=-3)], axis=-3)


def _paths_stat(model: Model, grid: TimeGrid, rng: RNGStream, replicas: int, stat: Callable[[GPath], np.ndarray]) -> np.ndarray:
    return replica_map(lambda rr: stat(simulate_paths(model, grid, rng, rr)), replicas)


def area_variance_check(model: Model, grid: TimeGrid, replicas: int, rng: RNGStream) -> dict:
    """E|M_T|^2 against (T^2 / 2) |omega|_2^2, plus the quadratic variation."""

    def stat(gp: GPath) -> np.ndarray:
        m2 = np.sum(gp.M[:, -1] ** 2, axis=-1)
        qv = np.trace(quadratic_variation(model, gp.driving)[:, -1], axis1=-2, axis2=-1)
        gap = np.max(np.abs(area_rule_gap(model, gp.driving)), axis=-1)
        return np.stack([m2, qv, gap], axis=1)

    vals = _paths_stat(model, grid, rng, replicas, stat)
    target = grid.T**2 / 2 * float(np.sum(model.omega**2))
    rec = agree(estimate(vals[:, 0]), target)
    rec["quadratic_variation"] = agree(estimate(vals[:, 0]), estimate(vals[:, 1]))
    rec["max_rule_gap"] = float(np.max(vals[:, 2]))
    rec["pass"] = bool(rec["pass"] and rec["quadratic_variation"]["pass"] and rec["max_rule_gap"] == 0.0)
    return rec


def cmk_check(lam: float, T: float, steps: int, replicas: int, rng: RNGStream) -> dict:
    """E exp(lam^2 / 2 int_0^T b^2 ds) for a 1D Brownian motion vs cos(lam T)^(-1/2).

    The time integral uses the trapezoid rule, which is unbiased for E int b^2.
    """
    if lam * T >= np.pi / 2:
        raise ValueError("need lam * T < pi / 2")
    dt = T / steps

    def stat(rr: range) -> np.ndarray:
        b = np.cumsum(normals(rng, rr, (steps,)) * np.sqrt(dt), axis=1)
        sq = b * b
        integral = dt * (np.sum(sq, axis=1) - sq[:, -1] / 2)
        return 0.5 * lam * lam * integral

    logs = replica_map(stat, replicas)
    target = float(np.cos(lam * T) ** -0.5)
    plain = estimate(np.exp(logs))
    rec = agree(plain, target)
    rec["log_domain_mean"] = log_mean_exp(logs).mean
    return rec


def log_cos_constant(k: float) -> float:
    """Smallest c with -ln(cos x) / 2 <= c x^2 on [0, k], k < pi / 2."""
    if not 0 <= k < np.pi / 2:
        raise ValueError("need 0 <= k < pi / 2")
    if k < 1e-4:
        return 0.25 + k * k / 24
    return float(-0.5 * np.log(np.cos(k)) / (k * k))


def exp_moment_bound(model: Model, lam: float, T: float) -> float:
    const = compute_constants(model)
    limit = np.pi / (4 * model.d * T * np.sqrt(const.gamma)) if const.gamma > 0 else np.inf
    if not 0 <= lam < limit:
        raise ValueError(f"lam must lie in [0, {limit:.6g})")
    k = 2 * lam * model.d * np.sqrt(const.gamma) * T
    return float(2 * np.exp(2 * log_cos_constant(k) * lam**2 * model.d * T**2 * const.hs_norm_sq))


def exp_moment_area(model: Model, lam: float, grid: TimeGrid, replicas: int, rng: RNGStream) -> dict:
    """E exp(lam |M_T|) against the two-sided exponential bound."""
    bound = exp_moment_bound(model, lam, grid.T)
    logs = _paths_stat(
        model, grid, rng, replicas, lambda gp: lam * np.linalg.norm(gp.M[:, -1], axis=-1)
    )
    rec = one_sided(estimate(np.exp(logs)), bound)
    rec["log_domain_mean"] = log_mean_exp(logs).mean
    return rec


def supermartingale_check(model: Model, grid: TimeGrid, replicas: int, rng: RNGStream, component: int = 0) -> dict:
    """E exp(2 N_T - 2 <N>_T) <= 1 for N = <M, f_component>."""

    def stat(gp: GPath) -> np.ndarray:
        N = gp.M[:, -1, component]
        qv = quadratic_variation(model, gp.driving)[:, -1, component, component]
        return 2 * N - 2 * qv

    logs = _paths_stat(model, grid, rng, replicas, stat)
    rec = one_sided(estimate(np.exp(logs)), 1.0)
    rec["log_domain_mean"] = log_mean_exp(logs).mean
    return rec


def refinement_gaps(model: Model, T: float, base_steps: int, levels: int, replicas: int, rng: RNGStream) -> np.ndarray:
    """RMS of M_T(steps) - M_T(2 steps) on a coupled refinement ladder.

    The finest grid has base_steps * 2**levels steps; coarser paths sum
    adjacent increments.  Returns ``levels`` RMS gaps, coarse to fine.
    """
    fine = base_steps * 2**levels
    dt = T / fine

    def stat(rr: range) -> np.ndarray:
        z = normals(rng, rr, (fine, model.n)) * np.sqrt(dt)
        ends = []
        inc = z
        for _ in range(levels + 1):
            B = _prepend_zero(inc)
            ends.append(np.sum(model.form(B[:, :-1], inc), axis=1))
            inc = inc[:, 0::2] + inc[:, 1::2] if inc.shape[1] > 1 else inc
        ends = ends[::-1]  # coarse to fine
        return np.stack(
            [np.sum((ends[i] - ends[i + 1]) ** 2, axis=-1) for i in range(levels)], axis=1
        )

    sq = replica_map(stat, replicas)
    return np.sqrt(np.mean(sq, axis=0))


def increment_correlation(model: Model, grid: TimeGrid, replicas: int, rng: RNGStream, split: float = 0.5) -> dict:
    """Correlation of area increments over [0, s] and [s, T] (first component)."""
    k = grid.index(split * grid.T)

    def stat(gp: GPath) -> np.ndarray:
        first = gp.M[:, k, 0]
        second = gp.M[:, -1, 0] - gp.M[:, k, 0]
        return first * second

    return agree(estimate(_paths_stat(model, grid, rng, replicas, stat)), 0.0)


def domination_check(model: Model, variances, func: Callable[[np.ndarray], np.ndarray], replicas: int, rng: RNGStream) -> dict:
    """E f(|x|_W) under a Gaussian with smaller variances is no larger."""
    variances = np.asarray(variances, dtype=float)
    if np.any(variances > 1) or np.any(variances < 0):
        raise ValueError("variances must lie in [0, 1]")

    def stat(rr: range) -> np.ndarray:
        z = normals(rng, rr, (model.n,))
        return np.stack([func(model.w_norm(np.sqrt(variances) * z)), func(model.w_norm(z))], axis=1)

    vals = replica_map(stat, replicas)
    return one_sided(estimate(vals[:, 0]), estimate(vals[:, 1]))
