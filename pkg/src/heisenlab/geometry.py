"""Lengths of paths in the Cameron-Martin group and distance estimates.

Paths are piecewise linear in coordinates.  On a linear segment from g_i
with increment (dw, dc) the left-logarithmic derivative is constant,
equal to (dw, dc - omega(w_i, dw)/2), so the left-endpoint sum is the exact
length of the interpolated path.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.optimize import minimize

from .forms import compute_constants
from .group import GroupElement, Model, gcm_norm, inverse, multiply


@dataclass(frozen=True, eq=False)
class DiscretePath:
    times: np.ndarray
    w: np.ndarray  # (K+1, n)
    c: np.ndarray  # (K+1, d)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        w = np.asarray(self.w, dtype=float)
        c = np.asarray(self.c, dtype=float)
        if t.ndim != 1 or t.size < 2:
            raise ValueError("a path needs at least two points")
        if np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        if w.shape[0] != t.size or c.shape[0] != t.size:
            raise ValueError("points and times disagree in length")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "c", c)

    @property
    def points(self) -> list[GroupElement]:
        return [GroupElement(w, c) for w, c in zip(self.w, self.c)]

    @classmethod
    def from_points(cls, times, points) -> "DiscretePath":
        return cls(times, np.stack([p.w for p in points]), np.stack([p.c for p in points]))

    @classmethod
    def straight(cls, x: GroupElement, y: GroupElement, segments: int = 1) -> "DiscretePath":
        s = np.linspace(0.0, 1.0, segments + 1)[:, None]
        return cls(s[:, 0], x.w + s * (y.w - x.w), x.c + s * (y.c - x.c))


@dataclass(frozen=True)
class HorizontalFlag:
    max_center_defect: float

    def is_horizontal(self, tol: float = 1e-12) -> bool:
        return self.max_center_defect <= tol


def _segment_vectors(model: Model, w: np.ndarray, c: np.ndarray, rule: str = "left"):
    dw = np.diff(w, axis=0)
    dc = np.diff(c, axis=0)
    if rule == "left":
        base = w[:-1]
    elif rule == "midpoint":
        base = (w[:-1] + w[1:]) / 2
    else:
        raise ValueError(f"unknown rule {rule!r}")
    return dw, dc - model.form(base, dw) / 2


def path_length(model: Model, path: DiscretePath, rule: str = "left") -> float:
    """Sum of |dg - [g_i, dg]/2| over segments.

    For piecewise-linear paths the midpoint rule gives the same value in
    exact arithmetic, since omega(dw, dw) = 0.
    """
    dw, dcv = _segment_vectors(model, path.w, path.c, rule)
    return float(np.sum(np.sqrt(np.sum(dw**2, axis=1) + np.sum(dcv**2, axis=1))))


def is_horizontal(model: Model, path: DiscretePath) -> HorizontalFlag:
    _, dcv = _segment_vectors(model, path.w, path.c)
    rate = np.linalg.norm(dcv, axis=1) / np.diff(path.times)
    return HorizontalFlag(float(np.max(rate)))


def straight_line_bound(model: Model, x: GroupElement, y: GroupElement) -> float:
    """(1 + C min(|x|, |y|) / 2) |y - x| with C the bracket constant."""
    C = compute_constants(model).c_constant_upper
    diff = GroupElement(y.w - x.w, y.c - x.c)
    return (1 + 0.5 * C * min(gcm_norm(x), gcm_norm(y))) * gcm_norm(diff)


def dilate_path(lam: float, path: DiscretePath) -> DiscretePath:
    return DiscretePath(path.times, lam * path.w, lam * lam * path.c)


def horizontal_loop(model: Model, A, B, steps: int) -> DiscretePath:
    """Horizontal lift of xi(t) - A with xi(t) = A cos t + B sin t, t in [0, 2 pi].

    Center coordinates are accumulated with the same left-endpoint rule as
    the length, so the discrete path is exactly horizontal.
    """
    if steps < 8:
        raise ValueError("need at least 8 steps")
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    t = np.linspace(0.0, 2 * np.pi, steps + 1)
    w = np.cos(t)[:, None] * A + np.sin(t)[:, None] * B - A
    w[-1] = 0.0
    dc = model.form(w[:-1], np.diff(w, axis=0)) / 2
    c = np.vstack([np.zeros((1, model.d)), np.cumsum(dc, axis=0)])
    return DiscretePath(t, w, c)


def rho_squared(model: Model, g: GroupElement) -> float:
    return float(model.w_norm(g.w) ** 2 + np.linalg.norm(g.c))


def _length_and_grad(flat: np.ndarray, model: Model, x: GroupElement, y: GroupElement, k: int):
    n, d = model.n, model.d
    inner = flat.reshape(k - 1, n + d)
    w = np.vstack([x.w, inner[:, :n], y.w])
    c = np.vstack([x.c, inner[:, n:], y.c])
    dw = np.diff(w, axis=0)
    # omega(w_i, dw_i) = omega(w_i, w_{i+1})
    vc = np.diff(c, axis=0) - model.form(w[:-1], w[1:]) / 2
    norms = np.sqrt(np.sum(dw**2, axis=1) + np.sum(vc**2, axis=1))
    total = float(np.sum(norms))
    safe = np.where(norms > 0, norms, 1.0)
    uw = dw / safe[:, None]
    uc = vc / safe[:, None]
    gw = np.zeros_like(w)
    gc = np.zeros_like(c)
    gw[:-1] -= uw
    gw[1:] += uw
    gc[:-1] -= uc
    gc[1:] += uc
    om = model.omega
    # d omega(w_i, w_{i+1})_l / d w_i = Omega_l w_{i+1}; / d w_{i+1} = Omega_l^T w_i
    gw[:-1] -= 0.5 * np.einsum("kl,lij,kj->ki", uc, om, w[1:])
    gw[1:] -= 0.5 * np.einsum("kl,lij,ki->kj", uc, om, w[:-1])
    grad = np.hstack([gw[1:-1], gc[1:-1]]).reshape(-1)
    return total, grad


def _resample(path_w: np.ndarray, path_c: np.ndarray, k: int) -> np.ndarray:
    s_old = np.linspace(0.0, 1.0, path_w.shape[0])
    s_new = np.linspace(0.0, 1.0, k + 1)[1:-1]
    cols = [np.interp(s_new, s_old, col) for col in np.hstack([path_w, path_c]).T]
    return np.stack(cols, axis=1).reshape(-1)


@dataclass(frozen=True)
class DistanceEstimate:
    estimate: float
    path: DiscretePath
    converged: bool
    starts: int


def optimize_distance(
    model: Model,
    x: GroupElement,
    y: GroupElement,
    segments: int = 24,
    iters: int = 2000,
    extra_starts: int = 2,
) -> DistanceEstimate:
    """Locally minimize the discrete length between fixed endpoints.

    Starts from the straight line, plus loop-shaped starts built from the
    horizontal construction (the straight line is a saddle point of the
    length for long vertical targets, so a descent started only there can
    stall).
    """
    if segments < 2:
        raise ValueError("need at least two segments")
    k = segments
    n = model.n
    straight = DiscretePath.straight(x, y, k)
    starts = [np.hstack([straight.w[1:-1], straight.c[1:-1]]).reshape(-1)]
    rel = multiply(model, inverse(x), y)
    try:
        gadget = _cc_path(model, rel, steps_per_loop=4 * k)
        if gadget is not None:
            w_abs = []
            c_abs = []
            for wi, ci in zip(gadget.w, gadget.c):
                g = multiply(model, x, GroupElement(wi, ci))
                w_abs.append(g.w)
                c_abs.append(g.c)
            starts.append(_resample(np.array(w_abs), np.array(c_abs), k))
    except ValueError:
        pass
    rng = np.random.default_rng(12345)
    scale = max(gcm_norm(rel), 1e-3)
    for _ in range(extra_starts):
        bump = np.sin(np.pi * np.linspace(0, 1, k + 1)[1:-1])[:, None]
        noise = rng.normal(size=(1, n + model.d)) * 0.3 * np.sqrt(scale)
        starts.append(starts[0] + (bump * noise).reshape(-1))

    best_val = np.inf
    best_flat = starts[0]
    converged = True
    for flat0 in starts:
        res = minimize(
            _length_and_grad,
            flat0,
            args=(model, x, y, k),
            jac=True,
            method="L-BFGS-B",
            options={"maxiter": iters, "gtol": 1e-12, "ftol": 1e-15},
        )
        if res.fun < best_val:
            best_val = float(res.fun)
            best_flat = res.x
            converged = bool(res.success)
    inner = best_flat.reshape(k - 1, n + model.d)
    path = DiscretePath(
        np.linspace(0.0, 1.0, k + 1),
        np.vstack([x.w, inner[:, :n], y.w]),
        np.vstack([x.c, inner[:, n:], y.c]),
    )
    return DistanceEstimate(path_length(model, path), path, converged, len(starts))


def _loop_basis(model: Model):
    """Greedy choice of basis pairs whose brackets span the center."""
    chosen: list[tuple[int, int]] = []
    vecs: list[np.ndarray] = []
    pairs = sorted(
        combinations(range(model.n), 2),
        key=lambda p: -np.linalg.norm(model.omega[:, p[0], p[1]]),
    )
    for i, j in pairs:
        v = np.pi * model.omega[:, i, j]
        trial = np.array(vecs + [v])
        if np.linalg.matrix_rank(trial, tol=1e-10) > len(vecs):
            chosen.append((i, j))
            vecs.append(v)
            if len(vecs) == model.d:
                break
    if len(vecs) < model.d:
        raise ValueError("form not total: brackets do not span the center")
    return chosen, np.array(vecs).T  # columns pi * omega(e_i, e_j)


def _cc_plan(model: Model, target: GroupElement):
    pairs, basis = _loop_basis(model)
    # after the ray to (A, 0) the remaining center displacement is target.c
    coeffs = np.linalg.solve(basis, target.c)
    return pairs, coeffs


def cc_upper(model: Model, target: GroupElement) -> float:
    """Length of a horizontal path from e to target: a ray plus loop gadgets.

    Loop gadget for coefficient eps on the pair (e_i, e_j) uses
    A = sgn(eps) sqrt|eps| e_i, B = sqrt|eps| e_j and has length
    2 pi sqrt|eps|; it moves the center by eps * pi * omega(e_i, e_j).
    """
    pairs, coeffs = _cc_plan(model, target)
    return float(np.linalg.norm(target.w) + 2 * np.pi * np.sum(np.sqrt(np.abs(coeffs))))


def cc_crude_upper(model: Model, target: GroupElement) -> float:
    """The same construction bounded by 2 pi (|A'| + |B'|) per loop."""
    pairs, coeffs = _cc_plan(model, target)
    return float(np.linalg.norm(target.w) + 4 * np.pi * np.sum(np.sqrt(np.abs(coeffs))))


def _cc_path(model: Model, target: GroupElement, steps_per_loop: int = 64):
    pairs, coeffs = _cc_plan(model, target)
    pieces_w = [np.zeros((1, model.n))]
    pieces_c = [np.zeros((1, model.d))]
    cur = GroupElement.identity(model)
    for (i, j), eps in zip(pairs, coeffs):
        if eps == 0:
            continue
        A = np.zeros(model.n)
        B = np.zeros(model.n)
        A[i] = np.sign(eps) * np.sqrt(abs(eps))
        B[j] = np.sqrt(abs(eps))
        loop = horizontal_loop(model, A, B, steps_per_loop)
        for wi, ci in zip(loop.w[1:], loop.c[1:]):
            g = multiply(model, cur, GroupElement(wi, ci))
            pieces_w.append(g.w[None])
            pieces_c.append(g.c[None])
        cur = GroupElement(pieces_w[-1][0], pieces_c[-1][0])
    ray_steps = max(2, steps_per_loop // 4)
    for s in np.linspace(0, 1, ray_steps + 1)[1:]:
        g = multiply(model, cur, GroupElement(s * target.w, np.zeros(model.d)))
        pieces_w.append(g.w[None])
        pieces_c.append(g.c[None])
    w = np.vstack(pieces_w)
    c = np.vstack(pieces_c)
    return DiscretePath(np.linspace(0.0, 1.0, w.shape[0]), w, c)
