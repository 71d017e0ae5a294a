"""Statistics of the heat kernel measure, the law of g(T)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .calculus import Poly, generator_L
from .group import Model
from .montecarlo import RNGStream, agree, estimate, log_mean_exp, one_sided, replica_map
from .stochastics import TimeGrid, exp_moment_bound, simulate_paths

TestFunction = Union[Poly, Callable[[np.ndarray, np.ndarray], np.ndarray]]


@dataclass(frozen=True, eq=False)
class EndpointSample:
    w: np.ndarray  # (N, n)
    c: np.ndarray  # (N, d)
    M: np.ndarray  # (N, d), area at T
    T: float
    steps: int
    seed: int
    stream: int

    @property
    def size(self) -> int:
        return self.w.shape[0]

    @property
    def points(self) -> np.ndarray:
        return np.concatenate([self.w, self.c], axis=1)


def apply(f: TestFunction, w: np.ndarray, c: np.ndarray) -> np.ndarray:
    if isinstance(f, Poly):
        return f.evaluate(np.concatenate([w, c], axis=-1))
    return np.asarray(f(w, c), dtype=float)


def sample_nu(model: Model, grid: TimeGrid, N: int, rng: RNGStream) -> EndpointSample:
    d = model.d

    def stat(rr: range) -> np.ndarray:
        gp = simulate_paths(model, grid, rng, rr)
        w, c = gp.endpoint()
        return np.concatenate([w, c, gp.M[:, -1]], axis=1)

    vals = replica_map(stat, N)
    n = model.n
    return EndpointSample(vals[:, :n], vals[:, n : n + d], vals[:, n + d :], grid.T, grid.steps, rng.seed, rng.stream)


def heat_equation_check(
    model: Model,
    f: Poly,
    grid: TimeGrid,
    snapshots: int,
    N: int,
    rng: RNGStream,
) -> dict:
    """nu_T(f) against f(e) + (1/2) int_0^T nu_t(L f) dt on the same paths.

    The time integral uses the trapezoid rule over ``snapshots`` equal
    intervals (grid steps must be a multiple).  The comparison uses the
    per-path difference, whose SE accounts for the correlation.
    """
    if grid.steps % snapshots:
        raise ValueError("grid steps must be a multiple of the snapshot count")
    Lf = generator_L(model, f)
    idx = np.arange(0, grid.steps + 1, grid.steps // snapshots)
    h = grid.T / snapshots
    f0 = float(f.evaluate(np.zeros(model.n + model.d)))

    def stat(rr: range) -> np.ndarray:
        gp = simulate_paths(model, grid, rng, rr)
        pts = np.concatenate([gp.w[:, idx], gp.c[:, idx]], axis=-1)
        lvals = Lf.evaluate(pts)
        integral = h * (np.sum(lvals, axis=1) - (lvals[:, 0] + lvals[:, -1]) / 2)
        lhs = f.evaluate(pts[:, -1])
        return np.stack([lhs, f0 + 0.5 * integral], axis=1)

    vals = replica_map(stat, N)
    lhs, rhs = estimate(vals[:, 0]), estimate(vals[:, 1])
    diff = estimate(vals[:, 0] - vals[:, 1])
    rec = agree(lhs, rhs)
    rec["stderr"] = diff.stderr
    rec["margin"] = 4 * diff.stderr - abs(diff.mean)
    rec["tolerance_rule"] = "|lhs - rhs| <= 4 * SE of the paired difference"
    rec["pass"] = bool(abs(diff.mean) <= 4 * diff.stderr + 1e-12 * max(1.0, abs(lhs.mean)))
    return rec


def inversion_check(model: Model, sample: EndpointSample, test_functions: Sequence[TestFunction]) -> list[dict]:
    """Mean of f(g) against mean of f(g^{-1}) = f(-g) on the same sample."""
    out = []
    for f in test_functions:
        a = apply(f, sample.w, sample.c)
        b = apply(f, -sample.w, -sample.c)
        diff = estimate(a - b)
        rec = agree(diff, 0.0)
        rec["lhs"] = float(np.mean(a))
        rec["rhs"] = float(np.mean(b))
        rec["max_pathwise_gap"] = float(np.max(np.abs(a - b)))
        rec["tolerance_rule"] = "|mean(f(g) - f(g^-1))| <= 4 * paired SE"
        out.append(rec)
    return out


def rho_squared_values(model: Model, w: np.ndarray, c: np.ndarray) -> np.ndarray:
    return model.w_norm(w) ** 2 + np.linalg.norm(c, axis=-1)


def exp_rho_moment(model: Model, epsilon: float, sample: EndpointSample) -> dict:
    """E exp((epsilon / T) rho^2) with a sample-size stability diagnostic."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    logs = epsilon / sample.T * rho_squared_values(model, sample.w, sample.c)
    N = logs.size
    trail = [log_mean_exp(logs[: max(2, N // k)]) for k in (4, 2, 1)]
    drift = abs(trail[2].mean - trail[1].mean)
    return {
        "estimate": trail[2].mean,
        "stderr": trail[2].stderr,
        "plain_mean": float(np.mean(np.exp(logs))),
        "trail": [{"n": e.n, "mean": e.mean, "stderr": e.stderr} for e in trail],
        "drift": drift,
        "stable": bool(drift <= 2 * trail[2].stderr),
    }


HYPERCONTRACTIVE_FOURTH = 81.0  # (q - 1)^(q k / 2) with q = 4, chaos order k = 2


def moment_report(model: Model, samples: Sequence[EndpointSample], p_list: Sequence[float]) -> dict:
    """Endpoint moments E|M_T|^p over several horizons, with log-log slopes."""
    Ts = np.array([s.T for s in samples])
    moments = {}
    for p in p_list:
        ests = [estimate(np.linalg.norm(s.M, axis=1) ** p) for s in samples]
        row = {"T": Ts.tolist(), "mean": [e.mean for e in ests], "stderr": [e.stderr for e in ests]}
        means = np.array(row["mean"])
        if len(samples) > 1 and np.all(means > 0):
            slope = float(np.polyfit(np.log(Ts), np.log(means), 1)[0])
            row["slope"] = slope
            row["slope_ok"] = bool(abs(slope - p) <= 0.5)
        moments[str(p)] = row
    out = {"moments": moments}
    hs = float(np.sum(model.omega**2))
    second = [agree(estimate(np.sum(s.M**2, axis=1)), s.T**2 / 2 * hs) for s in samples]
    out["second_moment"] = second
    ratios = []
    for s in samples:
        m2 = np.mean(np.sum(s.M**2, axis=1))
        m4 = np.mean(np.sum(s.M**2, axis=1) ** 2)
        ratios.append(float(m4 / m2**2) if m2 > 0 else 0.0)
    out["fourth_over_second_squared"] = ratios
    out["hypercontractive_ok"] = bool(all(r <= HYPERCONTRACTIVE_FOURTH for r in ratios))
    return out


def scaling_check(model: Model, sample_T: EndpointSample, sample_1: EndpointSample) -> list[dict]:
    """Compare first and second moments of g(T) with Brownian scaling of g(1).

    The driving noise scales as sqrt(T) and the area as T, so g(T) has the
    law of (lam w, lam B0 + lam^2 M / 2) built from g(1), lam = sqrt(T).  The
    dilation (lam w, lam^2 c) matches only when the central noise is absent.
    """
    lam = np.sqrt(sample_T.T / sample_1.T)
    a = sample_T.points
    b0 = sample_1.c - sample_1.M / 2
    b = np.concatenate([lam * sample_1.w, lam * b0 + lam * lam * sample_1.M / 2], axis=1)
    out = []
    for k in range(a.shape[1]):
        out.append(agree(estimate(a[:, k]), estimate(b[:, k])))
        out.append(agree(estimate(a[:, k] ** 2), estimate(b[:, k] ** 2)))
    area = agree(estimate(np.sum(sample_T.M**2, axis=1)), estimate(lam**4 * np.sum(sample_1.M**2, axis=1)))
    out.append(area)
    return out


def exp_moment_sample(model: Model, lam: float, sample: EndpointSample) -> dict:
    bound = exp_moment_bound(model, lam, sample.T)
    logs = lam * np.linalg.norm(sample.M, axis=1)
    return one_sided(estimate(np.exp(logs)), bound)
