"""Reproducible replica-parallel Monte Carlo.

Each replica draws from its own Philox stream keyed by (seed, stream id)
with the replica index in the counter, so a replica's numbers never depend
on how work is split.  Replicas are processed in fixed-size chunks whose
per-replica outputs are concatenated in index order before any reduction,
which keeps every estimate bit-identical across worker counts.
"""

from __future__ import annotations

import contextlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

CHUNK = 512
MASK64 = (1 << 64) - 1

_settings = {"workers": 1}


def set_workers(workers: int) -> None:
    if workers < 1:
        raise ValueError("workers must be positive")
    _settings["workers"] = int(workers)


def get_workers() -> int:
    return _settings["workers"]


@contextlib.contextmanager
def workers(count: int) -> Iterator[None]:
    old = get_workers()
    set_workers(count)
    try:
        yield
    finally:
        set_workers(old)


@dataclass(frozen=True)
class RNGStream:
    """A family of per-replica generators identified by (seed, stream)."""

    seed: int
    stream: int = 0

    def generator(self, replica: int) -> np.random.Generator:
        bits = np.random.Philox(
            key=[self.seed & MASK64, self.stream & MASK64],
            counter=[0, 0, int(replica) & MASK64, 0],
        )
        return np.random.Generator(bits)

    def child(self, tag: int) -> "RNGStream":
        return RNGStream(self.seed, (self.stream * 1_000_003 + 1 + int(tag)) & MASK64)


def normals(rng: RNGStream, replicas: range, shape: tuple[int, ...]) -> np.ndarray:
    """Standard normals of shape (len(replicas),) + shape, one stream per replica."""
    out = np.empty((len(replicas),) + tuple(shape))
    for k, r in enumerate(replicas):
        out[k] = rng.generator(r).standard_normal(shape)
    return out


def replica_map(func: Callable[[range], np.ndarray], total: int, chunk: int = CHUNK) -> np.ndarray:
    """Apply func to consecutive replica ranges and concatenate in order.

    func must return an array whose first axis indexes the replicas of its
    range.  Results do not depend on the worker count.
    """
    if total < 1:
        raise ValueError("need at least one replica")
    ranges = [range(s, min(s + chunk, total)) for s in range(0, total, chunk)]
    nworkers = get_workers()
    if nworkers == 1 or len(ranges) == 1:
        parts = [func(r) for r in ranges]
    else:
        with ThreadPoolExecutor(max_workers=nworkers) as pool:
            parts = list(pool.map(func, ranges))
    return np.concatenate(parts, axis=0)


@dataclass(frozen=True)
class Estimate:
    mean: float
    stderr: float
    n: int

    def to_dict(self) -> dict:
        return {"mean": self.mean, "stderr": self.stderr, "n": self.n}


def estimate(values) -> Estimate:
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    se = float(np.std(values, ddof=1) / np.sqrt(n)) if n > 1 else float("inf")
    return Estimate(float(np.mean(values)), se, n)


def log_mean_exp(logs) -> Estimate:
    """Mean of exp(logs) computed with a max shift; SE via the same shift."""
    logs = np.asarray(logs, dtype=float)
    shift = float(np.max(logs))
    scaled = np.exp(logs - shift)
    est = estimate(scaled)
    return Estimate(float(np.exp(shift) * est.mean), float(np.exp(shift) * est.stderr), est.n)


def agree(a: Estimate | float, b: Estimate | float, sigmas: float = 4.0) -> dict:
    """Two-sided comparison of two (possibly exact) quantities."""
    ma, sa = (a.mean, a.stderr) if isinstance(a, Estimate) else (float(a), 0.0)
    mb, sb = (b.mean, b.stderr) if isinstance(b, Estimate) else (float(b), 0.0)
    se = float(np.hypot(sa, sb))
    gap = abs(ma - mb)
    ok = gap <= sigmas * se or gap <= 1e-12 * max(1.0, abs(ma), abs(mb))
    return {
        "lhs": ma,
        "rhs": mb,
        "se_lhs": sa,
        "se_rhs": sb,
        "stderr": se,
        "margin": sigmas * se - gap,
        "tolerance_rule": f"|lhs - rhs| <= {sigmas:g} * combined SE",
        "pass": bool(ok),
    }


def one_sided(lhs: Estimate | float, rhs: Estimate | float, sigmas: float = 4.0) -> dict:
    """Check lhs <= rhs with sigmas * combined SE of slack."""
    ma, sa = (lhs.mean, lhs.stderr) if isinstance(lhs, Estimate) else (float(lhs), 0.0)
    mb, sb = (rhs.mean, rhs.stderr) if isinstance(rhs, Estimate) else (float(rhs), 0.0)
    se = float(np.hypot(sa, sb))
    return {
        "lhs": ma,
        "rhs": mb,
        "se_lhs": sa,
        "se_rhs": sb,
        "stderr": se,
        "margin": mb - ma,
        "tolerance_rule": f"lhs <= rhs + {sigmas:g} * combined SE",
        "pass": bool(ma <= mb + sigmas * se + 1e-12 * max(1.0, abs(mb))),
    }
