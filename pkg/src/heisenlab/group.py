"""Heisenberg-type group arithmetic at finite dimension.

A model is a skew bilinear form omega: R^n x R^n -> R^d given by d skew
matrices.  The group is R^n x R^d with

    (w1, c1) * (w2, c2) = (w1 + w2, c1 + c2 + omega(w1, w2) / 2)

and the Lie algebra is the same vector space with bracket
[(A, a), (B, b)] = (0, omega(A, B)).  The exponential map is the identity
in these coordinates.

The form is always evaluated pair-wise over the strict upper triangle,
``sum_{i<j} W_ij (u_i v_j - u_j v_i)``, which makes ``omega(u, u) == 0`` and
``omega(u, v) == -omega(v, u)`` hold bit for bit in floating point.  The
same code path runs on numpy object arrays of ``fractions.Fraction`` for
exact rational checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Any, Mapping, Sequence

import numpy as np

SKEW_TOL = 1e-12


def _frozen(x, length: int, name: str) -> np.ndarray:
    arr = np.array(x, dtype=float).reshape(-1)
    if arr.shape != (length,):
        raise ValueError(f"{name} must have length {length}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class Model:
    """Finite-dimensional Heisenberg-type structure.

    ``omega[l, i, j]`` is the l-th center component of omega(e_i, e_j).
    ``w_weights`` define the W-norm ``|w|_W^2 = sum_j weights_j w_j^2``.
    """

    n: int
    d: int
    omega: np.ndarray
    w_weights: np.ndarray | None = None
    label: str = ""
    complex_hs_norm_sq: float | None = None
    info: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        n, d = int(self.n), int(self.d)
        if n < 1 or d < 1:
            raise ValueError("n and d must be positive")
        om = np.array(self.omega, dtype=float)
        if om.shape == (n, n) and d == 1:
            om = om[None]
        if om.shape != (d, n, n):
            raise ValueError(f"omega must have shape ({d}, {n}, {n}), got {om.shape}")
        if not np.all(np.isfinite(om)):
            raise ValueError("omega has non-finite entries")
        sym = 0.5 * (om + np.swapaxes(om, 1, 2))
        if np.max(np.abs(sym), initial=0.0) > SKEW_TOL:
            raise ValueError("omega matrices must be skew-symmetric")
        om = 0.5 * (om - np.swapaxes(om, 1, 2))
        om.flags.writeable = False
        weights = np.ones(n) if self.w_weights is None else self.w_weights
        weights = _frozen(weights, n, "w_weights")
        if np.any(weights <= 0):
            raise ValueError("w_weights must be strictly positive")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "omega", om)
        object.__setattr__(self, "w_weights", weights)
        object.__setattr__(self, "info", dict(self.info))

    @cached_property
    def _pairs(self):
        iu, ju = np.triu_indices(self.n, 1)
        coef = self.omega[:, iu, ju].T  # (P, d)
        keep = np.any(coef != 0.0, axis=1)
        return iu[keep], ju[keep], np.ascontiguousarray(coef[keep])

    @cached_property
    def _pairs_exact(self):
        iu, ju, coef = self._pairs
        exact = np.array([[Fraction(x) for x in row] for row in coef], dtype=object)
        return iu, ju, exact.reshape(coef.shape)

    def form(self, u, v) -> np.ndarray:
        """omega(u, v), broadcasting over leading axes."""
        u = np.asarray(u)
        v = np.asarray(v)
        if u.shape[-1] != self.n or v.shape[-1] != self.n:
            raise ValueError(f"vectors must have trailing length {self.n}")
        exact = u.dtype == object or v.dtype == object
        iu, ju, coef = self._pairs_exact if exact else self._pairs
        prod = u[..., iu] * v[..., ju] - u[..., ju] * v[..., iu]
        if exact:
            shape = np.broadcast_shapes(u.shape[:-1], v.shape[:-1])
            out = np.empty(shape + (self.d,), dtype=object)
            out[...] = Fraction(0)
            for p in range(coef.shape[0]):
                out = out + prod[..., p : p + 1] * coef[p]
            return out
        return prod @ coef

    def w_norm(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        return np.sqrt(np.sum(self.w_weights * w * w, axis=-1))

    def to_dict(self) -> dict:
        out = {
            "n": self.n,
            "d": self.d,
            "omega": self.omega.tolist(),
            "w_weights": self.w_weights.tolist(),
        }
        if self.label:
            out["label"] = self.label
        return out

    @classmethod
    def from_dict(cls, data: Mapping) -> "Model":
        return cls(
            n=int(data["n"]),
            d=int(data["d"]),
            omega=np.asarray(data["omega"], dtype=float),
            w_weights=data.get("w_weights"),
            label=data.get("label", ""),
        )


@dataclass(frozen=True, eq=False)
class GroupElement:
    w: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "w", _frozen(self.w, np.size(self.w), "w"))
        object.__setattr__(self, "c", _frozen(self.c, np.size(self.c), "c"))

    @classmethod
    def identity(cls, model: Model) -> "GroupElement":
        return cls(np.zeros(model.n), np.zeros(model.d))

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.w, self.c])

    def to_dict(self) -> dict:
        return {"w": self.w.tolist(), "c": self.c.tolist()}

    @classmethod
    def from_dict(cls, data: Mapping) -> "GroupElement":
        return cls(data["w"], data["c"])

    def __eq__(self, other):
        if not isinstance(other, GroupElement):
            return NotImplemented
        return np.array_equal(self.w, other.w) and np.array_equal(self.c, other.c)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    A: np.ndarray
    a: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "A", _frozen(self.A, np.size(self.A), "A"))
        object.__setattr__(self, "a", _frozen(self.a, np.size(self.a), "a"))

    @classmethod
    def zero(cls, model: Model) -> "AlgebraElement":
        return cls(np.zeros(model.n), np.zeros(model.d))

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.A, self.a])

    def scaled(self, s: float) -> "AlgebraElement":
        return AlgebraElement(s * self.A, s * self.a)

    def to_dict(self) -> dict:
        return {"A": self.A.tolist(), "a": self.a.tolist()}

    @classmethod
    def from_dict(cls, data: Mapping) -> "AlgebraElement":
        return cls(data["A"], data["a"])

    def __eq__(self, other):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        return np.array_equal(self.A, other.A) and np.array_equal(self.a, other.a)

    __hash__ = None


def _check(model: Model, w, c):
    if np.shape(w)[-1] != model.n or np.shape(c)[-1] != model.d:
        raise ValueError(
            f"element does not conform to model (n={model.n}, d={model.d})"
        )


def evaluate_form(model: Model, w1, w2) -> np.ndarray:
    return model.form(w1, w2)


def mul_arrays(model: Model, w1, c1, w2, c2):
    """Group product on coordinate arrays with leading batch axes."""
    return w1 + w2, c1 + c2 + model.form(w1, w2) / 2


def multiply(model: Model, g1: GroupElement, g2: GroupElement) -> GroupElement:
    _check(model, g1.w, g1.c)
    _check(model, g2.w, g2.c)
    return GroupElement(*mul_arrays(model, g1.w, g1.c, g2.w, g2.c))


def inverse(g: GroupElement) -> GroupElement:
    return GroupElement(-g.w, -g.c)


def bracket(model: Model, h1: AlgebraElement, h2: AlgebraElement) -> AlgebraElement:
    _check(model, h1.A, h1.a)
    _check(model, h2.A, h2.a)
    return AlgebraElement(np.zeros(model.n), model.form(h1.A, h2.A))


def exp(h: AlgebraElement) -> GroupElement:
    return GroupElement(h.A, h.a)


def log(g: GroupElement) -> AlgebraElement:
    return AlgebraElement(g.w, g.c)


def left_translate(model: Model, g: GroupElement, h: AlgebraElement) -> AlgebraElement:
    """Coordinates of the left-translated tangent vector l_{g*} h."""
    _check(model, g.w, g.c)
    _check(model, h.A, h.a)
    return AlgebraElement(h.A, h.a + model.form(g.w, h.A) / 2)


def dilate(lam: float, g: GroupElement) -> GroupElement:
    if not lam > 0:
        raise ValueError("dilation factor must be positive")
    return GroupElement(lam * g.w, lam * lam * g.c)


def dilate_algebra(lam: float, h: AlgebraElement) -> AlgebraElement:
    if not lam > 0:
        raise ValueError("dilation factor must be positive")
    return AlgebraElement(lam * h.A, lam * lam * h.a)


def gcm_norm(h) -> float:
    """Cameron-Martin Lie algebra norm sqrt(|A|^2 + |a|^2)."""
    if isinstance(h, GroupElement):
        first, second = h.w, h.c
    else:
        first, second = h.A, h.a
    return float(np.sqrt(first @ first + second @ second))


def banach_norm(model: Model, g: GroupElement) -> float:
    """|w|_W + |c| on the group."""
    _check(model, g.w, g.c)
    return float(model.w_norm(g.w) + np.linalg.norm(g.c))


def random_model(rng: np.random.Generator, n: int, d: int, scale: float = 1.0) -> Model:
    mats = rng.normal(scale=scale, size=(d, n, n))
    return Model(n, d, mats - np.swapaxes(mats, 1, 2))


def as_vector(x: Sequence[float] | float, length: int) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.shape != (length,):
        raise ValueError(f"expected length {length}, got {arr.shape}")
    return arr
