"""Exact calculus on cylinder polynomials over the group coordinates.

Variables are ordered ``w_1..w_n, c_1..c_d``.  Every operator here maps
polynomials to polynomials exactly (up to floating point coefficient
arithmetic), so downstream identities can be compared coefficient by
coefficient.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .group import AlgebraElement, Model

COEFF_RTOL = 1e-10


class Poly:
    """Sparse real polynomial keyed by exponent tuples."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping[tuple, float] | None = None):
        self.nvars = int(nvars)
        clean: dict[tuple, float] = {}
        for exps, coeff in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != self.nvars or min(exps, default=0) < 0:
                raise ValueError(f"bad exponent tuple {exps} for {self.nvars} variables")
            coeff = float(coeff)
            if coeff != 0.0:
                clean[exps] = clean.get(exps, 0.0) + coeff
        self.terms = {k: v for k, v in clean.items() if v != 0.0}

    # construction
    @classmethod
    def constant(cls, nvars: int, value: float) -> "Poly":
        return cls(nvars, {(0,) * nvars: value})

    @classmethod
    def variable(cls, nvars: int, index: int) -> "Poly":
        exps = [0] * nvars
        exps[index] = 1
        return cls(nvars, {tuple(exps): 1.0})

    @classmethod
    def linear(cls, coeffs: Sequence[float], const: float = 0.0) -> "Poly":
        nvars = len(coeffs)
        terms = {(0,) * nvars: const}
        for i, a in enumerate(coeffs):
            exps = [0] * nvars
            exps[i] = 1
            terms[tuple(exps)] = a
        return cls(nvars, terms)

    @classmethod
    def from_terms(cls, nvars: int, items: Iterable[Mapping]) -> "Poly":
        out: dict[tuple, float] = {}
        for item in items:
            key = tuple(item["exponents"])
            out[key] = out.get(key, 0.0) + float(item["coeff"])
        return cls(nvars, out)

    def to_terms(self) -> list[dict]:
        return [
            {"coeff": c, "exponents": list(e)} for e, c in sorted(self.terms.items())
        ]

    # algebra
    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.nvars != self.nvars:
                raise ValueError("polynomials live in different variable spaces")
            return other
        return Poly.constant(self.nvars, float(other))

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0.0) + v
        return Poly(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.nvars, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Poly):
            s = float(other)
            return Poly(self.nvars, {k: s * v for k, v in self.terms.items()})
        other = self._coerce(other)
        out: dict[tuple, float] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                key = tuple(a + b for a, b in zip(e1, e2))
                out[key] = out.get(key, 0.0) + c1 * c2
        return Poly(self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers are not polynomials")
        out = Poly.constant(self.nvars, 1.0)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    __hash__ = None

    def __repr__(self):
        if not self.terms:
            return "Poly(0)"
        parts = []
        for e, c in sorted(self.terms.items()):
            mono = "*".join(
                f"x{i}" if p == 1 else f"x{i}^{p}" for i, p in enumerate(e) if p
            )
            parts.append(f"{c:g}" + (f"*{mono}" if mono else ""))
        return "Poly(" + " + ".join(parts) + ")"

    # queries
    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def is_zero(self) -> bool:
        return not self.terms

    def allclose(self, other: "Poly", rtol: float = COEFF_RTOL, atol: float = 1e-12) -> bool:
        other = self._coerce(other)
        scale = max(
            [abs(v) for v in self.terms.values()]
            + [abs(v) for v in other.terms.values()]
            + [0.0]
        )
        for key in set(self.terms) | set(other.terms):
            diff = abs(self.terms.get(key, 0.0) - other.terms.get(key, 0.0))
            if diff > atol + rtol * scale:
                return False
        return True

    # calculus
    def diff(self, index: int) -> "Poly":
        out: dict[tuple, float] = {}
        for e, c in self.terms.items():
            p = e[index]
            if p:
                key = e[:index] + (p - 1,) + e[index + 1 :]
                out[key] = out.get(key, 0.0) + c * p
        return Poly(self.nvars, out)

    def directional(self, vec: Sequence[float]) -> "Poly":
        out = Poly(self.nvars)
        for i, a in enumerate(vec):
            if a != 0.0:
                out = out + a * self.diff(i)
        return out

    def evaluate(self, x) -> np.ndarray:
        """Evaluate on points with trailing axis of length nvars."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.nvars:
            raise ValueError(f"points must have trailing length {self.nvars}")
        out = np.zeros(x.shape[:-1])
        cache: dict[tuple[int, int], np.ndarray] = {}
        for e, c in self.terms.items():
            term = np.full(x.shape[:-1], c)
            for i, p in enumerate(e):
                if p:
                    key = (i, p)
                    if key not in cache:
                        cache[key] = x[..., i] ** p
                    term = term * cache[key]
            out = out + term
        return out

    def __call__(self, x) -> np.ndarray:
        return self.evaluate(x)

    def compose(self, subs: Sequence["Poly"]) -> "Poly":
        """Substitute polynomial ``subs[i]`` for variable i."""
        if len(subs) != self.nvars:
            raise ValueError("need one substitution per variable")
        target = subs[0].nvars if subs else 0
        out = Poly(target)
        powers: dict[tuple[int, int], Poly] = {}
        for e, c in self.terms.items():
            term = Poly.constant(target, c)
            for i, p in enumerate(e):
                if p:
                    if (i, p) not in powers:
                        powers[(i, p)] = subs[i] ** p
                    term = term * powers[(i, p)]
            out = out + term
        return out

    def embed(self, nvars: int) -> "Poly":
        """View as a polynomial in more variables (new ones appended)."""
        pad = (0,) * (nvars - self.nvars)
        return Poly(nvars, {e + pad: c for e, c in self.terms.items()})


def nvars(model: Model) -> int:
    return model.n + model.d


def w_var(model: Model, i: int) -> Poly:
    return Poly.variable(nvars(model), i)


def c_var(model: Model, l: int) -> Poly:
    return Poly.variable(nvars(model), model.n + l)


def evaluate_on(f: Poly, w, c) -> np.ndarray:
    return f.evaluate(np.concatenate([np.asarray(w, float), np.asarray(c, float)], axis=-1))


def form_with(model: Model, A) -> list[Poly]:
    """The d linear polynomials w -> omega(w, A)_l."""
    A = np.asarray(A, dtype=float)
    N = nvars(model)
    out = []
    for l in range(model.d):
        coeffs = np.zeros(N)
        coeffs[: model.n] = model.omega[l] @ A
        out.append(Poly.linear(coeffs))
    return out


def partial_derivative(f: Poly, h: AlgebraElement) -> Poly:
    return f.directional(h.vector)


def left_invariant_derivative(model: Model, h: AlgebraElement, f: Poly) -> Poly:
    """g -> f'(g)(A, a + omega(w, A)/2)."""
    out = Poly(f.nvars)
    for i, Ai in enumerate(h.A):
        if Ai != 0.0:
            out = out + Ai * f.diff(i)
    drift = form_with(model, h.A)
    for l in range(model.d):
        coeff = drift[l] * 0.5 + h.a[l]
        if not coeff.is_zero():
            out = out + coeff * f.diff(model.n + l)
    return out


def _basis(model: Model, k: int) -> AlgebraElement:
    v = np.zeros(nvars(model))
    v[k] = 1.0
    return AlgebraElement(v[: model.n], v[model.n :])


def generator_L(model: Model, f: Poly) -> Poly:
    """Sum of squares of the orthonormal left-invariant fields."""
    out = Poly(f.nvars)
    for j in range(model.n):
        e = _basis(model, j)
        out = out + left_invariant_derivative(
            model, e, left_invariant_derivative(model, e, f)
        )
    for l in range(model.d):
        e = _basis(model, model.n + l)
        out = out + left_invariant_derivative(
            model, e, left_invariant_derivative(model, e, f)
        )
    return out


@dataclass(frozen=True)
class TensorGamma:
    """Coefficient data of the two second-order tensors in the generator.

    ``mixed[l, i, j]``: coefficient of ``w_i`` in omega(w, e_j)_l, contracted
    against d^2 f / dc_l dw_j.  ``center[l, m]``: the quadratic form
    ``w^T center[l, m] w = sum_j omega(w, e_j)_l omega(w, e_j)_m``,
    contracted against d^2 f / dc_l dc_m.
    """

    mixed: np.ndarray
    center: np.ndarray

    @classmethod
    def from_model(cls, model: Model) -> "TensorGamma":
        om = np.asarray(model.omega)
        center = np.einsum("lij,mkj->lmik", om, om)
        return cls(mixed=om.copy(), center=center)

    def _linear(self, model: Model, l: int, j: int) -> Poly:
        coeffs = np.zeros(nvars(model))
        coeffs[: model.n] = self.mixed[l, :, j]
        return Poly.linear(coeffs)

    def _quadratic(self, model: Model, l: int, m: int) -> Poly:
        Q = self.center[l, m]
        N = nvars(model)
        terms: dict[tuple, float] = {}
        for i in range(model.n):
            for k in range(model.n):
                if Q[i, k] != 0.0:
                    e = [0] * N
                    e[i] += 1
                    e[k] += 1
                    terms[tuple(e)] = terms.get(tuple(e), 0.0) + Q[i, k]
        return Poly(N, terms)

    def contract_mixed(self, model: Model, f: Poly) -> Poly:
        out = Poly(f.nvars)
        for l in range(model.d):
            fc = f.diff(model.n + l)
            for j in range(model.n):
                second = fc.diff(j)
                if not second.is_zero():
                    out = out + self._linear(model, l, j) * second
        return out

    def contract_center(self, model: Model, f: Poly) -> Poly:
        out = Poly(f.nvars)
        for l in range(model.d):
            fl = f.diff(model.n + l)
            for m in range(model.d):
                second = fl.diff(model.n + m)
                if not second.is_zero():
                    out = out + self._quadratic(model, l, m) * second
        return out


def generator_L_decomposed(model: Model, f: Poly) -> Poly:
    """Flat Laplacians plus the mixed and center second-order corrections."""
    lap = Poly(f.nvars)
    for k in range(nvars(model)):
        lap = lap + f.diff(k).diff(k)
    tg = TensorGamma.from_model(model)
    return lap + tg.contract_mixed(model, f) + 0.25 * tg.contract_center(model, f)


def gradient(model: Model, f: Poly) -> list[Poly]:
    return [
        left_invariant_derivative(model, _basis(model, k), f) for k in range(nvars(model))
    ]


def _shifted_substitution(model: Model, k: AlgebraElement, side: str) -> list[Poly]:
    """Coordinates of (s k) * g or g * (s k) in variables (w, c, s)."""
    N = nvars(model)
    s = Poly.variable(N + 1, N)
    w = [Poly.variable(N + 1, i) for i in range(model.n)]
    subs = [w[i] + k.A[i] * s for i in range(model.n)]
    for l in range(model.d):
        coeffs = np.zeros(N + 1)
        coeffs[: model.n] = model.omega[l] @ k.A  # omega(w, A)_l
        cross = Poly.linear(coeffs) * s
        sign = -0.5 if side == "right" else 0.5  # omega(sA, w) = -omega(w, sA)
        subs.append(Poly.variable(N + 1, model.n + l) + k.a[l] * s + sign * cross)
    return subs


def _d_ds_at_zero(model: Model, g: Poly) -> Poly:
    N = nvars(model)
    first = g.diff(N)
    return Poly(N, {e[:N]: c for e, c in first.terms.items() if e[N] == 0})


def right_derivative(model: Model, k: AlgebraElement, f: Poly) -> Poly:
    """d/ds f((s k) g) at s = 0, by substituting the group law."""
    return _d_ds_at_zero(model, f.compose(_shifted_substitution(model, k, "right")))


def left_derivative(model: Model, k: AlgebraElement, f: Poly) -> Poly:
    """d/ds f(g (s k)) at s = 0, by substituting the group law."""
    return _d_ds_at_zero(model, f.compose(_shifted_substitution(model, k, "left")))


def rotate_model(model: Model, R: np.ndarray) -> Model:
    """Model for omega'(u, v) = omega(R u, R v)."""
    om = np.einsum("ia,lij,jb->lab", R, model.omega, R)
    return Model(model.n, model.d, om)


def compose_rotation(model: Model, f: Poly, R: np.ndarray) -> Poly:
    """f o (w, c) -> (R w, c)."""
    N = nvars(model)
    subs = []
    for i in range(model.n):
        coeffs = np.zeros(N)
        coeffs[: model.n] = R[i]
        subs.append(Poly.linear(coeffs))
    subs += [Poly.variable(N, model.n + l) for l in range(model.d)]
    return f.compose(subs)


def _numeric(x) -> np.ndarray:
    """Float array, unless x holds exact rationals (object dtype)."""
    x = np.asarray(x)
    return x if x.dtype == object else x.astype(float)


def projection_defect(model: Model, w1, w2, m: int) -> np.ndarray:
    """Center part of pi_P(g1 g2) - pi_P(g1) pi_P(g2) for coordinate projection P.

    Equals (omega(w1, w2) - omega(P w1, P w2)) / 2.
    """
    w1 = _numeric(w1)
    w2 = _numeric(w2)
    p1 = w1.copy()
    p2 = w2.copy()
    p1[..., m:] = 0
    p2[..., m:] = 0
    return (model.form(w1, w2) - model.form(p1, p2)) / 2


def random_poly(
    rng: np.random.Generator, nv: int, max_degree: int = 4, n_terms: int = 6
) -> Poly:
    terms = {}
    for _ in range(n_terms):
        deg = int(rng.integers(0, max_degree + 1))
        e = [0] * nv
        for _ in range(deg):
            e[int(rng.integers(0, nv))] += 1
        terms[tuple(e)] = terms.get(tuple(e), 0.0) + float(rng.normal())
    return Poly(nv, terms)
