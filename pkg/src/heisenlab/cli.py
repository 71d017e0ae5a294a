"""Command-line orchestration: model catalog, check suites and reports.

A run is described by one JSON document::

    {"model": {"catalog": "real-heisenberg", "params": {"n_complex": 1}},
     "grid": {"T": 1.0, "steps": 32},
     "replicas": 4000,
     "seed": 42,
     "checks": [{"name": "heat"}, {"name": "lsi", "params": {...}}]}

Every executed check contributes one or more records to the report.  The
report is serialized with sorted keys and no timestamps, so identical
configurations produce identical bytes regardless of the worker count.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import zlib
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy

from . import __version__
from . import forms, geometry, heat_kernel, quasi_invariance as qi, ricci, stochastics
from .calculus import Poly, c_var, w_var
from .group import AlgebraElement, GroupElement, Model
from .montecarlo import RNGStream, workers
from .stochastics import TimeGrid

SEED_ENV = "HEISENLAB_SEED"
RECORD_FIELDS = ("lhs", "rhs", "stderr", "se_lhs", "se_rhs", "margin", "tolerance_rule", "pass")


class ConfigError(ValueError):
    pass


# model catalog


def _catalog_real_heisenberg(params: dict) -> Model:
    return forms.make_real_heisenberg(int(params.get("n_complex", 1)))


def _catalog_complex_heisenberg(params: dict) -> Model:
    return forms.make_complex_heisenberg(int(params.get("n", 1)))


def _catalog_weighted_q(params: dict) -> Model:
    return forms.make_weighted_q(params.get("q", [1.0, 0.5, 1 / 3]), bool(params.get("conjugated", False)))


def _catalog_block_sequence(params: dict) -> Model:
    blocks = int(params.get("blocks", 4))
    q = params.get("q", [1.0 / j**2 for j in range(1, blocks + 1)])
    return forms.make_block_sequence(forms.make_real_heisenberg(int(params.get("alpha_n_complex", 1))), q)


def _catalog_path_space(params: dict) -> Model:
    alpha = forms.make_real_heisenberg(int(params.get("alpha_n_complex", 1)))
    measure = params.get("measure", "lebesgue")
    if measure == "lebesgue":
        eta = forms.lebesgue_measure(int(params.get("nodes", 256)))
    elif measure == "delta":
        eta = ([float(params.get("at", 1.0))], [1.0])
    else:
        raise ConfigError(f"unknown measure {measure!r}")
    return forms.make_path_space(alpha, eta, int(params.get("J", 8)))


CATALOG: dict[str, tuple[str, Callable[[dict], Model]]] = {
    "real-heisenberg": ("real Heisenberg group on C^n_complex x R; params: n_complex", _catalog_real_heisenberg),
    "complex-heisenberg": ("complex Heisenberg group on C^2n x C; params: n", _catalog_complex_heisenberg),
    "weighted-q": ("weighted symplectic form with weights q; params: q, conjugated", _catalog_weighted_q),
    "block-sequence": ("block sum of scaled real Heisenberg forms; params: q or blocks, alpha_n_complex", _catalog_block_sequence),
    "path-space": ("path-space form over a measure on [0, 1]; params: J, measure (lebesgue|delta), at, nodes", _catalog_path_space),
}


def build_model(entry: dict) -> Model:
    if "catalog" in entry:
        name = entry["catalog"]
        if name not in CATALOG:
            raise ConfigError(f"unknown catalog entry: {name!r}")
        return CATALOG[name][1](entry.get("params", {}))
    if "omega" in entry:
        om = np.asarray(entry["omega"], dtype=float)
        if om.ndim != 3:
            raise ConfigError("omega must be a list of square matrices")
        return Model(om.shape[1], om.shape[0], om, w_weights=entry.get("w_weights"), label=entry.get("label", "explicit"))
    raise ConfigError("model needs a 'catalog' name or explicit 'omega' matrices")


# default test functions, built from the first two horizontal and first central coordinates


def _coords(model: Model):
    if model.n < 2:
        raise ConfigError("default test suites need n >= 2")
    nv = model.n + model.d
    return w_var(model, 0), w_var(model, 1), c_var(model, 0), Poly.constant(nv, 1.0)


def heat_suite(model: Model) -> list[Poly]:
    w1, w2, c, _ = _coords(model)
    return [w1**2 + w2**2, c, c**2, w1 * c, w1**2 * w2**2, c * w1 * w2, c**2 * w1**2, (w1 + c) ** 3]


def qi_suite(model: Model) -> list[Poly]:
    w1, w2, c, one = _coords(model)
    return [one, w1, c**2, w1 * c + w2, (one + w1) ** 2, w2**2 * c]


def lsi_suite(model: Model) -> list[Poly]:
    w1, w2, c, one = _coords(model)
    return [one + w1 + c * 0.5, one * 3.0, one + w1 * 0.3, w1, one + w1 * w2, one * 2 + c**2]


def lp_suite(model: Model) -> list[Poly]:
    w1, w2, c, one = _coords(model)
    return [one, (one + w1) ** 2, w2**2, c**2, (w1 + c) ** 2]


def default_shift(model: Model) -> AlgebraElement:
    A = np.zeros(model.n)
    A[0] = 1.0
    a = np.zeros(model.d)
    a[0] = 0.5
    return AlgebraElement(A, a)


def default_cm_paths(model: Model, T: float) -> list[qi.CMPath]:
    A1 = np.zeros((3, model.n))
    A1[1, 0], A1[2, 0], A1[2, 1] = 0.5, 0.8, -0.4
    a1 = np.zeros((3, model.d))
    a1[1, 0], a1[2, 0] = 0.2, 0.3
    return [qi.CMPath([0.0, T / 2, T], A1, a1), qi.CMPath.linear(default_shift(model), T)]


def default_functionals(model: Model, T: float) -> list[qi.PathFunctional]:
    w1, w2, c, one = _coords(model)
    return [
        qi.PathFunctional.of((T, one)),
        qi.PathFunctional.of((T, w1)),
        qi.PathFunctional.of((T / 2, c), (T, w2)),
    ]


def _polys(model: Model, params: dict, key: str, default: list[Poly]) -> list[Poly]:
    if key not in params:
        return default
    return [Poly.from_terms(model.n + model.d, terms) for terms in params[key]]


def _shift(model: Model, params: dict, key: str = "h") -> AlgebraElement:
    if key not in params:
        return default_shift(model)
    return AlgebraElement.from_dict(params[key])


# checks


@dataclass
class Context:
    model: Model
    grid: TimeGrid
    replicas: int
    rng: RNGStream


@dataclass(frozen=True)
class Check:
    anchor: str
    summary: str
    run: Callable[[Context, dict], list[tuple[str, dict]]]


def _check_forms(ctx: Context, params: dict):
    const = forms.compute_constants(ctx.model)
    out = [
        (
            "hs-norm-identity",
            {
                "lhs": const.hs_norm_sq,
                "rhs": float(np.sum(ctx.model.omega**2)),
                "tolerance_rule": "|lhs - rhs| <= 1e-12 * max(1, rhs)",
            },
        ),
        (
            "norm-constant-ordering",
            {
                "lhs": const.c_constant,
                "rhs": const.c_constant_upper,
                "tolerance_rule": "lhs <= rhs",
                "pass": bool(const.c_constant <= const.c_constant_upper * (1 + 1e-12)),
            },
        ),
    ]
    rec = out[0][1]
    rec["pass"] = bool(abs(rec["lhs"] - rec["rhs"]) <= 1e-12 * max(1.0, rec["rhs"]))
    gen = np.random.Generator(np.random.Philox(key=[ctx.rng.seed, ctx.rng.stream]))
    res = forms.gaussian_identity_checks(ctx.model, int(params.get("samples", 20000)), gen)
    for r in res["records"]:
        out.append(
            (
                r["name"],
                {
                    "lhs": r["estimate"],
                    "rhs": r["exact"],
                    "stderr": r["stderr"],
                    "tolerance_rule": "|lhs - rhs| <= 4 * SE",
                    "pass": r["pass"],
                },
            )
        )
    return out


def _check_ricci(ctx: Context, params: dict):
    step2 = ricci.ricci_step2(ctx.model)
    general = ricci.ricci_structure_constants(ctx.model)
    gap = float(np.max(np.abs(step2.matrix - general.matrix)))
    out = [
        (
            "step2-vs-structure-constants",
            {"lhs": gap, "rhs": 0.0, "tolerance_rule": "max abs entry gap <= 1e-10", "pass": gap <= 1e-10},
        )
    ]
    k = ricci.k_omega(ctx.model)
    hmin = float(np.linalg.eigvalsh(step2.horizontal_block)[0])
    out.append(
        (
            "k-omega-is-horizontal-minimum",
            {"lhs": k, "rhs": hmin, "tolerance_rule": "|lhs - rhs| <= 1e-10", "pass": abs(k - hmin) <= 1e-10},
        )
    )
    if params.get("closed_forms", True):
        for r in ricci.closed_form_checks(trials=int(params.get("trials", 5)))["records"]:
            out.append(
                (
                    "closed-form:" + r["name"],
                    {
                        "lhs": r.get("lhs", r["max_abs_error"]),
                        "rhs": r.get("rhs", 0.0),
                        "tolerance_rule": r["tolerance_rule"],
                        "pass": r["pass"],
                    },
                )
            )
    return out


def _check_distance(ctx: Context, params: dict):
    model = ctx.model
    e = GroupElement.identity(model)
    if "target" in params:
        target = GroupElement.from_dict(params["target"])
    else:
        w = np.zeros(model.n)
        w[0] = 1.0
        c = np.zeros(model.d)
        c[0] = 1.0
        target = GroupElement(w, c)
    seg = int(params.get("segments", 16))
    est = geometry.optimize_distance(model, e, target, segments=seg)
    out = [
        (
            "optimized-below-loop-construction",
            {
                "lhs": est.estimate,
                "rhs": geometry.cc_upper(model, target),
                "tolerance_rule": "lhs <= rhs * (1 + 1e-9)",
            },
        ),
        (
            "optimized-below-straight-line-bound",
            {
                "lhs": est.estimate,
                "rhs": geometry.straight_line_bound(model, e, target),
                "tolerance_rule": "lhs <= rhs * (1 + 1e-9)",
            },
        ),
    ]
    for _, rec in out:
        rec["pass"] = bool(rec["lhs"] <= rec["rhs"] * (1 + 1e-9))
    horiz = GroupElement(target.w, np.zeros(model.d))
    d_h = geometry.optimize_distance(model, e, horiz, segments=seg).estimate
    norm = float(np.linalg.norm(target.w))
    out.append(
        (
            "straight-horizontal-distance",
            {"lhs": d_h, "rhs": norm, "tolerance_rule": "|lhs - rhs| <= 1e-6", "pass": abs(d_h - norm) <= 1e-6},
        )
    )
    return out


def _check_area(ctx: Context, params: dict):
    rec = stochastics.area_variance_check(ctx.model, ctx.grid, ctx.replicas, ctx.rng)
    return [("area-second-moment", rec)]


def _check_cmk(ctx: Context, params: dict):
    rec = stochastics.cmk_check(
        float(params.get("lam", 1.0)),
        float(params.get("T", 1.0)),
        int(params.get("steps", 1000)),
        int(params.get("replicas", ctx.replicas)),
        ctx.rng,
    )
    return [("cameron-martin-kac", rec)]


def _check_heat(ctx: Context, params: dict):
    snaps = int(params.get("snapshots", 16))
    steps = ctx.grid.steps
    grid = ctx.grid if steps % snaps == 0 else TimeGrid(ctx.grid.T, snaps * max(1, -(-steps // snaps)))
    out = []
    for j, f in enumerate(_polys(ctx.model, params, "polys", heat_suite(ctx.model))):
        rec = heat_kernel.heat_equation_check(ctx.model, f, grid, snaps, ctx.replicas, ctx.rng.child(j))
        out.append((f"heat-equation[{j}]", rec))
    return out


def _check_inversion(ctx: Context, params: dict):
    sample = heat_kernel.sample_nu(ctx.model, ctx.grid, ctx.replicas, ctx.rng)
    fs = _polys(ctx.model, params, "polys", qi_suite(ctx.model))
    return [(f"inversion[{j}]", r) for j, r in enumerate(heat_kernel.inversion_check(ctx.model, sample, fs))]


def _check_moments(ctx: Context, params: dict):
    const = forms.compute_constants(ctx.model)
    limit = np.pi / (4 * ctx.model.d * ctx.grid.T * np.sqrt(const.gamma)) if const.gamma > 0 else 1.0
    lam = float(params.get("lam", 0.5 * limit))
    return [
        ("exponential-area-moment", stochastics.exp_moment_area(ctx.model, lam, ctx.grid, ctx.replicas, ctx.rng.child(0))),
        ("exponential-supermartingale", stochastics.supermartingale_check(ctx.model, ctx.grid, ctx.replicas, ctx.rng.child(1))),
    ]


def _check_qi(ctx: Context, params: dict):
    m, g, N, rng = ctx.model, ctx.grid, ctx.replicas, ctx.rng
    h = _shift(m, params)
    ks = [qi.CMPath.from_dict(k) for k in params["paths"]] if "paths" in params else default_cm_paths(m, g.T)
    hs = [h, AlgebraElement(-h.A, 2 * h.a)]
    fs = _polys(m, params, "polys", qi_suite(m))
    out = []
    out += [(f"path-density-normalization[{j}]", r) for j, r in enumerate(qi.ztilde_normalization(m, ks, g, N, rng.child(0)))]
    out += [(f"heat-density-normalization[{j}]", r) for j, r in enumerate(qi.zeta_normalization(m, hs, g, N, rng.child(1)))]
    fns = default_functionals(m, g.T)
    for i, k in enumerate(ks):
        recs = qi.path_qi_check(m, k, fns, g, N, rng.child(10 + i))
        out += [(f"path-quasi-invariance[{i},{j}]", r) for j, r in enumerate(recs)]
    out += [(f"heat-left-quasi-invariance[{j}]", r) for j, r in enumerate(qi.heat_qi_check(m, h, fs, g, N, rng.child(2)))]
    out += [(f"heat-right-quasi-invariance[{j}]", r) for j, r in enumerate(qi.right_qi_check(m, h, fs, g, N, rng.child(3)))]
    return out


def _check_ibp(ctx: Context, params: dict):
    m, g, N, rng = ctx.model, ctx.grid, ctx.replicas, ctx.rng
    h = _shift(m, params)
    k = qi.CMPath.from_dict(params["path"]) if "path" in params else default_cm_paths(m, g.T)[0]
    fs = _polys(m, params, "polys", qi_suite(m))
    out = []
    out += [(f"path-ibp[{j}]", r) for j, r in enumerate(qi.ibp_path(m, k, default_functionals(m, g.T), g, N, rng.child(0)))]
    out += [(f"heat-right-ibp[{j}]", r) for j, r in enumerate(qi.ibp_heat(m, h, fs, g, N, rng.child(1)))]
    out += [(f"heat-left-ibp[{j}]", r) for j, r in enumerate(qi.ibp_heat_left(m, h, fs, g, N, rng.child(2)))]
    w1, w2, c, one = _coords(m)
    out.append(("dirichlet-adjoint", qi.dirichlet_adjoint_check(m, h, w1 + c, w2 * c + one, g, N, rng.child(3))))
    return out


def _check_lsi(ctx: Context, params: dict):
    fs = _polys(ctx.model, params, "polys", lsi_suite(ctx.model))
    recs = qi.lsi_check(ctx.model, fs, ctx.grid, ctx.replicas, ctx.rng)
    return [(f"log-sobolev[{j}]", r) for j, r in enumerate(recs)]


def _check_lp(ctx: Context, params: dict):
    m = ctx.model
    if "h" in params:
        h = AlgebraElement.from_dict(params["h"])
    else:
        A = np.zeros(m.n)
        A[0] = 1.0
        h = AlgebraElement(A, np.zeros(m.d))
    fs = _polys(m, params, "polys", lp_suite(m))
    out = []
    for i, p in enumerate(params.get("p", [1.5, 2.0])):
        recs = qi.lp_bound_dual_check(m, h, float(p), fs, ctx.grid, ctx.replicas, ctx.rng.child(i))
        out += [(f"lp-density-bound[p={p:g},{j}]", r) for j, r in enumerate(recs)]
    return out


CHECKS: dict[str, Check] = {
    "forms": Check("Gaussian trace identities for the skew form", "norm constants and Monte Carlo trace identities", _check_forms),
    "ricci": Check(
        "Ricci tensor of the left-invariant metric; step-2 closed form and structure-constant formula",
        "two Ricci routes agree, k(omega) and closed forms for the example families",
        _check_ricci,
    ),
    "distance": Check(
        "sub-Riemannian distance bounds",
        "optimized horizontal length against the loop construction and straight-line bounds",
        _check_distance,
    ),
    "area": Check("second moment of the area integral", "E|M_T|^2 = (T^2/2) |omega|^2 and rule gap 0", _check_area),
    "cmk": Check("Cameron-Martin-Kac formula", "E exp(lam^2/2 int b^2) = cos(lam T)^(-1/2)", _check_cmk),
    "heat": Check("weak heat equation for the heat kernel measure", "nu_T(f) = f(e) + 1/2 int nu_t(L f) dt", _check_heat),
    "inversion": Check("inversion invariance of the heat kernel measure", "E f(g) = E f(g^-1)", _check_inversion),
    "moments": Check(
        "exponential integrability of the area process",
        "exponential moment bound and the exponential supermartingale",
        _check_moments,
    ),
    "qi": Check(
        "Cameron-Martin quasi-invariance on path space and at fixed time",
        "density normalization and dual estimators of the shifted expectations",
        _check_qi,
    ),
    "ibp": Check(
        "integration by parts on path space and for the heat kernel measure",
        "derivative expectations against divergence-weighted expectations",
        _check_ibp,
    ),
    "lsi": Check("logarithmic Sobolev inequality for the heat kernel measure", "entropy <= coefficient * energy", _check_lsi),
    "lp": Check("L^p bound on the shifted heat kernel density, dual form", "E f(h g) <= C (E f^q)^(1/q)", _check_lp),
}

GROUPS = {
    "heat": ["heat", "inversion", "moments"],
    "qi": ["qi"],
    "ibp": ["ibp"],
    "lsi": ["lsi", "lp"],
    "forms": ["forms"],
    "all": ["forms", "ricci", "distance", "area", "heat", "inversion", "moments", "qi", "ibp", "lsi", "lp"],
}

DEFAULT_CONFIG = {
    "model": {"catalog": "real-heisenberg", "params": {"n_complex": 1}},
    "grid": {"T": 1.0, "steps": 32},
    "replicas": 4000,
    "seed": 42,
    "checks": [{"name": name} for name in GROUPS["all"]],
}


# reports


def _clean(value):
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    return value


@dataclass
class Report:
    records: list[dict] = field(default_factory=list)
    environment: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r["pass"] for r in self.records)

    def to_dict(self) -> dict:
        return {"environment": self.environment, "pass": self.passed, "records": self.records}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        cols = ["name", "anchor", "lhs", "rhs", "stderr", "tolerance_rule", "pass"]
        writer = csv.DictWriter(buf, fieldnames=cols, extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        for r in self.records:
            writer.writerow({k: r.get(k, "") for k in cols})
        return buf.getvalue()


def _normalize(check: str, sub: str, anchor: str, rec: dict) -> dict:
    out = {"name": f"{check}/{sub}", "anchor": anchor}
    for key in RECORD_FIELDS:
        if key in rec:
            out[key] = _clean(rec[key])
    out.setdefault("stderr", 0.0)
    out["pass"] = bool(rec.get("pass", False))
    return out


def _validate(config: dict) -> dict:
    if not isinstance(config, dict):
        raise ConfigError("config must be a JSON object")
    cfg = dict(config)
    cfg.setdefault("model", DEFAULT_CONFIG["model"])
    cfg.setdefault("grid", DEFAULT_CONFIG["grid"])
    cfg.setdefault("replicas", DEFAULT_CONFIG["replicas"])
    cfg.setdefault("seed", DEFAULT_CONFIG["seed"])
    cfg.setdefault("checks", [])
    if int(cfg["replicas"]) < 2:
        raise ConfigError("replicas must be at least 2")
    seed = int(cfg["seed"])
    if not 0 <= seed < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    for item in cfg["checks"]:
        name = item.get("name") if isinstance(item, dict) else None
        if name not in CHECKS:
            raise ConfigError(f"unknown check: {name!r}")
    return cfg


def run(config: dict) -> Report:
    """Execute the configured checks and assemble a report."""
    cfg = _validate(config)
    model = build_model(cfg["model"])
    grid = TimeGrid(float(cfg["grid"].get("T", 1.0)), int(cfg["grid"].get("steps", 32)))
    seed = int(cfg["seed"])
    report = Report(
        environment={
            "seed": seed,
            "grid": {"T": grid.T, "steps": grid.steps},
            "replicas": int(cfg["replicas"]),
            "model": {"label": model.label, "n": model.n, "d": model.d},
            "versions": {"heisenlab": __version__, "numpy": np.__version__, "scipy": scipy.__version__},
        }
    )
    for index, item in enumerate(cfg["checks"]):
        name = item["name"]
        check = CHECKS[name]
        stream = zlib.crc32(f"{index}:{name}".encode())
        ctx = Context(model, grid, int(cfg["replicas"]), RNGStream(seed, stream))
        for sub, rec in check.run(ctx, item.get("params", {})):
            report.records.append(_normalize(name, sub, check.anchor, rec))
    return report


def list_catalog() -> str:
    return "\n".join(f"{name}: {desc}" for name, (desc, _) in CATALOG.items()) + "\n"


def describe_check(name: str) -> str:
    if name not in CHECKS:
        raise ConfigError(f"unknown check: {name!r}")
    c = CHECKS[name]
    return f"{name}\n  anchor: {c.anchor}\n  checks: {c.summary}\n"


# command line


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON experiment configuration")
    common.add_argument("--seed", type=int, help="unsigned 64-bit seed (overrides config)")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--workers", type=int, default=1, help="threads for replica chunks")

    parser = argparse.ArgumentParser(prog="heisenlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", parents=[common], help="simulate the group Brownian motion")
    sim.add_argument("--model", default="real-heisenberg")
    sim.add_argument("--T", type=float, default=1.0)
    sim.add_argument("--steps", type=int, default=100)
    sim.add_argument("--replicas", type=int, default=10000)
    sim.add_argument("--samples-csv", help="also write endpoint samples as CSV")

    sub.add_parser("ricci", parents=[common], help="Ricci curvature checks for the configured model")
    dist = sub.add_parser("distance", parents=[common], help="distance estimates for a target element")
    dist.add_argument("--target", help='JSON group element, e.g. {"w": [1, 0], "c": [1]}')

    ver = sub.add_parser("verify", parents=[common], help="run a check group")
    ver.add_argument("group", choices=sorted(GROUPS))

    sub.add_parser("catalog", help="list catalog models")
    desc = sub.add_parser("describe", help="describe a check")
    desc.add_argument("check")
    return parser


def _load_config(args) -> dict:
    if args.config:
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
    else:
        cfg = json.loads(json.dumps(DEFAULT_CONFIG))
    if os.environ.get(SEED_ENV):
        cfg["seed"] = int(os.environ[SEED_ENV])
    if args.seed is not None:
        cfg["seed"] = args.seed
    return cfg


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _simulate(args, cfg: dict) -> int:
    model = build_model({"catalog": args.model} if args.model else cfg["model"])
    grid = TimeGrid(args.T, args.steps)
    rng = RNGStream(int(cfg["seed"]), 0)
    rec = stochastics.area_variance_check(model, grid, args.replicas, rng)
    summary = {
        "estimate": rec["lhs"],
        "stderr": rec["se_lhs"],
        "target": rec["rhs"],
        "pass": rec["pass"],
        "seed": int(cfg["seed"]),
        "model": model.label,
    }
    if args.samples_csv:
        sample = heat_kernel.sample_nu(model, grid, args.replicas, rng)
        header = [f"w{i}" for i in range(model.n)] + [f"c{i}" for i in range(model.d)]
        np.savetxt(args.samples_csv, sample.points, delimiter=",", header=",".join(header), comments="")
    _emit(json.dumps(summary, sort_keys=True, indent=2) + "\n", args.out)
    return 0 if summary["pass"] else 1


def main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "catalog":
        sys.stdout.write(list_catalog())
        return 0
    try:
        if args.command == "describe":
            sys.stdout.write(describe_check(args.check))
            return 0
        cfg = _load_config(args)
        with workers(max(1, args.workers)):
            if args.command == "simulate":
                return _simulate(args, cfg)
            if args.command == "ricci":
                cfg["checks"] = [{"name": "ricci"}]
            elif args.command == "distance":
                params = {"target": json.loads(args.target)} if args.target else {}
                cfg["checks"] = [{"name": "distance", "params": params}]
            elif not args.config or args.group != "all":
                cfg["checks"] = [{"name": n} for n in GROUPS[args.group]]
            report = run(cfg)
    except (ConfigError, ValueError, KeyError, TypeError) as exc:
        sys.stderr.write(f"heisenlab: error: {exc}\n")
        return 2
    _emit(report.to_csv() if args.format == "csv" else report.to_json(), args.out)
    return 0 if report.passed else 1
