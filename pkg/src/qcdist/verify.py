"""Seeded numerical checks of the inequalities behind the bounds.

Sampling is split into fixed-size chunks, each with its own
``SeedSequence(seed, spawn_key=(salt, chunk))`` stream, so a report depends
only on the :class:`SampleConfig` and never on how many worker threads
evaluated the chunks.  Chunk results are merged by min/max with ties broken
by the global sample index.

A :class:`CheckReport` carries a signed ``worst_margin`` (bound minus
quantity, minimised over everything the check looked at) and the witness that
produced it; :func:`recheck` re-evaluates the claim at that witness.
"""

from __future__ import annotations

import math
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize_scalar

from . import bounds as bd
from . import geometry as geo
from . import maps as mp

CHUNK = 16384
#: Pairs closer than this (in the metric used) are left out of Holder quotients.
MIN_SEPARATION = 1e-9

TOL_IDENTITY = 1e-12
TOL_INEQUALITY = 1e-9
TOL_ATTAIN = 1e-3

REGIONS = ("unit_ball", "ball", "ball_complement", "sphere", "real_line", "positive_reals")


@dataclass(frozen=True)
class SampleConfig:
    seed: int = 0
    count: int = 100_000
    region: str = "sphere"
    refinement_steps: int = 40
    radius: float = 1.0
    workers: int = 1

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("count must be positive")
        if self.region not in REGIONS:
            raise ValueError(f"unknown region {self.region!r}; choose from {REGIONS}")
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        if self.refinement_steps < 0:
            raise ValueError("refinement_steps must be >= 0")

    def with_(self, **kw) -> "SampleConfig":
        d = dict(self.__dict__)
        d.update(kw)
        return SampleConfig(**d)


@dataclass
class CheckReport:
    name: str
    passed: bool
    worst_margin: float
    witness: dict
    samples_used: int
    tolerance: float

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "pass": self.passed,
            "worst_margin": self.worst_margin,
            "witness": self.witness,
            "samples_used": self.samples_used,
            "tolerance": self.tolerance,
        }


@dataclass
class HolderReport:
    map_spec: str
    exponent: float
    metric: str
    empirical_constant: float
    witness_pair: tuple
    bound_value: float
    bound_formula: Optional[str]
    slack: float
    samples_used: int
    holder_lem_c: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "map": self.map_spec,
            "exponent": self.exponent,
            "metric": self.metric,
            "empirical_constant": self.empirical_constant,
            "witness_pair": list(self.witness_pair),
            "bound_value": self.bound_value,
            "bound_formula": self.bound_formula,
            "slack": self.slack,
            "samples_used": self.samples_used,
            "holder_lem_c": self.holder_lem_c,
        }


# ---------------------------------------------------------------------------
# sampling


def _salt(*parts) -> tuple[int, ...]:
    out = []
    for p in parts:
        if isinstance(p, str):
            out.append(zlib.crc32(p.encode()))
        else:
            out.append(int(p) & 0xFFFFFFFF)
    return tuple(out)


def _run_chunks(job: Callable, count: int, cfg: SampleConfig, salt: tuple) -> list:
    """Run ``job(rng, start, size)`` over fixed chunks of ``count`` samples."""
    tasks = [(i, s, min(CHUNK, count - s)) for i, s in enumerate(range(0, count, CHUNK))]

    def run(task):
        i, start, size = task
        ss = np.random.SeedSequence(cfg.seed, spawn_key=salt + (i,))
        return job(np.random.default_rng(ss), start, size)

    if cfg.workers > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(cfg.workers) as ex:
            return list(ex.map(run, tasks))
    return [run(t) for t in tasks]


def sample_region(rng, size: int, dim: int, region: str, radius: float = 1.0, inf_prob: float = 0.0):
    """Draw ``size`` points of R^dim (rows of inf for oo) from ``region``."""
    if region in ("unit_ball", "ball"):
        r = 1.0 if region == "unit_ball" else radius
        G = rng.standard_normal((size, dim))
        G /= np.linalg.norm(G, axis=1)[:, None]
        return r * G * rng.random(size)[:, None] ** (1.0 / dim)
    if region == "ball_complement":
        inner = sample_region(rng, size, dim, "ball", 1.0 / radius)
        return geo.unit_inversion_array(inner)
    if region in ("sphere", "real_line"):
        d = 1 if region == "real_line" else dim
        U = rng.standard_normal((size, d + 1))
        U /= np.linalg.norm(U, axis=1)[:, None]
        X = U[:, :d] / (1.0 - U[:, d])[:, None]
        if inf_prob > 0:
            X[rng.random(size) < inf_prob] = np.inf
        return X
    if region == "positive_reals":
        return 10.0 ** rng.uniform(-6.0, 6.0, size=(size, 1))
    raise ValueError(f"unknown region {region!r}")


def in_region(X, region: str, radius: float = 1.0) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    inf = geo.is_inf_row(X)
    r = np.linalg.norm(np.where(inf[..., None], 0.0, X), axis=-1)
    if region == "unit_ball":
        return ~inf & (r < 1.0)
    if region == "ball":
        return ~inf & (r < radius)
    if region == "ball_complement":
        return inf | (r > radius)
    if region == "positive_reals":
        return ~inf & (X[..., 0] > 0)
    return np.ones(X.shape[:-1], dtype=bool)


def _pt(row) -> list | str:
    row = np.asarray(row, dtype=float)
    if np.isinf(row).any():
        return "inf"
    return [float(v) for v in row]


def _unpt(p, dim: int) -> np.ndarray:
    if isinstance(p, str):
        return np.full(dim, np.inf)
    return np.asarray(p, dtype=float)


# ---------------------------------------------------------------------------
# pattern search


def pattern_search(fun: Callable, z0: np.ndarray, scale: np.ndarray, steps: int, h0: float = 0.25):
    """Maximise ``fun`` (vectorised over rows) by compass search from ``z0``.

    Each iteration tries +-h*scale along every coordinate, moves to the best
    improving neighbour, and halves h when nothing improves.  Coordinates with
    ``scale == 0`` stay fixed.
    """
    z = np.array(z0, dtype=float)
    best = float(fun(z[None, :])[0])
    movable = np.flatnonzero(scale > 0)
    if movable.size == 0:
        return z, best
    h = h0
    for _ in range(steps):
        k = movable.size
        Z = np.repeat(z[None, :], 2 * k, axis=0)
        Z[np.arange(k), movable] += h * scale[movable]
        Z[k + np.arange(k), movable] -= h * scale[movable]
        vals = np.asarray(fun(Z), dtype=float)
        vals = np.where(np.isnan(vals), -np.inf, vals)
        j = int(np.argmax(vals))
        if vals[j] > best:
            z, best = Z[j], float(vals[j])
        else:
            h *= 0.5
    return z, best


# ---------------------------------------------------------------------------
# empirical Holder constants


def holder_quotients(f: mp.QCTestMap, metric: str, exponent: float, X, Y) -> np.ndarray:
    """d(f(x), f(y)) / d(x, y)^exponent; -inf for pairs closer than MIN_SEPARATION."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if metric == "spherical":
        d = geo.q_array(X, Y)
        df = geo.q_array(f(X), f(Y))
    elif metric == "euclidean":
        bad = geo.is_inf_row(X) | geo.is_inf_row(Y)
        Xs = np.where(bad[:, None], 0.0, X)
        Ys = np.where(bad[:, None], 0.0, Y)
        d = np.where(bad, 0.0, np.linalg.norm(Xs - Ys, axis=-1))
        df = np.linalg.norm(f(Xs) - f(Ys), axis=-1)
    else:
        raise ValueError(f"unknown metric {metric!r}")
    with np.errstate(divide="ignore", invalid="ignore"):
        out = df / d**exponent
    return np.where((d < MIN_SEPARATION) | np.isnan(out), -np.inf, out)


def applicable_bound(f: mp.QCTestMap, metric: str, exponent: float) -> tuple[float, Optional[str]]:
    """The smallest bound from :mod:`qcdist.bounds` that covers ``f``, if any."""
    flags = f.normalizations
    if metric == "spherical" and isinstance(f, mp.PiecewiseLinearQS):
        qb = bd.qs_spherical_bound(f.qs_constant)
        if exponent <= qb.exponent * (1 + 1e-12):
            return qb.constant.value, qb.constant.formula_id
        return math.nan, None
    if f.dim < 2 or not math.isfinite(f.qc_constant):
        return math.nan, None
    p = bd.DistortionParams(float(f.qc_constant), f.dim)
    cands = []
    if metric == "spherical":
        # q <= 1, so a bound for the exponent alpha also covers smaller exponents
        if exponent > p.alpha * (1 + 1e-12):
            return math.nan, None
        if {mp.FIXES_0, mp.FIXES_1, mp.FIXES_INF} <= flags:
            b = bd.m4_sharp(p)
            cands.append((b.value, b.formula_id))
        if {mp.FIXES_0, mp.FIXES_INF, mp.BALL_TO_BALL} <= flags:
            b = bd.m3_global(p)
            cands.append((b.value, b.formula_id))
    elif metric == "euclidean":
        if abs(exponent - p.alpha) <= 1e-12 and {mp.FIXES_0, mp.BALL_TO_BALL} <= flags:
            b = bd.m1_default(p)
            cands.append((b.value, b.formula_id))
    if not cands:
        return math.nan, None
    return min(cands)


def _anchor_pairs(dim: int, region: str, radius: float) -> tuple[np.ndarray, np.ndarray]:
    e1 = np.zeros(dim)
    e1[0] = 1.0
    zero = np.zeros(dim)
    inf = np.full(dim, np.inf)
    if region in ("sphere", "real_line"):
        pairs = [(zero, inf), (e1, -e1), (zero, e1), (e1, inf)]
        # small pairs straddling 0 (their mirrors straddle oo)
        pairs += [(s * e1, -s * e1) for s in (1e-3, 1e-6)] + [(s * e1, zero) for s in (1e-3, 1e-6)]
    elif region in ("unit_ball", "ball"):
        r = 0.5 * (1.0 if region == "unit_ball" else radius)
        pairs = [(r * e1, zero), (r * e1, -r * e1)]
    else:
        pairs = []
    if not pairs:
        return np.empty((0, dim)), np.empty((0, dim))
    return np.array([p[0] for p in pairs]), np.array([p[1] for p in pairs])


def _with_mirrors(X):
    """Append the images of the rows under x -> x/|x|^2 (regions on the whole sphere are invariant)."""
    return np.concatenate([X, geo.unit_inversion_array(X)])


def _to_sphere(X) -> np.ndarray:
    """Inverse stereographic projection onto the unit sphere of R^(d+1); oo is the north pole."""
    Xf, inf = geo._split(X)
    n2 = np.sum(Xf * Xf, axis=-1)
    U = np.concatenate([2.0 * Xf, (n2 - 1.0)[..., None]], axis=-1) / (1.0 + n2)[..., None]
    north = np.zeros(U.shape[-1])
    north[-1] = 1.0
    return np.where(inf[..., None], north, U)


def _from_sphere(U) -> np.ndarray:
    """Stereographic projection of the directions ``U`` (rows need not be unit vectors)."""
    U = np.asarray(U, dtype=float)
    U = U / np.linalg.norm(U, axis=-1)[..., None]
    top, h = U[..., :-1], U[..., -1]
    t2 = np.sum(top * top, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        # upper hemisphere written as the inversion of the lower one, avoiding 1 - h
        X = np.where((h > 0)[..., None], top * (1.0 + h)[..., None] / t2[..., None], top / (1.0 + h)[..., None])
    return np.where(((h > 0) & (t2 == 0))[..., None], np.inf, X)


def empirical_holder(
    f: mp.QCTestMap,
    metric: str,
    exponent: float,
    cfg: SampleConfig,
    top_k: int = 8,
) -> HolderReport:
    """Largest Holder quotient found by sampling pairs from ``cfg.region`` and refining."""
    if not 0 < exponent <= 1:
        raise ValueError(f"exponent must lie in (0, 1], got {exponent}")
    dim = f.dim
    region = cfg.region
    if region == "real_line" and dim != 1:
        raise ValueError("region 'real_line' needs a map of the real line")
    if region == "positive_reals":
        raise ValueError("Holder search needs a region of the map's domain, not 'positive_reals'")
    spherical_region = region in ("sphere", "real_line")
    per_pair = 2 if spherical_region else 1
    inf_prob = 1.0 / cfg.count if spherical_region else 0.0
    # samples depend on the domain only, so maps on the same domain are probed at the same pairs
    salt = _salt("holder", region, dim)

    def job(rng, start, size):
        X = sample_region(rng, size, dim, region, cfg.radius, inf_prob)
        Y = sample_region(rng, size, dim, region, cfg.radius, inf_prob)
        if spherical_region:
            X, Y = _with_mirrors(X), _with_mirrors(Y)
        Q = holder_quotients(f, metric, exponent, X, Y)
        k = min(top_k, size)
        idx = np.argsort(-Q, kind="stable")[:k]
        c = None
        if metric == "spherical":
            fin = ~geo.is_inf_row(X)
            Xf, FX = X[fin], f(X[fin])
            fin2 = ~geo.is_inf_row(FX)
            num = (1.0 + np.sum(Xf[fin2] ** 2, axis=1)) ** exponent
            den = 1.0 + np.sum(FX[fin2] ** 2, axis=1)
            c = float(np.max(num / den)) if num.size else None
        return Q[idx], per_pair * start + idx, X[idx], Y[idx], c

    results = _run_chunks(job, cfg.count, cfg, salt)
    AX, AY = _anchor_pairs(dim, region, cfg.radius)
    if spherical_region:
        AX, AY = _with_mirrors(AX), _with_mirrors(AY)
    AQ = holder_quotients(f, metric, exponent, AX, AY) if len(AX) else np.empty(0)
    vals = np.concatenate([r[0] for r in results] + [AQ])
    sampled = per_pair * cfg.count
    idxs = np.concatenate([r[1] for r in results] + [sampled + np.arange(len(AX))])
    Xs = np.concatenate([r[2] for r in results] + [AX])
    Ys = np.concatenate([r[3] for r in results] + [AY])
    order = np.lexsort((idxs, -vals))[:top_k]

    def objective(inf_mask):
        def fun(Z):
            Z = np.where(inf_mask, np.inf, Z)
            X, Y = Z[:, :dim], Z[:, dim:]
            ok = in_region(X, region, cfg.radius) & in_region(Y, region, cfg.radius)
            return np.where(ok, holder_quotients(f, metric, exponent, X, Y), -np.inf)

        return fun

    def sphere_objective(U):
        d1 = U.shape[1] // 2
        return holder_quotients(f, metric, exponent, _from_sphere(U[:, :d1]), _from_sphere(U[:, d1:]))

    best_val, best_pair = -np.inf, None
    for j in order:
        x0, y0 = Xs[j], Ys[j]
        if not cfg.refinement_steps:
            z, v = (x0, y0), float(vals[j])
        elif spherical_region:
            # compass search on the unit sphere, where x -> x/|x|^2 is a reflection
            u0 = np.concatenate([_to_sphere(x0[None, :])[0], _to_sphere(y0[None, :])[0]])
            chord = 2.0 * float(geo.q_array(x0, y0))
            u, v = pattern_search(sphere_objective, u0, np.full(u0.size, chord), cfg.refinement_steps)
            z = (_from_sphere(u[None, : dim + 1])[0], _from_sphere(u[None, dim + 1 :])[0])
        else:
            z0 = np.concatenate([x0, y0])
            inf_mask = np.isinf(z0)
            scale = np.abs(z0)
            for s, e in ((0, dim), (dim, 2 * dim)):
                blk = z0[s:e]
                if np.isinf(blk).any():
                    scale[s:e] = 0.0
                else:
                    scale[s:e] = max(float(np.linalg.norm(blk)), 1e-3)
            zz, v = pattern_search(objective(inf_mask), np.where(inf_mask, 0.0, z0), scale, cfg.refinement_steps)
            zz = np.where(inf_mask, np.inf, zz)
            z = (zz[:dim], zz[dim:])
        if v > best_val:
            best_val, best_pair = v, z

    bound, formula = applicable_bound(f, metric, exponent)
    cs = [r[4] for r in results if r[4] is not None]
    return HolderReport(
        map_spec=f.spec(),
        exponent=exponent,
        metric=metric,
        empirical_constant=float(best_val),
        witness_pair=(_pt(best_pair[0]), _pt(best_pair[1])),
        bound_value=bound,
        bound_formula=formula,
        slack=bound - float(best_val),
        samples_used=sampled + len(AX),
        holder_lem_c=max(cs) if cs else None,
    )


# ---------------------------------------------------------------------------
# check registry


@dataclass
class _Check:
    run: Callable[[SampleConfig], CheckReport]
    margin_at: Callable[[dict], float]
    tolerance: float
    claim: str = ""


REGISTRY: dict[str, _Check] = {}


def _register(name: str, tolerance: float, margin_at: Callable, claim: str = ""):
    def deco(fn):
        REGISTRY[name] = _Check(fn, margin_at, tolerance, claim)
        return fn

    return deco


def check_names() -> list[str]:
    return list(REGISTRY)


def run_check(name: str, cfg: Optional[SampleConfig] = None) -> CheckReport:
    if name not in REGISTRY:
        raise ValueError(f"unknown check {name!r}; known: {', '.join(REGISTRY)}")
    return REGISTRY[name].run(cfg or SampleConfig())


def run_all(cfg: Optional[SampleConfig] = None, names=None) -> list[CheckReport]:
    return [run_check(n, cfg) for n in (names or check_names())]


def recheck(report: CheckReport) -> float:
    """Re-evaluate the claim of ``report`` at its witness."""
    return float(REGISTRY[report.name].margin_at(report.witness))


def _report(name: str, margin: float, witness: dict, samples: int) -> CheckReport:
    tol = REGISTRY[name].tolerance
    margin = float(margin)
    return CheckReport(name, bool(margin >= -tol), margin, witness, int(samples), tol)


def _sampled_min(count: int, cfg: SampleConfig, salt: tuple, margins: Callable):
    """Min over chunks of ``margins(rng, size) -> (array, witness_of_index)``."""

    def job(rng, start, size):
        m, wit = margins(rng, size)
        m = np.where(np.isnan(m), -np.inf, m)
        i = int(np.argmin(m))
        return float(m[i]), start + i, wit(i)

    res = _run_chunks(job, count, cfg, salt)
    return min(res, key=lambda r: (r[0], r[1]))


def _merge(*cands):
    """Pick the (margin, witness) pair with the smallest margin; first wins ties."""
    return min(cands, key=lambda c: c[0])


# -- metric axioms ----------------------------------------------------------

AXIOM_DIMS = (2, 3, 5)


def _axiom_margins(claim, X, Y, Z):
    if claim == "triangle":
        return geo.q_array(X, Y) + geo.q_array(Y, Z) - geo.q_array(X, Z)
    if claim == "symmetry":
        return -np.abs(geo.q_array(X, Y) - geo.q_array(Y, X))
    if claim == "identity":
        return -np.abs(geo.q_array(X, X))
    if claim == "range":
        return 1.0 - geo.q_array(X, Y)
    raise ValueError(claim)


def _axioms_at(w):
    n = w["n"]
    P = [_unpt(w[k], n)[None, :] for k in ("x", "y", "z")]
    return float(_axiom_margins(w["claim"], *P)[0])


@_register("metric-axioms", TOL_IDENTITY, _axioms_at, "q is a metric bounded by 1")
def _check_metric_axioms(cfg):
    best = (math.inf, {})
    for n in AXIOM_DIMS:

        def margins(rng, size, n=n):
            X, Y, Z = (sample_region(rng, size, n, "sphere", inf_prob=0.01) for _ in range(3))
            per = [_axiom_margins(c, X, Y, Z) for c in ("triangle", "symmetry", "identity", "range")]
            M = np.stack(per)
            flat = M.min(axis=0)
            claims = np.array(["triangle", "symmetry", "identity", "range"])[M.argmin(axis=0)]

            def wit(i):
                return {"claim": str(claims[i]), "n": n, "x": _pt(X[i]), "y": _pt(Y[i]), "z": _pt(Z[i])}

            return flat, wit

        m, _, w = _sampled_min(cfg.count, cfg, _salt("metric-axioms", n), margins)
        best = _merge(best, (m, w))
    return _report("metric-axioms", best[0], best[1], cfg.count * len(AXIOM_DIMS))


# -- lift isometry ----------------------------------------------------------


def _lift_margins(claim, X, Y):
    if claim == "isometry":
        d = np.linalg.norm(geo.lift_array(X) - geo.lift_array(Y), axis=-1)
        return -np.abs(d - geo.q_array(X, Y))
    L = geo.lift_array(X)
    c = np.zeros(L.shape[-1])
    c[-1] = 0.5
    return -np.abs(np.linalg.norm(L - c, axis=-1) - 0.5)


def _lift_at(w):
    n = w["n"]
    return float(_lift_margins(w["claim"], _unpt(w["x"], n)[None, :], _unpt(w["y"], n)[None, :])[0])


@_register("lift-isometry", TOL_IDENTITY, _lift_at, "|lift(x)-lift(y)| = q(x,y)")
def _check_lift(cfg):
    best = (math.inf, {})
    for n in AXIOM_DIMS:

        def margins(rng, size, n=n):
            X, Y = (sample_region(rng, size, n, "sphere", inf_prob=0.01) for _ in range(2))
            M = np.stack([_lift_margins("isometry", X, Y), _lift_margins("on-sphere", X, Y)])
            claims = np.array(["isometry", "on-sphere"])[M.argmin(axis=0)]
            return M.min(axis=0), lambda i: {"claim": str(claims[i]), "n": n, "x": _pt(X[i]), "y": _pt(Y[i])}

        m, _, w = _sampled_min(cfg.count, cfg, _salt("lift-isometry", n), margins)
        best = _merge(best, (m, w))
    return _report("lift-isometry", best[0], best[1], cfg.count * len(AXIOM_DIMS))


# -- inequality (1 + t^g)^g / (1 + t) <= 1 + 0.13 (1 - g) -------------------


def ineq_margin(gamma, t):
    gamma = np.asarray(gamma, dtype=float)
    t = np.asarray(t, dtype=float)
    return 1.0 + 0.13 * (1.0 - gamma) - (1.0 + t**gamma) ** gamma / (1.0 + t)


def _ineq_at(w):
    return float(ineq_margin(w["gamma"], w["t"]))


@_register("ineq-1.5c", TOL_INEQUALITY, _ineq_at, "(1+t^g)^g/(1+t) <= 1+0.13(1-g)")
def _check_ineq(cfg):
    gammas = np.arange(1, 101) / 100.0
    ts = np.logspace(-6.0, 6.0, cfg.count)
    logt = np.log10(ts)
    best = (math.inf, {})
    interior = (math.inf, {})
    for g in gammas:
        m = ineq_margin(g, ts)
        i = int(np.argmin(m))
        cand = (float(m[i]), {"gamma": float(g), "t": float(ts[i])})
        if g < 1 and cfg.refinement_steps:
            # refine over log10 t with gamma held fixed
            def fun(Z, g=g):
                return -ineq_margin(g, 10.0 ** Z[:, 0])

            h = logt[1] - logt[0] if logt.size > 1 else 0.1
            z, _ = pattern_search(fun, np.array([logt[i]]), np.array([4.0 * h]), cfg.refinement_steps, h0=1.0)
            w = {"gamma": float(g), "t": float(10.0 ** z[0])}
            cand = _merge(cand, (_ineq_at(w), w))
        best = _merge(best, cand)
        if g < 1:
            interior = _merge(interior, cand)
    witness = dict(best[1])
    witness["interior"] = {**interior[1], "margin": interior[0]}
    witness["equality_margin"] = float(np.max(np.abs(ineq_margin(1.0, ts))))
    return _report("ineq-1.5c", best[0], witness, len(gammas) * (cfg.count + 2 * cfg.refinement_steps))


# -- infimum of log(1+s) + s log s / (1+s) ----------------------------------

INFIMUM_CLAIM = -0.1144
RHS_SUP = -0.13 / 1.13


def infimum_objective(s):
    s = np.asarray(s, dtype=float)
    return np.log1p(s) + s * np.log(s) / (1.0 + s)


def minimize_infimum_objective(lo: float = 1e-12, hi: float = 1e6, grid: int = 20001) -> tuple[float, float]:
    """(argmin, min) by a log-grid bracket followed by golden-section search."""
    s = np.logspace(math.log10(lo), math.log10(hi), grid)
    v = infimum_objective(s)
    i = int(np.argmin(v))
    if i == 0 or i == grid - 1:
        raise RuntimeError("minimum not bracketed in the interior of the grid")
    res = minimize_scalar(
        lambda x: float(infimum_objective(x)), bracket=(s[i - 1], s[i], s[i + 1]), method="golden", tol=1e-12
    )
    return float(res.x), float(res.fun)


def _infimum_at(w):
    if w["claim"] == "infimum":
        return float(infimum_objective(w["s"])) - INFIMUM_CLAIM
    return -0.115 - RHS_SUP


@_register("infimum-claim", 0.0, _infimum_at, "inf log(1+s)+s log s/(1+s) > -0.1144 > -0.115 > -0.13/1.13")
def _check_infimum(cfg):
    s_star, v = minimize_infimum_objective()
    w1 = {"claim": "infimum", "s": s_star, "value": v, "value_6dp": round(v, 6)}
    w2 = {"claim": "rhs", "value": RHS_SUP}
    m, w = _merge((_infimum_at(w1), w1), (_infimum_at(w2), w2))
    return _report("infimum-claim", m, w, 20001)


# -- the choice of R ---------------------------------------------------------


def r_chain_links(beta) -> np.ndarray:
    """The four members of the chain R^(b-a) <= ... <= exp(0.73 sqrt(b-1)), shape (4, N)."""
    beta = np.asarray(beta, dtype=float)
    x = (1.0 - beta) * bd.LN32
    t = np.exp(x)
    omt = -np.expm1(x)
    A = (1.0 + t) / omt
    R = np.sqrt(A)
    return np.stack(
        [
            R ** (beta - 1.0 / beta),
            A ** (beta - 1.0),
            (2.0 / omt) ** (beta - 1.0),
            np.exp(0.73 * np.sqrt(beta - 1.0)),
        ]
    )


def _r_chain_at(w):
    L = r_chain_links([w["beta"]])[:, 0]
    k = w["link"]
    return float(L[k + 1] - L[k])


def _beta_grid(count: int) -> np.ndarray:
    return 1.0 + np.arange(1, count + 1) / count


@_register("R-chain", TOL_INEQUALITY, _r_chain_at, "R^(b-a) <= ... <= exp(0.73 sqrt(b-1))")
def _check_r_chain(cfg):
    betas = _beta_grid(min(cfg.count, 1000))
    L = r_chain_links(betas)
    M = L[1:] - L[:-1]
    k, i = np.unravel_index(int(np.argmin(M)), M.shape)
    w = {"beta": float(betas[i]), "link": int(k)}
    return _report("R-chain", float(M[k, i]), w, betas.size)


def r_identity_residual(beta: float) -> float:
    R = bd.theorem_R(bd.DistortionParams(float(beta), 2))
    return (R * R - 1.0) / (R * R + 1.0) - 32.0 ** (1.0 - beta)


@_register("R-identity", TOL_IDENTITY, lambda w: -abs(r_identity_residual(w["beta"])), "(R^2-1)/(R^2+1) = 32^(1-b)")
def _check_r_identity(cfg):
    betas = _beta_grid(min(cfg.count, 1000))
    res = np.array([-abs(r_identity_residual(b)) for b in betas])
    i = int(np.argmin(res))
    return _report("R-identity", float(res[i]), {"beta": float(betas[i])}, betas.size)


# -- waypoint on the unit sphere ---------------------------------------------

SQRT2 = math.sqrt(2.0)
WAYPOINT_DIMS = (2, 3)


def waypoint_margins(X, Y) -> np.ndarray:
    W = geo.chord_waypoint_array(X, Y)
    legs = geo.q_array(X, W) + geo.q_array(W, Y)
    return SQRT2 * geo.q_array(X, Y) * (1.0 + 1e-12) - legs


def waypoint_ratio(X, Y) -> np.ndarray:
    W = geo.chord_waypoint_array(X, Y)
    return (geo.q_array(X, W) + geo.q_array(W, Y)) / geo.q_array(X, Y)


def trig_margin(angle):
    angle = np.asarray(angle, dtype=float)
    return np.sqrt(1.0 - np.cos(angle)) * (1.0 + 1e-12) - np.sqrt(2.0 - 2.0 * np.cos(angle / 2.0))


def _waypoint_at(w):
    if w["claim"] == "trig":
        return float(trig_margin(w["angle"]))
    n = w["n"]
    return float(waypoint_margins(_unpt(w["x"], n)[None, :], _unpt(w["y"], n)[None, :])[0])


@_register("waypoint-sqrt2", 0.0, _waypoint_at, "q(x,w)+q(w,y) <= sqrt(2) q(x,y)")
def _check_waypoint(cfg):
    best = (math.inf, {})
    for n in WAYPOINT_DIMS:

        def margins(rng, size, n=n):
            X = sample_region(rng, size, n, "unit_ball")
            Y = sample_region(rng, size, n, "ball_complement")
            Y[rng.random(size) < 0.01] = np.inf
            m = waypoint_margins(X, Y)
            return m, lambda i: {"claim": "waypoint", "n": n, "x": _pt(X[i]), "y": _pt(Y[i])}

        m, _, w = _sampled_min(cfg.count, cfg, _salt("waypoint-sqrt2", n), margins)
        best = _merge(best, (m, w))
    angles = np.linspace(0.0, math.pi, 10001)
    tm = trig_margin(angles)
    i = int(np.argmin(tm))
    best = _merge(best, (float(tm[i]), {"claim": "trig", "angle": float(angles[i])}))
    witness = dict(best[1])
    e1 = np.array([[1.0, 0.0]])
    witness["equality_ratio_exact"] = float(waypoint_ratio(0 * e1, np.full((1, 2), np.inf))[0])
    witness["equality_ratio_eps"] = float(waypoint_ratio(1e-4 * e1, 1e4 * e1 + [[0.0, 1.0]])[0])
    return _report("waypoint-sqrt2", best[0], witness, cfg.count * len(WAYPOINT_DIMS) + angles.size)


# -- the auxiliary region and its image under inversion ----------------------

AUX_RADII = (1.1, 2.0, 5.0)
AUX_CENTER = np.array([0.0, 1.0])
AUX_RADIUS = SQRT2


def aux_region_boundary(R: float, count: int) -> np.ndarray:
    """Dense samples of the boundary of {x_2 < -1/R, |x| <= R}: segment plus arc."""
    h = 1.0 / R
    half = math.sqrt(R * R - h * h)
    k = count // 2
    seg = np.column_stack([np.linspace(-half, half, k), np.full(k, -h)])
    phi0 = math.asin(h / R)  # arc runs below the line, angles in [pi + phi0, 2 pi - phi0]
    phi = np.linspace(math.pi + phi0, 2 * math.pi - phi0, count - k)
    arc = R * np.column_stack([np.cos(phi), np.sin(phi)])
    return np.vstack([seg, arc])


def aux_image_norm(X) -> np.ndarray:
    return np.linalg.norm(geo.invert_array(X, AUX_CENTER, AUX_RADIUS), axis=-1)


def _circumcircle(P) -> tuple[np.ndarray, float]:
    (ax, ay), (bx, by), (cx, cy) = P
    d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    ux = ((ax**2 + ay**2) * (by - cy) + (bx**2 + by**2) * (cy - ay) + (cx**2 + cy**2) * (ay - by)) / d
    uy = ((ax**2 + ay**2) * (cx - bx) + (bx**2 + by**2) * (ax - cx) + (cx**2 + cy**2) * (bx - ax)) / d
    c = np.array([ux, uy])
    return c, float(np.linalg.norm(P[0] - c))


def aux_circle_solution(R: float) -> dict:
    """Solve for |y|^2 and 2|y|cos(angle) from the two image circles.

    The images of the line x_2 = -1/R and of the circle |x| = R are fitted from
    inverted sample points; writing each circle as |y - c|^2 = r^2 with c on the
    e_2-axis gives two equations linear in u = |y|^2 and v = 2|y|cos(angle).
    """
    h = 1.0 / R
    line = geo.invert_array(np.array([[-1.0, -h], [0.0, -h], [2.0, -h]]), AUX_CENTER, AUX_RADIUS)
    ang = np.array([0.3, 1.7, 4.0])
    circ = geo.invert_array(R * np.column_stack([np.cos(ang), np.sin(ang)]), AUX_CENTER, AUX_RADIUS)
    (c1, r1), (c2, r2) = _circumcircle(line), _circumcircle(circ)
    # |y|^2 - 2|y||c| cos = r^2 - |c|^2 with c = (0, c_2)
    A = np.array([[1.0, -c1[1]], [1.0, -c2[1]]])
    b = np.array([r1**2 - c1[1] ** 2, r2**2 - c2[1] ** 2])
    u, v = np.linalg.solve(A, b)
    return {
        "u": float(u),
        "v": float(v),
        "u_formula": (R**3 + R - 2.0) / (R**3 + R + 2.0),
        "v_formula": 2.0 * R * (R - 1.0) / (R * R - R + 2.0),
        "r1_sq": r1**2,
        "r1_sq_formula": R * R / (R + 1.0) ** 2,
        "r2_sq": r2**2,
        "r2_sq_geometric": 4.0 * R * R / (R * R - 1.0) ** 2,
        "r2_sq_as_printed": 2.0 * R * R / (R * R - 1.0) ** 2,
        "c1": float(c1[1]),
        "c2": float(c2[1]),
    }


def _aux_at(w):
    R = w["R"]
    if w["claim"] == "upper":
        return float(bd.aux_radius(R) - aux_image_norm(np.array([w["x"]]))[0])
    if w["claim"] == "attain":
        return float(aux_image_norm(np.array([w["x"]]))[0] - bd.aux_radius(R) + TOL_ATTAIN)
    sol = aux_circle_solution(R)
    key = w["claim"].split("-")[1]
    return -abs(sol[key] - sol[key + "_formula"])


@_register("aux-geometry", TOL_INEQUALITY, _aux_at, "|pi(x)| <= sqrt((R^3+R-2)/(R^3+R+2)) on the region")
def _check_aux(cfg):
    best = (math.inf, {})
    details = {}
    total = 0
    for R in AUX_RADII:
        B = aux_region_boundary(R, cfg.count)
        nb = aux_image_norm(B)
        ar = bd.aux_radius(R)
        # interior layer: rejection sample the region
        rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=_salt("aux-geometry", int(R * 1000))))
        P = rng.uniform(-R, R, size=(max(cfg.count // 10, 1), 2))
        P = P[(P[:, 1] < -1.0 / R) & (np.linalg.norm(P, axis=1) <= R)]
        ni = aux_image_norm(P)
        pts = np.vstack([B, P])
        norms = np.concatenate([nb, ni])
        total += len(pts)
        i = int(np.argmax(norms))
        up = (ar - float(norms[i]), {"claim": "upper", "R": R, "x": _pt(pts[i])})
        at = (float(norms[i]) - ar + TOL_ATTAIN, {"claim": "attain", "R": R, "x": _pt(pts[i])})
        sol = aux_circle_solution(R)
        cu = (-abs(sol["u"] - sol["u_formula"]), {"claim": "circle-u", "R": R})
        cv = (-abs(sol["v"] - sol["v_formula"]), {"claim": "circle-v", "R": R})
        best = _merge(best, up, at, cu, cv)
        details[str(R)] = {"sup": float(norms[i]), "aux_radius": ar, **sol}
    witness = dict(best[1])
    witness["per_radius"] = details
    return _report("aux-geometry", best[0], witness, total)


# -- inversion is a q-isometry ----------------------------------------------

ISOMETRY_STRETCH_EXPONENT = 0.5


def _isometry_margins(claim, X, Y):
    if claim == "distance":
        IX, IY = geo.unit_inversion_array(X), geo.unit_inversion_array(Y)
        return -np.abs(geo.q_array(IX, IY) - geo.q_array(X, Y))
    n = X.shape[-1]
    g = mp.RadialStretch(ISOMETRY_STRETCH_EXPONENT, n)
    h = mp.UnitInversionConjugate(g)
    a = g.a
    q1 = holder_quotients(g, "spherical", a, X, Y)
    q2 = holder_quotients(h, "spherical", a, geo.unit_inversion_array(X), geo.unit_inversion_array(Y))
    ok = np.isfinite(q1) & np.isfinite(q2)
    # pairs dropped by one side only would be a real discrepancy
    mismatch = np.isfinite(q1) != np.isfinite(q2)
    q1, q2 = np.where(ok, q1, 0.0), np.where(ok, q2, 0.0)
    rel = np.abs(q1 - q2) / np.maximum(1.0, np.abs(q1))
    return np.where(mismatch, -np.inf, np.where(ok, -rel, 0.0))


def _isometry_at(w):
    n = w["n"]
    return float(_isometry_margins(w["claim"], _unpt(w["x"], n)[None, :], _unpt(w["y"], n)[None, :])[0])


@_register("q-isometry-inversion", TOL_IDENTITY, _isometry_at, "x -> x/|x|^2 preserves q")
def _check_isometry(cfg):
    best = (math.inf, {})
    for n in WAYPOINT_DIMS:

        def margins(rng, size, n=n):
            X, Y = (sample_region(rng, size, n, "sphere", inf_prob=0.01) for _ in range(2))
            M = np.stack([_isometry_margins("distance", X, Y), _isometry_margins("conjugate", X, Y)])
            claims = np.array(["distance", "conjugate"])[M.argmin(axis=0)]
            return M.min(axis=0), lambda i: {"claim": str(claims[i]), "n": n, "x": _pt(X[i]), "y": _pt(Y[i])}

        m, _, w = _sampled_min(cfg.count, cfg, _salt("q-isometry-inversion", n), margins)
        best = _merge(best, (m, w))
    return _report("q-isometry-inversion", best[0], best[1], cfg.count * len(WAYPOINT_DIMS))


# -- the bounds against their caps and against the earlier planar bound ----

DOMINANCE_DIMS = (2, 3, 5)


def dominance_grids() -> dict[str, np.ndarray]:
    return {
        "small": 1.0 + np.logspace(-8.0, -2.0, 50),
        "unit": 1.0 + np.arange(1, 51) / 50.0,
    }


def _dominance_at(w):
    p = bd.DistortionParams(w["K"], w["n"])
    m4 = bd.m4_sharp(p).log_value
    claim = w["claim"]
    if claim == "bonfert":
        return math.log(bd.bonfert_bound(p.K)) - m4
    crude = bd.m4_crude(p)
    other = {"cap7": crude.cap7, "cap106": crude.cap106, "cap138": crude.cap138, "structured": crude.structured}
    return other[claim].log_value - m4


@_register("bound-dominance", TOL_INEQUALITY, _dominance_at, "M4 bound below its caps; below 128*2^((1-K)/2K)")
def _check_dominance(cfg):
    g = dominance_grids()
    cands = []
    for n in DOMINANCE_DIMS:
        for K in g["small"]:
            cands.append({"claim": "cap7", "K": float(K), "n": n})
        for K in g["unit"]:
            for claim in ("cap106", "cap138", "structured"):
                cands.append({"claim": claim, "K": float(K), "n": n})
    for K in g["small"]:
        cands.append({"claim": "bonfert", "K": float(K), "n": 2})
    margins = [(_dominance_at(w), w) for w in cands]
    m, w = min(margins, key=lambda c: c[0])
    failing = sorted({c[1]["claim"] for c in margins if c[0] < -TOL_INEQUALITY})
    witness = dict(w)
    witness["violated_claims"] = failing
    witness["violations"] = sum(1 for c in margins if c[0] < -TOL_INEQUALITY)
    return _report("bound-dominance", m, witness, len(cands))


# -- quasisymmetric functions --------------------------------------------------

QS_SLOPES = (3.0, 1.5, 0.5)


def qs_ratio_margin(slope, x, t):
    f = mp.PiecewiseLinearQS(slope)
    K = f.qs_constant
    r = f.ratio(x, t)
    return np.minimum(K - r, r - 1.0 / K) / K


def _qs_ratio_at(w):
    return float(qs_ratio_margin(w["lambda"], w["x"], w["t"]))


@_register("qs-ratio", TOL_IDENTITY, _qs_ratio_at, "1/K <= (g(x+t)-g(x))/(g(x)-g(x-t)) <= K")
def _check_qs_ratio(cfg):
    best = (math.inf, {})
    for lam in QS_SLOPES:

        def margins(rng, size, lam=lam):
            x = sample_region(rng, size, 1, "real_line")[:, 0]
            t = sample_region(rng, size, 1, "positive_reals")[:, 0]
            m = qs_ratio_margin(lam, x, t)
            return m, lambda i: {"lambda": lam, "x": float(x[i]), "t": float(t[i])}

        m, _, w = _sampled_min(cfg.count, cfg, _salt("qs-ratio", int(lam * 1000)), margins)
        best = _merge(best, (m, w))
    return _report("qs-ratio", best[0], best[1], cfg.count * len(QS_SLOPES))


QS_SPHERICAL_K = 1.5


def _qs_spherical_at(w):
    f = mp.PiecewiseLinearQS(w["lambda"])
    qb = bd.qs_spherical_bound(f.qs_constant)
    X, Y = _unpt(w["x"], 1)[None, :], _unpt(w["y"], 1)[None, :]
    q = holder_quotients(f, "spherical", qb.exponent, X, Y)[0]
    return qb.constant.log_value - math.log(q)


@_register("qs-spherical", TOL_INEQUALITY, _qs_spherical_at, "chordal Holder bound for K-qs functions")
def _check_qs_spherical(cfg):
    f = mp.PiecewiseLinearQS(QS_SPHERICAL_K)
    qb = bd.qs_spherical_bound(f.qs_constant)
    rep = empirical_holder(f, "spherical", qb.exponent, cfg.with_(region="real_line"))
    w = {"lambda": QS_SPHERICAL_K, "x": rep.witness_pair[0], "y": rep.witness_pair[1]}
    margin = _qs_spherical_at(w)
    w.update({"empirical": rep.empirical_constant, "bound": qb.constant.value, "exponent": qb.exponent, "L": qb.L})
    return _report("qs-spherical", margin, w, rep.samples_used)


# ---------------------------------------------------------------------------
# sharpness trend


@dataclass
class TrendTable:
    n: int
    rows: list = field(default_factory=list)
    monotone: bool = True
    final_ok: Optional[bool] = None


def sharpness_trend(n: int, K_list, cfg: Optional[SampleConfig] = None, empirical: bool = True) -> TrendTable:
    """m4_sharp, the small-K cap and an empirical radial-stretch constant along K_list.

    ``monotone`` is True when m4_sharp is nonincreasing along the list;
    ``final_ok`` reports m4_sharp <= 1.01 at the last K when that K has
    K - 1 <= 1e-6 (None otherwise).
    """
    cfg = cfg or SampleConfig(count=20_000, refinement_steps=20)
    table = TrendTable(n)
    prev = math.inf
    for K in K_list:
        K = float(K)
        p = bd.DistortionParams(K, n)
        m4 = bd.m4_sharp(p)
        cap = bd.m4_crude(p).cap7
        row = {
            "K": K,
            "m4_sharp": m4.value,
            "log_m4_sharp": m4.log_value,
            "cap7": cap.value if cap.valid else None,
        }
        if empirical:
            f = mp.RadialStretch(p.alpha, n)
            row["empirical"] = empirical_holder(f, "spherical", p.alpha, cfg.with_(region="sphere")).empirical_constant
        table.rows.append(row)
        if m4.log_value > prev:
            table.monotone = False
        prev = m4.log_value
    if table.rows and table.rows[-1]["K"] - 1.0 <= 1e-6:
        table.final_ok = table.rows[-1]["m4_sharp"] <= 1.01
    return table
