"""Command line front end: ``qcdist {bounds,verify,holder,qs-bound,trend}``.

Exit codes: 0 on success (and when every requested check passes), 1 when a
verification fails, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import bounds as bd
from . import maps as mp
from . import verify as vf

BOUNDS_COLUMNS = [
    "K",
    "n",
    "alpha",
    "beta",
    "m_bound",
    "log_m_bound",
    "lambda_hi",
    "M1_surrogate",
    "log_M1_surrogate",
    "M3_ball",
    "log_M3_ball",
    "M3_global",
    "log_M3_global",
    "M4_sharp",
    "log_M4_sharp",
    "M4_crude",
    "log_M4_crude",
    "cap106",
    "cap138",
    "cap7",
    "bonfert",
    "crude_valid",
    "cap106_valid",
    "cap7_valid",
    "M4_le_cap106",
    "M4_le_cap7",
    "M4_lt_bonfert",
]

QS_COLUMNS = ["K", "L", "exponent", "R_up", "log_R_up", "constant", "log_constant"]
VERIFY_COLUMNS = ["name", "pass", "worst_margin", "samples_used", "tolerance"]


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# parsing helpers


def parse_k_grid(text: str) -> list[float]:
    """``start:stop:points:lin|log``; the log option spaces K - 1 logarithmically."""
    parts = text.split(":")
    if len(parts) != 4:
        raise UsageError(f"--k-grid expects start:stop:points:lin|log, got {text!r}")
    try:
        start, stop, points = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"bad --k-grid {text!r}") from None
    kind = parts[3]
    if points < 1:
        raise UsageError("--k-grid needs at least one point")
    if start < 1 or stop < 1:
        raise UsageError("K values must be >= 1")
    if kind == "lin":
        return [float(k) for k in np.linspace(start, stop, points)]
    if kind == "log":
        if start <= 1 or stop <= 1:
            raise UsageError("log grids are spaced in K - 1 and need K > 1")
        return [1.0 + float(e) for e in np.logspace(math.log10(start - 1), math.log10(stop - 1), points)]
    raise UsageError(f"grid kind must be lin or log, got {kind!r}")


def parse_floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected comma separated numbers, got {text!r}") from None


def parse_ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected comma separated integers, got {text!r}") from None


def _k_values(args) -> list[float]:
    ks = []
    if args.k:
        ks += parse_floats(args.k)
    if args.k_grid:
        ks += parse_k_grid(args.k_grid)
    if not ks:
        raise UsageError("give --k or --k-grid")
    if any(not (k >= 1 and math.isfinite(k)) for k in ks):
        raise UsageError("K values must be finite and >= 1")
    return ks


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("QCDIST_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"QCDIST_SEED must be an integer, got {env!r}") from None
    return 0


# ---------------------------------------------------------------------------
# output


def _clean(v):
    """JSON-safe copy: non-finite floats become strings, numpy scalars plain."""
    if isinstance(v, dict):
        return {k: _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def render(rows: list[dict], columns: list[str], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(_clean(rows), indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r.get(c)) for c in columns])
    return buf.getvalue()


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands


def bounds_row(K: float, n: int) -> dict:
    p = bd.DistortionParams(K, n)
    lam = bd.LambdaBounds.for_dimension(n)
    m1 = bd.m1_default(p, lam)
    m3b = bd.m3_ball(p, lam)
    m3g = bd.m3_global(p, lam)
    m4 = bd.m4_sharp(p, lam)
    crude = bd.m4_crude(p, lam)
    lm = bd.log_eta_m_bound(p)
    row = {
        "K": K,
        "n": n,
        "alpha": p.alpha,
        "beta": p.beta,
        "m_bound": bd.eta_m_bound(p),
        "log_m_bound": lm,
        "lambda_hi": lam.hi,
        "M1_surrogate": m1.value,
        "log_M1_surrogate": m1.log_value,
        "M3_ball": m3b.value,
        "log_M3_ball": m3b.log_value,
        "M3_global": m3g.value,
        "log_M3_global": m3g.log_value,
        "M4_sharp": m4.value,
        "log_M4_sharp": m4.log_value,
        "M4_crude": crude.structured.value,
        "log_M4_crude": crude.structured.log_value,
        "cap106": crude.cap106.value,
        "cap138": crude.cap138.value,
        "cap7": crude.cap7.value,
        "bonfert": bd.bonfert_bound(K) if n == 2 else None,
        "crude_valid": crude.structured.valid,
        "cap106_valid": crude.cap106.valid,
        "cap7_valid": crude.cap7.valid,
        "M4_le_cap106": (m4.log_value <= crude.cap106.log_value) if crude.cap106.valid else None,
        "M4_le_cap7": (m4.log_value <= crude.cap7.log_value) if crude.cap7.valid else None,
        "M4_lt_bonfert": (m4.log_value < math.log(bd.bonfert_bound(K))) if n == 2 else None,
    }
    return row


def cmd_bounds(args) -> int:
    ks = _k_values(args)
    ns = parse_ints(args.n)
    if not ns or any(n < 2 for n in ns):
        raise UsageError("--n values must be integers >= 2")
    rows = [bounds_row(K, n) for n in ns for K in ks]
    _emit(render(rows, BOUNDS_COLUMNS, args.format), args.out)
    return 0


def cmd_qs_bound(args) -> int:
    rows = []
    for K in _k_values(args):
        qb = bd.qs_spherical_bound(K)
        rows.append(
            {
                "K": K,
                "L": qb.L,
                "exponent": qb.exponent,
                "R_up": qb.R_up,
                "log_R_up": qb.log_R_up,
                "constant": qb.constant.value,
                "log_constant": qb.constant.log_value,
            }
        )
    _emit(render(rows, QS_COLUMNS, args.format), args.out)
    return 0


def _sample_config(args, **kw) -> vf.SampleConfig:
    try:
        return vf.SampleConfig(
            seed=_seed(args),
            count=args.count,
            refinement_steps=args.steps,
            workers=args.workers,
            **kw,
        )
    except ValueError as e:
        raise UsageError(str(e)) from None


def cmd_verify(args) -> int:
    names = args.check or vf.check_names()
    unknown = [n for n in names if n not in vf.REGISTRY]
    if unknown:
        raise UsageError(f"unknown check(s): {', '.join(unknown)}; known: {', '.join(vf.check_names())}")
    cfg = _sample_config(args)
    reports = vf.run_all(cfg, names)
    rows = [r.to_dict() for r in reports]
    _emit(render(rows, VERIFY_COLUMNS, args.format), args.out)
    return 0 if all(r.passed for r in reports) else 1


def cmd_holder(args) -> int:
    try:
        f = mp.parse_map(args.map)
    except ValueError as e:
        raise UsageError(str(e)) from None
    if args.exp is not None:
        exponent = args.exp
    elif isinstance(f, mp.PiecewiseLinearQS):
        exponent = bd.qs_spherical_bound(f.qs_constant).exponent
    else:
        exponent = bd.DistortionParams(float(f.qc_constant), f.dim).alpha
    region = args.region or ("real_line" if f.dim == 1 else "sphere" if args.metric == "spherical" else "unit_ball")
    cfg = _sample_config(args, region=region)
    try:
        rep = vf.empirical_holder(f, args.metric, exponent, cfg)
    except ValueError as e:
        raise UsageError(str(e)) from None
    row = rep.to_dict()
    cols = ["map", "metric", "exponent", "empirical_constant", "bound_value", "bound_formula", "slack", "samples_used"]
    _emit(render([row], cols, args.format), args.out)
    return 0


def cmd_trend(args) -> int:
    ks = _k_values(args)
    ns = parse_ints(args.n)
    cfg = _sample_config(args, region="sphere")
    rows = []
    for n in ns:
        table = vf.sharpness_trend(n, ks, cfg, empirical=not args.no_empirical)
        for r in table.rows:
            rows.append({"n": n, **r, "monotone": table.monotone, "final_ok": table.final_ok})
    cols = ["n", "K", "m4_sharp", "log_m4_sharp", "cap7", "empirical", "monotone", "final_ok"]
    _emit(render(rows, cols, args.format), args.out)
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qcdist", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, default_format="csv"):
        p.add_argument("--format", choices=["csv", "json"], default=default_format)
        p.add_argument("--out", help="write to this file instead of stdout")

    def sampling(p, count):
        p.add_argument("--seed", type=int, default=None, help="default: $QCDIST_SEED or 0")
        p.add_argument("--count", type=int, default=count)
        p.add_argument("--steps", type=int, default=40, help="pattern-search refinement steps")
        p.add_argument("--workers", type=int, default=1)

    def kgrid(p):
        p.add_argument("--k", help="comma separated K values")
        p.add_argument("--k-grid", dest="k_grid", help="start:stop:points:lin|log")

    p = sub.add_parser("bounds", help="table of bound values over K and n")
    kgrid(p)
    p.add_argument("--n", default="2", help="comma separated dimensions")
    common(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("qs-bound", help="chordal bound for K-quasisymmetric functions of R")
    kgrid(p)
    common(p)
    p.set_defaults(func=cmd_qs_bound)

    p = sub.add_parser("verify", help="run the numerical checks")
    p.add_argument("--check", action="append", help="check name (repeatable); default all")
    sampling(p, 100_000)
    common(p, "json")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("holder", help="empirical Holder constant of a test map")
    p.add_argument("--map", required=True, help="e.g. stretch:a=0.5,n=2 or invconj(...)")
    p.add_argument("--metric", choices=["spherical", "euclidean"], default="spherical")
    p.add_argument("--exp", type=float, default=None, help="default: the map's Holder exponent")
    p.add_argument("--region", choices=list(vf.REGIONS), default=None)
    sampling(p, 100_000)
    common(p, "json")
    p.set_defaults(func=cmd_holder)

    p = sub.add_parser("trend", help="bound and empirical constant as K -> 1")
    kgrid(p)
    p.add_argument("--n", default="2")
    p.add_argument("--no-empirical", action="store_true")
    sampling(p, 20_000)
    common(p)
    p.set_defaults(func=cmd_trend)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as e:
        ap.error(str(e))  # exits with status 2


if __name__ == "__main__":
    sys.exit(main())
