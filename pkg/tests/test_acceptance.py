"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py``; the lines are repeated in the
terminal summary.
"""

import json
import math
import subprocess
import sys
import time

import numpy as np

from qcdist import bounds as bd
from qcdist import maps as mp
from qcdist import verify as vf
from qcdist.bounds import DistortionParams as P

SEED = 0


def test_01_metric_axioms(criterion):
    t0 = time.perf_counter()
    rep = vf.run_check("metric-axioms", vf.SampleConfig(seed=SEED, count=100_000))
    dt = time.perf_counter() - t0
    ok = rep.worst_margin >= -1e-12 and dt < 10
    criterion(1, "metric axioms", ok, f"worst margin {rep.worst_margin:.3g} over {rep.samples_used} triples, {dt:.2f} s")


def test_02_lift_isometry(criterion):
    rep = vf.run_check("lift-isometry", vf.SampleConfig(seed=SEED, count=10_000))
    criterion(2, "lift isometry", rep.worst_margin >= -1e-12, f"max deviation {-rep.worst_margin:.3g}")


def test_03_inequality(criterion):
    rep = vf.run_check("ineq-1.5c", vf.SampleConfig(seed=SEED, count=10_000))
    eq = rep.witness["equality_margin"]
    ok = rep.worst_margin >= -1e-9 and abs(eq) <= 1e-12
    criterion(3, "(1+t^g)^g/(1+t) bound", ok, f"worst margin {rep.worst_margin:.3g}, margin at g=1 {eq:.3g}")


def test_04_infimum(criterion):
    t0 = time.perf_counter()
    s, v = vf.minimize_infimum_objective()
    dt = time.perf_counter() - t0
    ok = -0.1144 < v < -0.113 and dt < 1
    criterion(4, "infimum", ok, f"min {v:.6f} at s = {s:.6f}, {dt:.3f} s")


def test_05_R_chain_and_identity(criterion):
    cfg = vf.SampleConfig(seed=SEED, count=1000)
    chain = vf.run_check("R-chain", cfg)
    ident = vf.run_check("R-identity", cfg)
    ok = chain.worst_margin >= -1e-9 and ident.worst_margin >= -1e-12
    criterion(5, "R chain and identity", ok, f"chain margin {chain.worst_margin:.3g}, identity residual {-ident.worst_margin:.3g}")


def test_06_waypoint(criterion):
    rep = vf.run_check("waypoint-sqrt2", vf.SampleConfig(seed=SEED, count=10_000))
    near = rep.witness["equality_ratio_eps"]
    ok = rep.passed and near >= math.sqrt(2) - 1e-3
    criterion(6, "waypoint sqrt(2)", ok, f"worst margin {rep.worst_margin:.3g}, ratio near (0, oo) {near:.6f}")


def test_07_aux_radius(criterion):
    rep = vf.run_check("aux-geometry", vf.SampleConfig(seed=SEED, count=100_000))
    details, ok = [], rep.passed
    for R in (1.1, 2.0, 5.0):
        sup = float(vf.aux_image_norm(vf.aux_region_boundary(R, 100_000)).max())
        r = bd.aux_radius(R)
        ok &= r - 1e-3 <= sup <= r + 1e-9
        details.append(f"R={R}: sup {sup:.9f} vs {r:.9f}")
    ok &= abs(bd.aux_radius(2.0) - math.sqrt(2 / 3)) <= 1e-12
    criterion(7, "auxiliary radius", ok, "; ".join(details))


def test_08_bound_caps(criterion):
    small = 1.0 + np.logspace(-8, -2, 50)
    unit = 1.0 + np.arange(1, 51) / 50
    bad7, bad106 = [], []
    for n in (2, 3, 5):
        for K in small:
            if bd.m4_sharp(P(K, n)).log_value > 7 * math.sqrt(K - 1):
                bad7.append((n, K))
        for K in unit:
            if bd.m4_sharp(P(K, n)).log_value > 106 * math.sqrt(K - 1):
                bad106.append((n, K))
    ok = not bad7 and not bad106
    detail = f"{len(bad7)} violations of the 7-cap, {len(bad106)} of the 106-cap"
    if bad7:
        detail += f" (7-cap fails from K-1 = {min(k for _, k in bad7) - 1:.2g})"
    if bad106:
        n, K = max(bad106, key=lambda b: bd.m4_sharp(P(b[1], b[0])).log_value - 106 * math.sqrt(b[1] - 1))
        detail += f" (worst 106-cap case n={n}, K={K:g})"
    criterion(8, "bound caps", ok, detail)


def test_09_prior_constant(criterion):
    Ks = np.concatenate([1.0 + np.logspace(-12, -2, 200), np.linspace(1.0, 1.01, 201)[1:]])
    worst = max(bd.m4_sharp(P(K, 2)).value / bd.bonfert_bound(K) for K in Ks)
    ok = worst < 1 and bd.bonfert_bound(1.0) == 128 and bd.m4_sharp(P(1.0, 2)).value == 1
    criterion(9, "comparison with 128 * 2^((1-K)/(2K))", ok, f"max ratio {worst:.4g}; values at K=1: 128 vs 1")


def test_10_soundness_sandwich(criterion):
    t0 = time.perf_counter()
    cfg = vf.SampleConfig(seed=SEED, count=100_000, refinement_steps=40)
    ok, found = True, []
    for n in (2, 3):
        for K in (1.01, 1.1, 1.5, 2.0):
            p = P(K, n)
            f = mp.RadialStretch(p.alpha, n)
            sph = vf.empirical_holder(f, "spherical", p.alpha, cfg.with_(region="sphere")).empirical_constant
            m4, m3 = bd.m4_sharp(p).value, bd.m3_global(p).value
            euc = vf.empirical_holder(f, "euclidean", p.alpha, cfg.with_(region="unit_ball")).empirical_constant
            rng = np.random.default_rng(int(K * 1000) + n)
            X = vf.sample_region(rng, 1000, n, "unit_ball")
            radial = vf.holder_quotients(f, "euclidean", p.alpha, X, np.zeros_like(X))
            ok &= 1 <= sph <= min(m4, m3) and euc >= 1 and np.max(np.abs(radial - 1)) <= 1e-12
            found.append(f"n={n} K={K}: {sph:.4f}")
    dt = time.perf_counter() - t0
    ok &= dt < 60
    criterion(10, "empirical soundness", ok, ", ".join(found) + f"; {dt:.1f} s")


def test_11_sharpness_trend(criterion):
    vals = [bd.m4_sharp(P(1 + 10.0**-j, 2)).value for j in (2, 4, 6)]
    ok = vals[0] > vals[1] > vals[2] and vals[2] <= 1.007
    criterion(11, "sharpness trend", ok, " > ".join(f"{v:.6f}" for v in vals))


def test_12_quasisymmetric(criterion):
    q1 = bd.qs_spherical_bound(1.0)
    qb = bd.qs_spherical_bound(1.5)
    f = mp.PiecewiseLinearQS(1.5)
    rep = vf.empirical_holder(f, "spherical", 1 / qb.L, vf.SampleConfig(seed=SEED, count=100_000, region="real_line"))
    L4 = bd.qs_spherical_bound(4.0).L
    ok = q1.constant.value == 1 and rep.empirical_constant <= qb.constant.value and L4 == 7
    criterion(12, "quasisymmetric pipeline", ok, f"C(1)={q1.constant.value}, empirical {rep.empirical_constant:.4f} <= {qb.constant.value:.6g}, L(4)={L4}")


def test_13_determinism(criterion):
    cmd = [sys.executable, "-m", "qcdist", "verify", "--seed", str(SEED), "--format", "json"]
    outs, times = [], []
    for _ in range(2):
        t0 = time.perf_counter()
        outs.append(subprocess.run(cmd, capture_output=True).stdout)
        times.append(time.perf_counter() - t0)
    names = [r["name"] for r in json.loads(outs[0])]
    ok = outs[0] == outs[1] and names == vf.check_names() and max(times) < 120
    criterion(13, "determinism", ok, f"{len(names)} reports, identical={outs[0] == outs[1]}, {max(times):.1f} s per run")
