import math

import numpy as np
import pytest

from qcdist import bounds as bd
from qcdist import maps as mp
from qcdist import verify as vf

SMALL = vf.SampleConfig(count=4000, refinement_steps=15)


@pytest.fixture(scope="module")
def reports():
    return {name: vf.run_check(name, vf.SampleConfig(count=20_000)) for name in vf.check_names()}


@pytest.mark.parametrize("name", vf.check_names())
def test_check_passes(reports, name):
    rep = reports[name]
    assert rep.passed, f"{name}: worst margin {rep.worst_margin} at {rep.witness}"


@pytest.mark.parametrize("name", vf.check_names())
def test_witness_reproduces_margin(reports, name):
    rep = reports[name]
    assert abs(vf.recheck(rep) - rep.worst_margin) <= 1e-12


@pytest.mark.parametrize("name", vf.check_names())
def test_deterministic_across_workers(name):
    a = vf.run_check(name, SMALL)
    b = vf.run_check(name, SMALL.with_(workers=4))
    c = vf.run_check(name, SMALL)
    assert a.to_dict() == b.to_dict() == c.to_dict()


def test_unknown_check():
    with pytest.raises(ValueError):
        vf.run_check("nosuch")


def test_specific_witnesses(reports):
    assert reports["ineq-1.5c"].witness["equality_margin"] == 0.0
    inf = reports["infimum-claim"].witness
    assert -0.1144 < inf["value"] < -0.113
    assert reports["waypoint-sqrt2"].witness["equality_ratio_exact"] == pytest.approx(math.sqrt(2), abs=1e-12)
    dom = reports["bound-dominance"].witness
    assert "bonfert" not in dom.get("violated_claims", [])
    assert "cap138" not in dom.get("violated_claims", [])


def test_infimum_oracle():
    s, v = vf.minimize_infimum_objective()
    assert v == pytest.approx(-0.114385, abs=5e-7)
    assert vf.infimum_objective(s) == v
    # endpoint behaviour makes the bracket exhaustive
    assert vf.infimum_objective(1e-12) > v and vf.infimum_objective(1e6) > 0


def test_aux_circles():
    sol = vf.aux_circle_solution(2.0)
    assert sol["u"] == pytest.approx(2 / 3, abs=1e-9)
    assert sol["v"] == pytest.approx(1.0, abs=1e-9)
    assert sol["r2_sq_geometric"] == pytest.approx(16 / 9, abs=1e-9)


def test_aux_radius_is_attained_on_boundary():
    for R in (1.1, 2.0, 5.0):
        B = vf.aux_region_boundary(R, 50_000)
        sup = vf.aux_image_norm(B).max()
        assert bd.aux_radius(R) - 1e-3 <= sup <= bd.aux_radius(R) + 1e-9


def test_pattern_search_finds_maximum():
    fun = lambda Z: -np.sum((Z - np.array([0.3, -1.2])) ** 2, axis=1)  # noqa: E731
    z, v = vf.pattern_search(fun, np.zeros(2), np.ones(2), 80)
    assert np.allclose(z, [0.3, -1.2], atol=1e-6)


def test_sampling_regions():
    rng = np.random.default_rng(0)
    for region in ("unit_ball", "ball", "ball_complement", "sphere", "positive_reals"):
        X = vf.sample_region(rng, 1000, 1 if region == "positive_reals" else 3, region, 2.0)
        assert vf.in_region(X, region, 2.0).all()
    with pytest.raises(ValueError):
        vf.sample_region(rng, 10, 2, "torus")


# --- empirical Holder constants -----------------------------------------------------


def test_identity_constant_is_one():
    for metric, region in (("spherical", "sphere"), ("euclidean", "unit_ball")):
        rep = vf.empirical_holder(mp.parse_map("identity:n=2"), metric, 1.0, SMALL.with_(region=region))
        assert rep.empirical_constant == pytest.approx(1.0, abs=1e-12)


def test_euclidean_stretch_on_ball():
    p = bd.DistortionParams(2.0, 2)
    f = mp.RadialStretch(p.alpha, 2)
    rep = vf.empirical_holder(f, "euclidean", p.alpha, SMALL.with_(region="unit_ball"))
    assert rep.empirical_constant >= 1.0
    assert rep.empirical_constant <= rep.bound_value
    X = np.array([[0.3, 0.4], [0.0, -0.9], [1e-5, 0.0]])
    q = vf.holder_quotients(f, "euclidean", p.alpha, X, np.zeros_like(X))
    assert np.allclose(q, 1.0, atol=1e-12)


REGISTERED = [
    ("stretch:a=0.5,n=2", "spherical"),
    ("stretch:K=1.5,n=3", "spherical"),
    ("invconj(stretch:a=0.7,n=2)", "spherical"),
    ("stretch:K=2,n=2", "euclidean"),
    ("qs:lambda=1.5", "spherical"),
    ("qs:lambda=0.25", "spherical"),
]


@pytest.mark.parametrize("text,metric", REGISTERED)
def test_empirical_never_exceeds_bound(text, metric):
    f = mp.parse_map(text)
    region = "real_line" if f.dim == 1 else ("sphere" if metric == "spherical" else "unit_ball")
    if isinstance(f, mp.PiecewiseLinearQS):
        exponent = bd.qs_spherical_bound(f.qs_constant).exponent
    else:
        exponent = bd.DistortionParams(f.qc_constant, f.dim).alpha
    rep = vf.empirical_holder(f, metric, exponent, vf.SampleConfig(count=20_000, region=region))
    assert math.isfinite(rep.bound_value)
    assert 0 < rep.empirical_constant <= rep.bound_value


def test_no_bound_without_normalization():
    bound, formula = vf.applicable_bound(mp.MobiusDisk(0.4), "spherical", 1.0)
    assert math.isnan(bound) and formula is None


def test_invconj_search_matches_plain():
    cfg = vf.SampleConfig(count=20_000)
    a = vf.empirical_holder(mp.parse_map("stretch:a=0.5,n=2"), "spherical", 0.5, cfg)
    b = vf.empirical_holder(mp.parse_map("invconj(stretch:a=0.5,n=2)"), "spherical", 0.5, cfg)
    assert a.empirical_constant == pytest.approx(b.empirical_constant, abs=1e-9)


def test_holder_errors():
    with pytest.raises(ValueError):
        vf.empirical_holder(mp.parse_map("identity:n=2"), "spherical", 1.5, SMALL)
    with pytest.raises(ValueError):
        vf.empirical_holder(mp.parse_map("identity:n=2"), "spherical", 1.0, SMALL.with_(region="real_line"))


def test_sharpness_trend():
    t = vf.sharpness_trend(2, [1 + 1e-2, 1 + 1e-4, 1 + 1e-6], SMALL)
    assert t.monotone
    assert t.final_ok
    assert t.rows[-1]["m4_sharp"] <= math.exp(7e-3)
    for row in t.rows:
        assert 1.0 <= row["empirical"] <= row["m4_sharp"]
    one = vf.sharpness_trend(2, [1.0], empirical=False)
    assert one.rows[0]["m4_sharp"] == 1.0
