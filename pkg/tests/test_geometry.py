import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qcdist import geometry as geo
from qcdist.geometry import ExtendedPoint, SphereSpec

INF2 = geo.infinity(2)


def pt(*c):
    return ExtendedPoint.finite(c)


# --- chordal metric -----------------------------------------------------------


def test_q_examples():
    assert geo.spherical_distance(pt(0, 0), INF2) == 1.0
    assert geo.spherical_distance(pt(0, 0), pt(1, 0)) == pytest.approx(1 / math.sqrt(2), abs=1e-15)
    assert geo.spherical_distance(pt(1, 0), pt(-1, 0)) == pytest.approx(1.0, abs=1e-15)
    assert geo.spherical_distance(pt(3, 4), INF2) == pytest.approx(1 / math.sqrt(26), abs=1e-15)
    assert geo.spherical_distance(INF2, INF2) == 0.0


def test_q_accepts_inf_on_either_side():
    assert geo.spherical_distance("inf", [3.0, 4.0]) == pytest.approx(1 / math.sqrt(26))
    assert geo.spherical_distance([3.0, 4.0], math.inf) == pytest.approx(1 / math.sqrt(26))


def test_q_dimension_mismatch():
    with pytest.raises(ValueError):
        geo.spherical_distance(pt(1, 0), pt(1, 0, 0))


def test_magnitude_cap():
    with pytest.raises(ValueError):
        pt(1e200, 0)


coord = st.floats(-1e6, 1e6, allow_nan=False)


def points(dim):
    finite = st.lists(coord, min_size=dim, max_size=dim).map(ExtendedPoint.finite)
    return st.one_of(finite, st.just(geo.infinity(dim)))


@settings(max_examples=300, deadline=None)
@given(st.sampled_from([2, 3, 5]).flatmap(lambda n: st.tuples(points(n), points(n), points(n))))
def test_q_is_a_metric(triple):
    x, y, z = triple
    q = geo.spherical_distance
    assert 0.0 <= q(x, y) <= 1.0 + 1e-15
    assert q(x, y) == q(y, x)
    assert q(x, x) == 0.0
    assert q(x, z) <= q(x, y) + q(y, z) + 1e-12


# --- lift -------------------------------------------------------------------


def test_lift_examples():
    assert np.allclose(geo.stereo_lift(pt(0, 0, 0)), [0, 0, 0, 0])
    assert np.allclose(geo.stereo_lift(geo.infinity(3)), [0, 0, 0, 1])
    assert np.allclose(geo.stereo_lift(pt(1, 0)), [0.5, 0, 0.5])


@pytest.mark.parametrize("n", [2, 3, 5])
def test_lift_is_isometry(n):
    rng = np.random.default_rng(n)
    X = rng.standard_normal((10_000, n)) * 10.0 ** rng.uniform(-3, 3, (10_000, 1))
    Y = rng.standard_normal((10_000, n)) * 10.0 ** rng.uniform(-3, 3, (10_000, 1))
    X[:50] = np.inf
    d = np.linalg.norm(geo.lift_array(X) - geo.lift_array(Y), axis=1)
    assert np.max(np.abs(d - geo.q_array(X, Y))) <= 1e-12
    L = geo.lift_array(Y)
    centre = np.zeros(n + 1)
    centre[-1] = 0.5
    assert np.max(np.abs(np.linalg.norm(L - centre, axis=1) - 0.5)) <= 1e-12


# --- inversion ----------------------------------------------------------------


def test_invert_examples():
    s = SphereSpec.of([0, 1], math.sqrt(2))
    assert geo.invert(pt(0, -1), s).norm() < 1e-15
    assert np.allclose(geo.invert(pt(0, 0), s).as_array(), [0, -1])
    fixed = pt(math.sqrt(2), 1)
    assert np.allclose(geo.invert(fixed, s).as_array(), fixed.as_array())
    assert np.allclose(geo.invert(pt(2, 0)).as_array(), [0.5, 0])


def test_invert_swaps_centre_and_infinity():
    s = SphereSpec.of([0, 1], 2.0)
    assert geo.invert(pt(0, 1), s).is_infinite
    assert np.allclose(geo.invert(INF2, s).as_array(), [0, 1])


@settings(max_examples=200, deadline=None)
@given(arrays(float, 3, elements=st.floats(-100, 100)), arrays(float, 3, elements=st.floats(-5, 5)), st.floats(0.1, 10))
def test_invert_is_involution(x, c, r):
    if np.linalg.norm(x - c) < 1e-3:
        return
    s = SphereSpec.of(c, r)
    back = geo.invert(geo.invert(ExtendedPoint.finite(x), s), s)
    assert np.allclose(back.as_array(), x, rtol=1e-9, atol=1e-9)


def test_unit_inversion_is_q_isometry():
    rng = np.random.default_rng(1)
    X = rng.standard_normal((5000, 3)) * 10.0 ** rng.uniform(-3, 3, (5000, 1))
    Y = rng.standard_normal((5000, 3))
    iX, iY = geo.unit_inversion_array(X), geo.unit_inversion_array(Y)
    assert np.max(np.abs(geo.q_array(iX, iY) - geo.q_array(X, Y))) <= 1e-12


# --- disk automorphisms --------------------------------------------------------


def test_disk_automorphism_examples():
    assert np.allclose(geo.disk_automorphism(0, pt(0.3, -0.2)).as_array(), [0.3, -0.2])
    assert geo.DiskAutomorphism(0).bilipschitz_constant == 1.0
    assert geo.disk_automorphism([0.5, 0], pt(0.5, 0)).norm() < 1e-15
    assert geo.DiskAutomorphism(0.5).bilipschitz_constant == pytest.approx(3.0)


def test_disk_automorphism_errors():
    with pytest.raises(ValueError):
        geo.DiskAutomorphism(1.0)
    with pytest.raises(ValueError):
        geo.disk_automorphism(0.2, pt(0.1, 0.1, 0.1))


@pytest.mark.parametrize("a", [0.5, 0.3 + 0.6j, -0.9])
def test_disk_automorphism_bilipschitz_on_closed_disk(a):
    tau = geo.DiskAutomorphism(a)
    rng = np.random.default_rng(7)
    r = np.sqrt(rng.random((20_000, 1)))
    ang = rng.uniform(0, 2 * np.pi, (20_000, 1))
    P = r * np.hstack([np.cos(ang), np.sin(ang)])
    P[:2000] /= np.linalg.norm(P[:2000], axis=1)[:, None]  # boundary
    X, Y = P[:10_000], P[10_000:]
    ratio = np.linalg.norm(tau(X) - tau(Y), axis=1) / np.linalg.norm(X - Y, axis=1)
    L = tau.bilipschitz_constant
    assert ratio.max() <= L * (1 + 1e-12)
    assert ratio.min() >= 1 / L * (1 - 1e-12)
    # boundary circle maps to itself
    assert np.allclose(np.linalg.norm(tau(P[:2000]), axis=1), 1.0)


# --- waypoint ---------------------------------------------------------------------


def legs(x, w, y):
    q = geo.spherical_distance
    return q(x, w) + q(w, y)


def test_waypoint_radial():
    w = geo.chord_waypoint(pt(0.5, 0), pt(2, 0))
    assert np.allclose(w.as_array(), [1, 0])
    assert legs(pt(0.5, 0), w, pt(2, 0)) <= math.sqrt(2) * geo.spherical_distance(pt(0.5, 0), pt(2, 0))


def test_waypoint_equality_case():
    x = pt(0, 0)
    w = geo.chord_waypoint(x, INF2)
    assert w.norm() == pytest.approx(1.0)
    assert legs(x, w, INF2) == pytest.approx(math.sqrt(2), abs=1e-15)


def test_waypoint_brute_force():
    x, y = np.array([0.3, 0.4]), np.array([2.0, -1.0])
    w = geo.chord_waypoint(x, y)
    d = y - x
    a, b, c = d @ d, x @ d, x @ x - 1
    cands = [x + t * d for t in ((-b + s * math.sqrt(b * b - a * c)) / a for s in (1, -1))]
    sums = [legs(x, ExtendedPoint.finite(v), y) for v in cands]
    assert legs(x, w, y) == pytest.approx(min(sums), abs=1e-15)
    assert legs(x, w, y) <= math.sqrt(2) * geo.spherical_distance(x, y)


def test_waypoint_preconditions():
    with pytest.raises(ValueError):
        geo.chord_waypoint(pt(1.5, 0), pt(2, 0))
    with pytest.raises(ValueError):
        geo.chord_waypoint(pt(0.5, 0), pt(1, 0))


@settings(max_examples=300, deadline=None)
@given(
    arrays(float, 3, elements=st.floats(-1, 1)),
    arrays(float, 3, elements=st.floats(-50, 50)),
)
def test_waypoint_bound_property(x, y):
    if not np.linalg.norm(x) < 0.999 or not np.linalg.norm(y) > 1.001:
        return
    w = geo.chord_waypoint(x, y)
    assert abs(w.norm() - 1) < 1e-12
    assert legs(x, w, y) <= math.sqrt(2) * geo.spherical_distance(x, y) * (1 + 1e-12)
