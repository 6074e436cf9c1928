"""Chordal metric and conformal primitives on the extended space R^n + {oo}.

Two layers live here.  The array functions (``q_array``, ``lift_array``,
``invert_array``, ``chord_waypoint_array``) work on float arrays of shape
``(..., n)`` where a row made entirely of ``inf`` stands for the point at
infinity; they are what the samplers in :mod:`qcdist.verify` use.  The scalar
functions take :class:`ExtendedPoint` values (or anything :func:`as_point`
accepts) and are thin wrappers over the array layer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

#: Finite coordinates above this magnitude are rejected; keeps |x|^2 finite.
MAGNITUDE_CAP = 1e150


@dataclass(frozen=True)
class ExtendedPoint:
    """A point of R^n, or the point at infinity (``coords is None``)."""

    coords: tuple[float, ...] | None
    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dimension must be >= 1, got {self.dim}")
        if self.coords is not None:
            if len(self.coords) != self.dim:
                raise ValueError("coordinate count does not match dimension")
            for c in self.coords:
                if not math.isfinite(c):
                    raise ValueError("finite points need finite coordinates")
                if abs(c) > MAGNITUDE_CAP:
                    raise ValueError(f"coordinate {c!r} exceeds magnitude cap {MAGNITUDE_CAP:g}")

    @classmethod
    def finite(cls, coords: Sequence[float]) -> "ExtendedPoint":
        coords = tuple(float(c) for c in np.ravel(coords))
        return cls(coords, len(coords))

    @classmethod
    def infinity(cls, dim: int) -> "ExtendedPoint":
        return cls(None, dim)

    @classmethod
    def from_array(cls, arr) -> "ExtendedPoint":
        arr = np.asarray(arr, dtype=float).ravel()
        if np.isinf(arr).any():
            return cls.infinity(arr.size)
        return cls.finite(arr)

    @property
    def is_infinite(self) -> bool:
        return self.coords is None

    def as_array(self) -> np.ndarray:
        if self.coords is None:
            return np.full(self.dim, np.inf)
        return np.array(self.coords, dtype=float)

    def norm(self) -> float:
        if self.coords is None:
            return math.inf
        return math.hypot(*self.coords)

    def __repr__(self):
        if self.coords is None:
            return f"ExtendedPoint(inf, dim={self.dim})"
        return f"ExtendedPoint({list(self.coords)})"


PointLike = Union[ExtendedPoint, Sequence[float], np.ndarray, float]


def as_point(x: PointLike, dim: int | None = None) -> ExtendedPoint:
    """Coerce ``x`` to an ExtendedPoint.

    The string ``"inf"`` and the float ``inf`` need ``dim`` to be given.
    """
    if isinstance(x, ExtendedPoint):
        pt = x
    elif isinstance(x, str) and x.strip().lower() in ("inf", "infinity", "oo"):
        if dim is None:
            raise ValueError("dimension required for the point at infinity")
        pt = ExtendedPoint.infinity(dim)
    elif np.ndim(x) == 0 and math.isinf(float(x)):
        if dim is None:
            raise ValueError("dimension required for the point at infinity")
        pt = ExtendedPoint.infinity(dim)
    else:
        pt = ExtendedPoint.from_array(x)
    if dim is not None and pt.dim != dim:
        raise ValueError(f"expected dimension {dim}, got {pt.dim}")
    return pt


def infinity(dim: int) -> ExtendedPoint:
    return ExtendedPoint.infinity(dim)


def basis(i: int, dim: int) -> ExtendedPoint:
    """The standard basis vector e_{i+1} (``basis(0, n)`` is e_1)."""
    v = np.zeros(dim)
    v[i] = 1.0
    return ExtendedPoint.finite(v)


def _same_dim(*pts: ExtendedPoint) -> int:
    dims = {p.dim for p in pts}
    if len(dims) != 1:
        raise ValueError(f"dimension mismatch: {sorted(dims)}")
    return dims.pop()


# ---------------------------------------------------------------------------
# array layer


def is_inf_row(X: np.ndarray) -> np.ndarray:
    return np.isinf(X).any(axis=-1)


def _split(X):
    X = np.asarray(X, dtype=float)
    inf = is_inf_row(X)
    Xf = np.where(inf[..., None], 0.0, X)
    return Xf, inf


def q_array(X, Y) -> np.ndarray:
    """Chordal distance between matching rows of ``X`` and ``Y``."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.shape[-1] != Y.shape[-1]:
        raise ValueError(f"dimension mismatch: {X.shape[-1]} vs {Y.shape[-1]}")
    Xf, xi = _split(X)
    Yf, yi = _split(Y)
    sx = np.sqrt(1.0 + np.sum(Xf * Xf, axis=-1))
    sy = np.sqrt(1.0 + np.sum(Yf * Yf, axis=-1))
    d = np.linalg.norm(Xf - Yf, axis=-1)
    out = d / (sx * sy)
    out = np.where(xi & ~yi, 1.0 / sy, out)
    out = np.where(yi & ~xi, 1.0 / sx, out)
    out = np.where(xi & yi, 0.0, out)
    return out


def lift_array(X) -> np.ndarray:
    """Stereographic lift onto the sphere of radius 1/2 centred at (0,...,0,1/2)."""
    Xf, xi = _split(X)
    n2 = np.sum(Xf * Xf, axis=-1)
    den = 1.0 + n2
    top = Xf / den[..., None]
    h = n2 / den
    out = np.concatenate([top, h[..., None]], axis=-1)
    north = np.zeros(out.shape[-1])
    north[-1] = 1.0
    return np.where(xi[..., None], north, out)


def invert_array(X, center, radius: float) -> np.ndarray:
    """Inversion ``c + r^2 (x - c)/|x - c|^2``, with c <-> oo."""
    X = np.asarray(X, dtype=float)
    c = np.asarray(center, dtype=float)
    Xf, xi = _split(X)
    D = Xf - c
    d2 = np.sum(D * D, axis=-1)
    at_center = (d2 == 0.0) & ~xi
    with np.errstate(divide="ignore", invalid="ignore"):
        out = c + radius**2 * D / d2[..., None]
    out = np.where(at_center[..., None], np.inf, out)
    return np.where(xi[..., None], c, out)


def unit_inversion_array(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    return invert_array(X, np.zeros(X.shape[-1]), 1.0)


def chord_waypoint_array(X, Y) -> np.ndarray:
    """Waypoints on the unit sphere for rows with |x| < 1 < |y| (y may be oo).

    Both intersections of the line through x and y with the unit sphere are
    formed; the one seen from the lifts of x and y under the more obtuse angle
    is returned.  By the inscribed angle theorem that is the intersection on
    the shorter arc of the lifted circle, which is where the two chordal legs
    add up to at most sqrt(2) q(x, y).
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    Yf, yi = _split(Y)
    nx = np.linalg.norm(X, axis=-1)
    # y = oo: radial ray through x, or e_1 when x = 0
    e1 = np.zeros(X.shape[-1])
    e1[0] = 1.0
    radial = np.where((nx > 0)[..., None], X, e1)
    D = np.where(yi[..., None], radial, Yf - X)
    a = np.sum(D * D, axis=-1)
    b = np.sum(X * D, axis=-1)
    c = nx * nx - 1.0
    s = np.sqrt(b * b - a * c)
    candidates = []
    for t in ((-b + s) / a, (-b - s) / a):
        W = X + t[..., None] * D
        W = W / np.linalg.norm(W, axis=-1)[..., None]
        candidates.append(W)
    lx = lift_array(X)
    ly = lift_array(Y)
    scores = [np.sum((lx - lift_array(W)) * (ly - lift_array(W)), axis=-1) for W in candidates]
    pick_first = scores[0] <= scores[1]
    return np.where(pick_first[..., None], candidates[0], candidates[1])


# ---------------------------------------------------------------------------
# scalar layer


def spherical_distance(x: PointLike, y: PointLike) -> float:
    """The chordal (spherical) metric q; 1/sqrt(1+|x|^2) against oo."""
    x, y = _coerce_pair(x, y)
    return float(q_array(x.as_array(), y.as_array()))


def _coerce_pair(x, y) -> tuple[ExtendedPoint, ExtendedPoint]:
    try:
        x = as_point(x)
    except ValueError:
        y = as_point(y)
        return as_point(x, y.dim), y
    y = as_point(y) if isinstance(y, ExtendedPoint) else as_point(y, x.dim)
    _same_dim(x, y)
    return x, y


def stereo_lift(x: PointLike) -> np.ndarray:
    x = as_point(x)
    return lift_array(x.as_array())


@dataclass(frozen=True)
class SphereSpec:
    center: ExtendedPoint
    radius: float

    def __post_init__(self):
        if self.center.is_infinite:
            raise ValueError("sphere centre must be finite")
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius}")

    @classmethod
    def of(cls, center, radius: float) -> "SphereSpec":
        return cls(as_point(center), float(radius))


def unit_sphere(dim: int) -> SphereSpec:
    return SphereSpec(ExtendedPoint.finite(np.zeros(dim)), 1.0)


def invert(x: PointLike, s: SphereSpec | None = None) -> ExtendedPoint:
    """Inversion in ``s`` (the unit sphere by default)."""
    x = as_point(x)
    if s is None:
        s = unit_sphere(x.dim)
    _same_dim(x, s.center)
    out = invert_array(x.as_array(), s.center.as_array(), s.radius)
    return ExtendedPoint.from_array(out)


class DiskAutomorphism:
    """z -> (z - a)/(1 - conj(a) z), a Mobius self-map of the unit disk.

    Points are planar; they are identified with complex numbers x1 + i x2.
    """

    def __init__(self, a):
        a = complex(*np.ravel(a)) if np.ndim(a) else complex(a)
        if not abs(a) < 1:
            raise ValueError(f"need |a| < 1, got |a| = {abs(a)}")
        self.a = a

    @property
    def bilipschitz_constant(self) -> float:
        r = abs(self.a)
        return (1 + r) / (1 - r)

    def apply_complex(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        a = self.a
        with np.errstate(divide="ignore", invalid="ignore"):
            out = (z - a) / (1 - np.conj(a) * z)
        pole = (1 - np.conj(a) * z) == 0
        out = np.where(pole, complex(np.inf, np.inf), out)
        at_inf = np.isinf(z)
        if a == 0:
            image_of_inf = complex(np.inf, np.inf)
        else:
            image_of_inf = -1 / np.conj(a)
        return np.where(at_inf, image_of_inf, out)

    def __call__(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != 2:
            raise ValueError("disk automorphisms act on planar points only")
        Xf, inf = _split(X)
        z = np.where(inf, complex(np.inf, np.inf), Xf[..., 0] + 1j * Xf[..., 1])
        with np.errstate(invalid="ignore"):
            w = self.apply_complex(z)
        out = np.stack([w.real, w.imag], axis=-1)
        return np.where(np.isinf(w)[..., None], np.inf, out)


def disk_automorphism(a, x: PointLike) -> ExtendedPoint:
    x = as_point(x)
    if x.dim != 2:
        raise ValueError("disk automorphisms act on planar points only")
    tau = DiskAutomorphism(a)
    return ExtendedPoint.from_array(tau(x.as_array()))


def chord_waypoint(x: PointLike, y: PointLike) -> ExtendedPoint:
    x, y = _coerce_pair(x, y)
    if x.is_infinite or not x.norm() < 1:
        raise ValueError("x must lie inside the unit ball")
    if not y.is_infinite and not y.norm() > 1:
        raise ValueError("y must lie outside the closed unit ball")
    w = chord_waypoint_array(x.as_array()[None, :], y.as_array()[None, :])[0]
    return ExtendedPoint.finite(w)
