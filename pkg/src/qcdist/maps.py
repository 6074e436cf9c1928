"""Concrete test mappings with known distortion constants.

Maps act on float arrays of shape ``(N, dim)`` (rows of ``inf`` are the point
at infinity, as in :mod:`qcdist.geometry`) and on single points through
:meth:`QCTestMap.evaluate`.  They can be written down as short strings::

    stretch:a=0.5,n=2      radial stretch x |x|^(a-1)
    stretch:K=2,n=3        same, with a = K^(1/(1-n))
    mobius:re=0.3,im=0.1   planar disk automorphism
    qs:lambda=3            piecewise linear function of the real line
    invconj(stretch:a=0.5,n=2)
    compose(stretch:a=0.5,n=2;mobius:re=0.2,im=0)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo

FIXES_0 = "fixes_0"
FIXES_1 = "fixes_1"
FIXES_INF = "fixes_inf"
BALL_TO_BALL = "ball_to_ball"
ALL_FLAGS = frozenset({FIXES_0, FIXES_1, FIXES_INF, BALL_TO_BALL})


class QCTestMap:
    dim: int
    qc_constant: float
    normalizations: frozenset
    tight: bool = True

    def __call__(self, X) -> np.ndarray:
        raise NotImplementedError

    def evaluate(self, x) -> geo.ExtendedPoint:
        x = geo.as_point(x, self.dim if not isinstance(x, geo.ExtendedPoint) else None)
        if x.dim != self.dim:
            raise ValueError(f"map acts in dimension {self.dim}, point has {x.dim}")
        return geo.ExtendedPoint.from_array(self(x.as_array()[None, :])[0])

    def spec(self) -> str:
        raise NotImplementedError

    def _check(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != self.dim:
            raise ValueError(f"map acts in dimension {self.dim}, got points of dimension {X.shape[-1]}")
        return X


def qc_constant_of_radial_stretch(a: float, n: int) -> float:
    """K = a^(1-n) for x -> x |x|^(a-1) in R^n.

    Radially the derivative is a|x|^(a-1), tangentially |x|^(a-1); the inner
    dilatation a^(1-n) dominates the outer one 1/a.
    """
    if not 0 < a <= 1:
        raise ValueError(f"exponent must lie in (0, 1], got {a}")
    if n < 2:
        raise ValueError("radial stretches are considered for n >= 2")
    return a ** (1 - n)


def lv_qs_constant(lam: float) -> float:
    if not lam > 0:
        raise ValueError(f"slope must be positive, got {lam}")
    return max(lam, 1.0 / lam)


@dataclass(frozen=True)
class RadialStretch(QCTestMap):
    a: float
    n: int = 2

    def __post_init__(self):
        qc_constant_of_radial_stretch(self.a, self.n)

    @property
    def dim(self):
        return self.n

    @property
    def qc_constant(self):
        return qc_constant_of_radial_stretch(self.a, self.n)

    @property
    def normalizations(self):
        return ALL_FLAGS

    def __call__(self, X):
        X = self._check(X)
        Xf, inf = geo._split(X)
        r = np.linalg.norm(Xf, axis=-1)
        with np.errstate(divide="ignore", invalid="ignore"):
            scale = np.where(r > 0, r ** (self.a - 1.0), 0.0)
        out = Xf * scale[..., None]
        return np.where(inf[..., None], np.inf, out)

    def spec(self):
        return f"stretch:a={self.a!r},n={self.n}"


@dataclass(frozen=True)
class MobiusDisk(QCTestMap):
    a: complex = 0j

    def __post_init__(self):
        geo.DiskAutomorphism(self.a)

    dim = 2
    qc_constant = 1.0

    @property
    def normalizations(self):
        flags = {BALL_TO_BALL}
        if self.a == 0:
            flags |= {FIXES_0, FIXES_INF}
        return frozenset(flags)

    def __call__(self, X):
        return geo.DiskAutomorphism(self.a)(self._check(X))

    def spec(self):
        return f"mobius:re={self.a.real!r},im={self.a.imag!r}"


@dataclass(frozen=True)
class UnitInversionConjugate(QCTestMap):
    """iota o g o iota with iota(x) = x / |x|^2."""

    inner: QCTestMap

    @property
    def dim(self):
        return self.inner.dim

    @property
    def qc_constant(self):
        return self.inner.qc_constant

    @property
    def tight(self):
        return self.inner.tight

    @property
    def normalizations(self):
        swap = {FIXES_0: FIXES_INF, FIXES_INF: FIXES_0}
        return frozenset(swap.get(f, f) for f in self.inner.normalizations)

    def __call__(self, X):
        X = self._check(X)
        return geo.unit_inversion_array(self.inner(geo.unit_inversion_array(X)))

    def spec(self):
        return f"invconj({self.inner.spec()})"


@dataclass(frozen=True)
class PiecewiseLinearQS(QCTestMap):
    """x -> x for x >= 0 and slope * x for x < 0.

    Acts on the real line (dimension 1); planar points on the e_1-axis are
    accepted too, which is how the chordal metric of R inside R^2 is probed.
    """

    slope: float

    def __post_init__(self):
        lv_qs_constant(self.slope)

    dim = 1

    @property
    def qc_constant(self):
        return lv_qs_constant(self.slope)

    qs_constant = qc_constant

    @property
    def normalizations(self):
        return frozenset({FIXES_0, FIXES_1, FIXES_INF})

    def __call__(self, X):
        X = np.asarray(X, dtype=float)
        if X.shape[-1] == 2:
            on_axis = (X[..., 1] == 0) | geo.is_inf_row(X)
            if not np.all(on_axis):
                raise ValueError("planar input must lie on the e_1-axis")
            out = self(X[..., :1])
            return np.concatenate([out, np.where(np.isinf(out), np.inf, 0.0)], axis=-1)
        if X.shape[-1] != 1:
            raise ValueError(f"expected points on the real line, got dimension {X.shape[-1]}")
        return np.where(X < 0, self.slope * X, X)

    def ratio(self, x, t):
        """(g(x+t) - g(x)) / (g(x) - g(x-t)), elementwise."""
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        g = lambda v: np.where(v < 0, self.slope * v, v)  # noqa: E731
        return (g(x + t) - g(x)) / (g(x) - g(x - t))

    def spec(self):
        return f"qs:lambda={self.slope!r}"


@dataclass(frozen=True)
class Composition(QCTestMap):
    """Apply ``maps[0]`` first, then ``maps[1]``, and so on."""

    maps: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if not self.maps:
            raise ValueError("empty composition")
        if len({m.dim for m in self.maps}) != 1:
            raise ValueError("composed maps must share a dimension")

    tight = False

    @property
    def dim(self):
        return self.maps[0].dim

    @property
    def qc_constant(self):
        return math.prod(m.qc_constant for m in self.maps)

    @property
    def normalizations(self):
        return frozenset.intersection(*(m.normalizations for m in self.maps))

    def __call__(self, X):
        X = self._check(X)
        for m in self.maps:
            X = m(X)
        return X

    def spec(self):
        return "compose(" + ";".join(m.spec() for m in self.maps) + ")"


# ---------------------------------------------------------------------------
# string grammar


def _split_top(s: str, sep: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in s:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == sep and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return parts


def _kwargs(body: str) -> dict[str, str]:
    out = {}
    for item in filter(None, (s.strip() for s in body.split(","))):
        if "=" not in item:
            raise ValueError(f"expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def parse_map(text: str) -> QCTestMap:
    """Build a map from its compact string form (see module docstring)."""
    s = text.strip()
    for wrapper in ("invconj", "compose"):
        if s.startswith(wrapper + "("):
            if not s.endswith(")"):
                raise ValueError(f"unbalanced parentheses in {text!r}")
            inner = s[len(wrapper) + 1 : -1]
            if wrapper == "invconj":
                return UnitInversionConjugate(parse_map(inner))
            return Composition(tuple(parse_map(p) for p in _split_top(inner, ";")))
    kind, _, body = s.partition(":")
    kw = _kwargs(body)
    try:
        if kind == "stretch":
            n = int(kw.pop("n", 2))
            if "K" in kw:
                a = float(kw.pop("K")) ** (1.0 / (1 - n))
            else:
                a = float(kw.pop("a"))
            m = RadialStretch(a, n)
        elif kind == "identity":
            m = RadialStretch(1.0, int(kw.pop("n", 2)))
        elif kind == "mobius":
            m = MobiusDisk(complex(float(kw.pop("re", 0)), float(kw.pop("im", 0))))
        elif kind == "qs":
            m = PiecewiseLinearQS(float(kw.pop("lambda")))
        else:
            raise ValueError(f"unknown map kind {kind!r}")
    except KeyError as e:
        raise ValueError(f"missing parameter {e} in {text!r}") from None
    if kw:
        raise ValueError(f"unexpected parameters {sorted(kw)} in {text!r}")
    return m
