"""Explicit Holder-constant bounds for K-quasiconformal maps in the chordal metric.

Everything is computed in log space first; ``BoundValue.value`` is the
exponential when it is representable and ``inf`` otherwise, so comparisons of
large constants (e^106 and the like) should use ``log_value``.

Notation: ``m`` is an upper bound for eta_{K,n}(1), ``lam`` encloses the
Grotzsch constant lambda_n, ``alpha = K^(1/(1-n))`` and ``beta = 1/alpha``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

LN2 = math.log(2.0)
LN16 = math.log(16.0)
LN32 = math.log(32.0)
_MAX_LOG = math.log(float.fromhex("0x1.fffffffffffffp+1023"))

#: K-range on which the improved estimate for eta_{K,n}(1) is stated.
SMALL_K = 1.01


def _exp(x: float) -> float:
    return math.exp(x) if x <= _MAX_LOG else math.inf


@dataclass(frozen=True)
class DistortionParams:
    """Quasiconformality constant K and dimension n, with the Holder exponents."""

    K: float
    n: int

    def __post_init__(self):
        if not (isinstance(self.n, int) and self.n >= 2):
            raise ValueError(f"dimension must be an integer >= 2, got {self.n!r}")
        if not (math.isfinite(self.K) and self.K >= 1):
            raise ValueError(f"K must be a finite real >= 1, got {self.K!r}")

    @property
    def log_beta(self) -> float:
        return math.log(self.K) / (self.n - 1)

    @property
    def beta(self) -> float:
        return self.K ** (1.0 / (self.n - 1))

    @property
    def alpha(self) -> float:
        return 1.0 / self.beta

    @property
    def one_minus_alpha(self) -> float:
        return -math.expm1(-self.log_beta)

    @property
    def beta_minus_one(self) -> float:
        return math.expm1(self.log_beta)

    @property
    def beta_minus_alpha(self) -> float:
        return 2.0 * math.sinh(self.log_beta)


def alpha_of(K: float, n: int) -> float:
    return DistortionParams(K, n).alpha


@dataclass(frozen=True)
class LambdaBounds:
    """An interval [lo, hi] known to contain the Grotzsch constant lambda_n."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (4.0 <= self.lo <= self.hi):
            raise ValueError(f"need 4 <= lo <= hi, got [{self.lo}, {self.hi}]")

    @classmethod
    def for_dimension(cls, n: int) -> "LambdaBounds":
        if n == 2:
            return cls(4.0, 4.0)
        if n < 2:
            raise ValueError("lambda_n is defined for n >= 2")
        return cls(4.0, 2.0 * math.exp(n - 1))


def _lam(p: DistortionParams, lam: Optional[LambdaBounds]) -> LambdaBounds:
    return LambdaBounds.for_dimension(p.n) if lam is None else lam


@dataclass(frozen=True)
class BoundValue:
    value: float
    formula_id: str
    valid: bool = True
    validity_note: str = ""
    log_value: float = 0.0

    @classmethod
    def from_log(cls, log_value: float, formula_id: str, valid: bool = True, note: str = ""):
        return cls(_exp(log_value), formula_id, valid, note, log_value)

    def __float__(self):
        return self.value


# ---------------------------------------------------------------------------
# the distortion function eta_{K,n}


def log_eta_m_bound(p: DistortionParams) -> float:
    """log of the smaller available upper bound for m = eta_{K,n}(1)."""
    K = p.K
    if K == 1.0:
        return 0.0
    general = 4.0 * K * (K + 1.0) * math.sqrt(K - 1.0)
    if K <= SMALL_K:
        improved = (1.0 - K) * math.log(K - 1.0) + 9.0 * (K - 1.0)
        return min(general, improved)
    return general


def eta_m_bound(p: DistortionParams) -> float:
    return _exp(log_eta_m_bound(p))


def log_lambda_power(p: DistortionParams, lam: Optional[LambdaBounds], e: float) -> float:
    """Conservative log(lambda_n ** e).

    For ``e > 0`` this is an upper bound and for ``e < 0`` a lower bound, which is
    the safe direction in every formula below.  Besides the interval endpoint the
    estimate lambda_n^(1-alpha) <= 2^(1-1/K) K is used whenever it is sharper.
    """
    if e == 0:
        return 0.0
    lam = _lam(p, lam)
    endpoint = e * math.log(lam.hi)
    oma = p.one_minus_alpha
    if oma <= 0:
        return endpoint
    ref = (1.0 - 1.0 / p.K) * LN2 + math.log(p.K)
    alt = e / oma * ref
    return min(endpoint, alt) if e > 0 else max(endpoint, alt)


def eta_upper(t: float, p: DistortionParams, lam: Optional[LambdaBounds] = None) -> float:
    """Upper bound for eta_{K,n}(t): m lam^(1-a) t^a below 1, m lam^(b-1) t^b above."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    if t == 0:
        return 0.0
    lm = log_eta_m_bound(p)
    if t <= 1:
        return _exp(lm + log_lambda_power(p, lam, p.one_minus_alpha) + p.alpha * math.log(t))
    return _exp(lm + log_lambda_power(p, lam, p.beta_minus_one) + p.beta * math.log(t))


def eta_inverse_lower(t: float, p: DistortionParams, lam: Optional[LambdaBounds] = None) -> float:
    """Lower bound for the inverse of eta_{K,n} at t."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    if t == 0:
        return 0.0
    ratio = math.log(t) - log_eta_m_bound(p)
    if ratio <= 0:
        return _exp(log_lambda_power(p, lam, -p.beta_minus_one) + p.beta * ratio)
    return _exp(log_lambda_power(p, lam, -p.one_minus_alpha) + p.alpha * ratio)


# ---------------------------------------------------------------------------
# Euclidean constants

M1Func = Callable[[DistortionParams], float]


def m1_default(
    p: DistortionParams, lam: Optional[LambdaBounds] = None, m1: Optional[M1Func] = None
) -> BoundValue:
    """Bound for the ball-to-ball Euclidean Holder constant M_1(K, n).

    The default is m^2 max(lam^(2(1-a)), (2 lam)^(b-a)), obtained from the
    quasisymmetry estimates alone (see README).  ``m1`` substitutes any other
    known bound.
    """
    if m1 is not None:
        v = float(m1(p))
        if not v >= 1:
            raise ValueError(f"M1 override returned {v}; Holder constants here are >= 1")
        return BoundValue(v, "M1:override", True, "caller supplied", math.log(v))
    lm = log_eta_m_bound(p)
    near = log_lambda_power(p, lam, 2.0 * p.one_minus_alpha)
    far = p.beta_minus_alpha * LN2 + log_lambda_power(p, lam, p.beta_minus_alpha)
    return BoundValue.from_log(2.0 * lm + max(near, far), "M1:surrogate")


def m2_hat(
    p: DistortionParams,
    lam: Optional[LambdaBounds] = None,
    R: float = 1.0,
    m1: Optional[M1Func] = None,
) -> BoundValue:
    """M1 * m * lam^(b-1) * R^(b-a), the Holder constant on B^n(R) for maps fixing 0 and 1."""
    if not R >= 1:
        raise ValueError(f"R must be >= 1, got {R}")
    bma = p.beta_minus_alpha
    r_term = 0.0 if bma == 0 else bma * math.log(R)
    lv = (
        m1_default(p, lam, m1).log_value
        + log_eta_m_bound(p)
        + log_lambda_power(p, lam, p.beta_minus_one)
        + r_term
    )
    return BoundValue.from_log(lv, "M2hat")


def theorem_R(p: DistortionParams) -> float:
    """sqrt((1 + 32^(1-b)) / (1 - 32^(1-b))); ``inf`` at K = 1, where it diverges."""
    if p.K == 1.0:
        return math.inf
    x = -p.beta_minus_one * LN32
    t = math.exp(x)
    return math.sqrt((1.0 + t) / -math.expm1(x))


def holder_lift(M: float, gamma: float) -> float:
    """Chordal constant M^(1+2g) (1 + 0.13 (1-g)) from a Euclidean bi-Holder constant M."""
    if not M >= 1:
        raise ValueError(f"M must be >= 1, got {M}")
    if not 0 < gamma <= 1:
        raise ValueError(f"gamma must lie in (0, 1], got {gamma}")
    return M ** (1.0 + 2.0 * gamma) * (1.0 + 0.13 * (1.0 - gamma))


def _log_holder_factor(alpha: float) -> float:
    return math.log1p(0.13 * (1.0 - alpha))


# ---------------------------------------------------------------------------
# chordal constants


def m4_sharp(
    p: DistortionParams, lam: Optional[LambdaBounds] = None, m1: Optional[M1Func] = None
) -> BoundValue:
    """Bound for M_4(K, n) (hence also M_3(K, n)) that tends to 1 as K -> 1."""
    if p.K == 1.0:
        return BoundValue(1.0, "M4:sharp", True, "K = 1 limit", 0.0)
    R = theorem_R(p)
    lv = (
        m2_hat(p, lam, R, m1).log_value
        + 2.0 * p.alpha * log_eta_m_bound(p)
        + log_lambda_power(p, lam, 2.0 * p.one_minus_alpha)
        + _log_holder_factor(p.alpha)
    )
    return BoundValue.from_log(lv, "M4:sharp")


@dataclass(frozen=True)
class CrudeBounds:
    structured: BoundValue
    cap106: BoundValue
    cap138: BoundValue
    cap7: BoundValue

    def caps(self) -> tuple[BoundValue, ...]:
        return (self.cap106, self.cap138, self.cap7)


def m4_crude(p: DistortionParams, lam: Optional[LambdaBounds] = None) -> CrudeBounds:
    """The relaxed forms of the M_4 bound together with their exponential caps.

    ``cap106`` bounds M_4 and ``cap138`` the chordal Holder inequality, both for
    K <= 2; ``cap7`` serves both for K <= 1.01.
    """
    s = math.sqrt(p.K - 1.0)
    le2 = p.K <= 2.0
    structured = (
        4.0 * log_eta_m_bound(p)
        + log_lambda_power(p, lam, 4.0 * p.beta_minus_one)
        + 0.73 * math.sqrt(p.beta_minus_one)
        + _log_holder_factor(p.alpha)
    )
    return CrudeBounds(
        structured=BoundValue.from_log(structured, "M4:crude", le2, "K <= 2 only"),
        cap106=BoundValue.from_log(106.0 * s, "M4:cap106", le2, "K <= 2 only"),
        cap138=BoundValue.from_log(138.0 * s, "q:cap138", le2, "K <= 2 only"),
        cap7=BoundValue.from_log(7.0 * s, "M4:cap7", p.K <= SMALL_K, "K <= 1.01 only"),
    )


def m3_ball(
    p: DistortionParams, lam: Optional[LambdaBounds] = None, m1: Optional[M1Func] = None
) -> BoundValue:
    """M_1^(1+2a) (1.13 - 0.13 a): chordal constant on the unit ball."""
    lv = (1.0 + 2.0 * p.alpha) * m1_default(p, lam, m1).log_value + _log_holder_factor(p.alpha)
    return BoundValue.from_log(lv, "M3:ball")


def m3_global(
    p: DistortionParams, lam: Optional[LambdaBounds] = None, m1: Optional[M1Func] = None
) -> BoundValue:
    """2^(1-a/2) times :func:`m3_ball`; bounded in K but equal to sqrt(2) at K = 1."""
    ball = m3_ball(p, lam, m1)
    factor = 2.0 ** (1.0 - p.alpha / 2.0)
    lv = math.log(factor) + ball.log_value
    value = factor * ball.value if math.isfinite(ball.value) else _exp(lv)
    return BoundValue(value, "M3:global", True, "not asymptotically sharp", lv)


def m1_from_m3(p: DistortionParams, R: float, M3: float) -> BoundValue:
    """Euclidean constant on B^n(R) recovered from a chordal constant M3.

    Returns the quotient M3^(1+2a) / ((1+R)^a - M3^2 R^a) * (1.13 - 0.13 a); it is
    flagged valid only if (1/R + 1)^a > M3^2 and the denominator is positive.
    """
    if not R >= 1:
        raise ValueError(f"R must be >= 1, got {R}")
    a = p.alpha
    cond = (1.0 / R + 1.0) ** a > M3 * M3
    den = (1.0 + R) ** a - M3 * M3 * R**a
    value = M3 ** (1.0 + 2.0 * a) / den * (1.0 + 0.13 * (1.0 - a)) if den != 0 else math.inf
    valid = bool(cond and den > 0)
    notes = []
    if not cond:
        notes.append("(1/R+1)^alpha <= M3^2")
    if not den > 0:
        notes.append("denominator not positive")
    log_value = math.log(value) if value > 0 else math.nan
    return BoundValue(value, "M1:from-M3", valid, "; ".join(notes), log_value)


def bonfert_bound(K: float) -> float:
    """Earlier planar bound 128 * 2^((1-K)/(2K)) for M_4(K, 2); equals 128 at K = 1."""
    if not K >= 1:
        raise ValueError(f"K must be >= 1, got {K}")
    return 128.0 * 2.0 ** ((1.0 - K) / (2.0 * K))


# ---------------------------------------------------------------------------
# quasisymmetric functions of the real line


def aux_radius(R: float) -> float:
    """sqrt((R^3+R-2)/(R^3+R+2)): how far the inverted region reaches from 0."""
    if not R >= 1:
        raise ValueError(f"R must be >= 1, got {R}")
    s = R**3 + R
    return math.sqrt((s - 2.0) / (s + 2.0))


def lehto_constant(K: float) -> float:
    """min(K^(3/2), 2K - 1): qc constant of the extension of a K-qs function."""
    if not K >= 1:
        raise ValueError(f"K must be >= 1, got {K}")
    return min(K**1.5, 2.0 * K - 1.0)


def log_qs_constant(log_R: float, L: float) -> float:
    """log of (1/2) 16^(1-1/L) (R^3 + R + sqrt((R^3+R)^2 - 4)), R given by its log."""
    if log_R < 0:
        raise ValueError("R must be >= 1")
    log_s = 3.0 * log_R + math.log1p(math.exp(-2.0 * log_R))
    root = math.sqrt(max(0.0, -math.expm1(math.log(4.0) - 2.0 * log_s)))
    return -LN2 + (1.0 - 1.0 / L) * LN16 + log_s + math.log1p(root)


@dataclass(frozen=True)
class QSBound:
    constant: BoundValue
    exponent: float
    L: float
    R_up: float
    log_R_up: float


def qs_spherical_bound(K: float) -> QSBound:
    """Chordal Holder constant and exponent 1/L for K-quasisymmetric functions of R."""
    L = lehto_constant(K)
    if L == 1.0:
        return QSBound(BoundValue(1.0, "QS:spherical", True, "K = 1", 0.0), 1.0, 1.0, 1.0, 0.0)
    log_R = min(log_eta_m_bound(DistortionParams(L, 2)), math.pi * (L - 1.0 / L))
    lv = log_qs_constant(log_R, L)
    return QSBound(BoundValue.from_log(lv, "QS:spherical"), 1.0 / L, L, _exp(log_R), log_R)
