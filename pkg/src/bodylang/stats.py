"""Student's t distribution from first principles.

The critical-value lookup inverts the t CDF by bisection on the regularized
incomplete beta function, which is evaluated with a Lentz continued fraction.
Self-contained on purpose: the analysis pipeline carries no numeric-library
dependency, and tests can cross-check it against an independent
arbitrary-precision oracle.
"""

from __future__ import annotations

import math

from .errors import BadRequestError

_CF_EPS = 3e-15
_CF_FPMIN = 1e-300
_CF_MAX_ITER = 300


def _beta_cf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_FPMIN:
        d = _CF_FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_FPMIN:
            d = _CF_FPMIN
        c = 1.0 + aa / c
        if abs(c) < _CF_FPMIN:
            c = _CF_FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_FPMIN:
            d = _CF_FPMIN
        c = 1.0 + aa / c
        if abs(c) < _CF_FPMIN:
            c = _CF_FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if a <= 0 or b <= 0:
        raise BadRequestError("incomplete beta requires a, b > 0")
    if not 0.0 <= x <= 1.0:
        raise BadRequestError("incomplete beta requires x in [0, 1]")
    if x == 0.0 or x == 1.0:
        return x
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    # use the fraction on whichever side converges fast, mirror the other
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, 1.0 - x) / b


def student_t_sf(t: float, df: int) -> float:
    """Upper-tail probability P(T_df > t)."""
    if df < 1:
        raise BadRequestError("degrees of freedom must be >= 1")
    if t == 0.0:
        return 0.5
    x = df / (df + t * t)
    tail = 0.5 * regularized_incomplete_beta(df / 2.0, 0.5, x)
    return tail if t > 0 else 1.0 - tail


def student_t_cdf(t: float, df: int) -> float:
    return 1.0 - student_t_sf(t, df)


def t_critical(df: int, one_tailed_p: float, tolerance: float = 1e-6) -> float:
    """Value t0 with P(T_df > t0) = p, found by bisection.

    Valid for df >= 1 and 0 < p < 0.5 (the upper half); absolute accuracy is
    ``tolerance`` (default well below the 1e-4 contract).
    """
    if df < 1:
        raise BadRequestError("degrees of freedom must be >= 1")
    if not 0.0 < one_tailed_p < 0.5:
        raise BadRequestError("one-tailed p must be in (0, 0.5)")
    lo, hi = 0.0, 2.0
    while student_t_sf(hi, df) > one_tailed_p:
        hi *= 2.0
        if hi > 1e9:
            raise ArithmeticError("t critical bracket expansion failed")
    while hi - lo > tolerance:
        mid = (lo + hi) / 2.0
        if student_t_sf(mid, df) > one_tailed_p:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2.0


def mean(values) -> float:
    values = list(values)
    if not values:
        raise BadRequestError("mean of empty sequence")
    return math.fsum(values) / len(values)


def sample_sd(values) -> float:
    """Standard deviation with the n-1 denominator."""
    values = list(values)
    if len(values) < 2:
        raise BadRequestError("sample sd needs at least 2 values")
    m = mean(values)
    return math.sqrt(math.fsum((v - m) ** 2 for v in values) / (len(values) - 1))
