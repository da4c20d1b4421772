"""Exact angular-momentum coupling coefficients and Legendre polynomials.

Wigner 3-j and 6-j symbols are evaluated from the Racah closed-form sums
using a precomputed log-factorial table with explicit sign tracking.  All
quantum numbers are non-negative integers here (the spin-rotor basis only
needs integer N, S, J, l).  Selection-rule violations return exactly 0.0 so
callers can rely on structural zeros.
"""

import math
from functools import lru_cache

import numpy as np

_MAX_FACT = 64
_LOG_FACT = np.zeros(_MAX_FACT + 1)
for _n in range(2, _MAX_FACT + 1):
    _LOG_FACT[_n] = _LOG_FACT[_n - 1] + math.log(_n)


def _lf(n: int) -> float:
    if n < 0:
        raise ValueError("factorial of a negative integer requested")
    if n > _MAX_FACT:
        raise ValueError(f"log-factorial table exhausted (argument {n} > {_MAX_FACT})")
    return _LOG_FACT[n]


def _check_j(*js: int) -> None:
    for j in js:
        if j != int(j) or j < 0:
            raise ValueError(f"angular momentum must be a non-negative integer, got {j}")


def _triangle_ok(a: int, b: int, c: int) -> bool:
    return abs(a - b) <= c <= a + b


def _log_delta(a: int, b: int, c: int) -> float:
    """log of the triangle coefficient Delta(abc)."""
    return 0.5 * (
        _lf(a + b - c) + _lf(a - b + c) + _lf(-a + b + c) - _lf(a + b + c + 1)
    )


@lru_cache(maxsize=None)
def wigner_3j(j1: int, j2: int, j3: int, m1: int, m2: int, m3: int) -> float:
    """Wigner 3-j symbol (j1 j2 j3; m1 m2 m3) via the Racah sum.

    Returns exactly 0.0 when m1+m2+m3 != 0, when the triangle rule fails,
    or when any |m| exceeds its j.  Negative j raises ValueError.
    """
    _check_j(j1, j2, j3)
    j1, j2, j3, m1, m2, m3 = int(j1), int(j2), int(j3), int(m1), int(m2), int(m3)
    if m1 + m2 + m3 != 0:
        return 0.0
    if abs(m1) > j1 or abs(m2) > j2 or abs(m3) > j3:
        return 0.0
    if not _triangle_ok(j1, j2, j3):
        return 0.0

    log_pref = _log_delta(j1, j2, j3) + 0.5 * (
        _lf(j1 + m1) + _lf(j1 - m1)
        + _lf(j2 + m2) + _lf(j2 - m2)
        + _lf(j3 + m3) + _lf(j3 - m3)
    )
    t_min = max(0, j2 - j3 - m1, j1 - j3 + m2)
    t_max = min(j1 + j2 - j3, j1 - m1, j2 + m2)
    total = 0.0
    for t in range(t_min, t_max + 1):
        log_term = (
            _lf(t)
            + _lf(j3 - j2 + m1 + t)
            + _lf(j3 - j1 - m2 + t)
            + _lf(j1 + j2 - j3 - t)
            + _lf(j1 - m1 - t)
            + _lf(j2 + m2 - t)
        )
        total += (-1.0) ** t * math.exp(log_pref - log_term)
    return (-1.0) ** (j1 - j2 - m3) * total


@lru_cache(maxsize=None)
def wigner_6j(j1: int, j2: int, j3: int, j4: int, j5: int, j6: int) -> float:
    """Wigner 6-j symbol {j1 j2 j3; j4 j5 j6} via the Racah formula.

    Returns exactly 0.0 when any of the four triads violates the triangle
    rule.  Negative arguments raise ValueError.
    """
    _check_j(j1, j2, j3, j4, j5, j6)
    j1, j2, j3 = int(j1), int(j2), int(j3)
    j4, j5, j6 = int(j4), int(j5), int(j6)
    triads = ((j1, j2, j3), (j1, j5, j6), (j4, j2, j6), (j4, j5, j3))
    for a, b, c in triads:
        if not _triangle_ok(a, b, c):
            return 0.0

    log_pref = sum(_log_delta(a, b, c) for a, b, c in triads)
    f1 = j1 + j2 + j3
    f2 = j1 + j5 + j6
    f3 = j4 + j2 + j6
    f4 = j4 + j5 + j3
    g1 = j1 + j2 + j4 + j5
    g2 = j2 + j3 + j5 + j6
    g3 = j3 + j1 + j6 + j4
    t_min = max(f1, f2, f3, f4)
    t_max = min(g1, g2, g3)
    total = 0.0
    for t in range(t_min, t_max + 1):
        log_term = (
            _lf(t - f1) + _lf(t - f2) + _lf(t - f3) + _lf(t - f4)
            + _lf(g1 - t) + _lf(g2 - t) + _lf(g3 - t)
        )
        total += (-1.0) ** t * math.exp(log_pref + _lf(t + 1) - log_term)
    return total


def clebsch_gordan(j1: int, m1: int, j2: int, m2: int, j: int, m: int) -> float:
    """Clebsch-Gordan coefficient <j1 m1 j2 m2 | j m>."""
    if m1 + m2 != m:
        return 0.0
    return (-1.0) ** (j1 - j2 + m) * math.sqrt(2 * j + 1) * wigner_3j(
        j1, j2, j, m1, m2, -m
    )


def legendre_p(lam: int, x: float) -> float:
    """Legendre polynomial P_lam(x) by upward recurrence, |x| <= 1."""
    if lam != int(lam) or lam < 0:
        raise ValueError(f"Legendre order must be a non-negative integer, got {lam}")
    if abs(x) > 1.0:
        raise ValueError(f"Legendre argument out of range: {x}")
    lam = int(lam)
    if lam == 0:
        return 1.0
    p_prev, p = 1.0, x
    for n in range(1, lam):
        p_prev, p = p, ((2 * n + 1) * x * p - n * p_prev) / (n + 1)
    return p
