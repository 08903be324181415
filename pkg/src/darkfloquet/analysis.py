"""Closed-form predictors: Bessel functions, their zeros, resonance positions.

Bessel functions of integer order are implemented in-repo (ascending series
for small arguments, Miller's downward recurrence with normalization above)
so the predictions carry no external numeric dependency and can be tested
against independent oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .tableio import fmt

__all__ = [
    "ResonancePrediction",
    "bessel_j",
    "bessel_zeros",
    "resonance_positions",
    "predictions_csv_text",
]

_MAX_ORDER = 20
_MAX_ARG = 1e4
_SERIES_CUTOFF = 7.0


def _series(n: int, x: float) -> float:
    """Ascending power series; accurate to ~1e-13 absolute for |x| <= 7."""
    half = 0.5 * x
    term = half**n / math.factorial(n)
    total = term
    ratio = -half * half
    k = 0
    while abs(term) > 1e-18 * (1.0 + abs(total)) and k < 200:
        k += 1
        term *= ratio / (k * (n + k))
        total += term
    return total


def _miller(n: int, x: float) -> float:
    """Downward recurrence from above max(n, x), normalized by J0 + 2*sum J_2k = 1."""
    top = max(n, int(x))
    start = top + 26 + int(9.0 * (top + 1) ** (1.0 / 3.0))
    fp = 0.0  # F_{m+1}
    fc = 1e-30  # F_m
    result = 0.0
    norm = 0.0
    for m in range(start, 0, -1):
        fm = (2.0 * m / x) * fc - fp
        fp, fc = fc, fm
        if m - 1 == n:
            result = fc
        if (m - 1) % 2 == 0:
            norm += fc if m - 1 == 0 else 2.0 * fc
        if abs(fc) > 1e250:
            fc *= 1e-250
            fp *= 1e-250
            norm *= 1e-250
            result *= 1e-250
    return result / norm


def _jn(n: int, x: float) -> float:
    """Series/Miller evaluation without the public domain cap."""
    sign = -1.0 if (x < 0 and n % 2) else 1.0
    ax = abs(x)
    if ax <= _SERIES_CUTOFF:
        return sign * _series(n, ax)
    return sign * _miller(n, ax)


def bessel_j(n: int, x: float) -> float:
    """J_n(x) for integer order 0 <= n <= 20, |x| <= 1e4, to ~1e-12 absolute."""
    if not isinstance(n, (int, np.integer)) or not 0 <= n <= _MAX_ORDER:
        raise ValueError(f"order must be an integer in 0..{_MAX_ORDER}, got {n!r}")
    x = float(x)
    if not math.isfinite(x) or abs(x) > _MAX_ARG:
        raise ValueError(f"|x| must be <= {_MAX_ARG:g}, got {x!r}")
    return _jn(int(n), x)


def _derivative(n: int, x: float) -> float:
    if n == 0:
        return -_jn(1, x)
    return 0.5 * (_jn(n - 1, x) - _jn(n + 1, x))


def bessel_zeros(n: int, count: int) -> np.ndarray:
    """First ``count`` positive zeros of J_n, ascending, to ~1e-10.

    Sign changes are bracketed by a coarse march (step 0.5, well below the
    ~pi spacing of consecutive zeros), bisected, then polished with Newton.
    """
    if count < 1 or count > 20:
        raise ValueError(f"count must be in 1..20, got {count}")
    zeros = []
    x = max(float(n), 1e-6)  # J_n > 0 on (0, first zero), which lies above n
    f_prev = bessel_j(n, x)
    step = 0.5
    while len(zeros) < count:
        x_next = x + step
        f_next = bessel_j(n, x_next)
        if f_prev == 0.0:
            zeros.append(x)
        elif f_prev * f_next < 0.0:
            zeros.append(_refine_zero(n, x, x_next))
        x, f_prev = x_next, f_next
    return np.array(zeros[:count])


def _refine_zero(n: int, lo: float, hi: float) -> float:
    f_lo = bessel_j(n, lo)
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        f_mid = bessel_j(n, mid)
        if f_lo * f_mid <= 0.0:
            hi = mid
        else:
            lo, f_lo = mid, f_mid
        if hi - lo < 1e-8:
            break
    root = 0.5 * (lo + hi)
    for _ in range(6):
        f = bessel_j(n, root)
        fp = _derivative(n, root)
        delta = f / fp
        root -= delta
        if abs(delta) < 1e-13 * max(1.0, abs(root)):
            break
    return root


@dataclass(frozen=True)
class ResonancePrediction:
    """Coupling value where an n-photon resonance restores tunneling.

    ``omega0`` is the level spacing n*omega bridged by n drive quanta;
    ``omega2_star`` the boundary coupling that realizes it, i.e. the
    omega1-corrected position sqrt((n*omega)**2 - omega1**2).  The naive
    position omega2 ~ n*omega equals ``omega0``.
    """

    n: int
    omega2_star: float
    omega0: float

    @property
    def omega2_naive(self) -> float:
        return self.omega0


def resonance_positions(omega1: float, omega: float, n_max: int) -> list[ResonancePrediction]:
    """Predicted resonant couplings for photon orders 1..n_max.

    Orders with n*omega <= omega1 have no real solution and are omitted.
    """
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    if omega <= 0 or omega1 < 0:
        raise ValueError("omega must be positive and omega1 non-negative")
    out = []
    for n in range(1, n_max + 1):
        omega0 = n * omega
        if omega0 <= omega1:
            continue
        out.append(ResonancePrediction(n, math.sqrt(omega0**2 - omega1**2), omega0))
    return out


def predictions_csv_text(predictions: list[ResonancePrediction]) -> str:
    from .tableio import csv_text

    rows = [
        [str(p.n), fmt(p.omega0), fmt(p.omega2_naive), fmt(p.omega2_star)]
        for p in predictions
    ]
    return csv_text(["n", "omega0", "omega2_naive", "omega2_star"], rows)
