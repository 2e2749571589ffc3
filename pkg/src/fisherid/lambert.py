"""Real principal branch W0 of the Lambert W function.

``W0(x)`` is the solution ``w >= -1`` of ``w * exp(w) = x`` for ``x >= -1/e``.
The dimension formulas feed it arguments ranging from the branch point up to
~1e30 and beyond, so three regimes are handled separately:

* close to the branch point a series in ``p = sqrt(2 (1 + e x))`` is used, with
  ``1 + e x`` evaluated in double-double arithmetic;
* for moderate ``x`` Halley iteration runs on ``w e^w - x``;
* for large ``x`` Halley iteration runs on ``w + ln w - ln x`` so that nothing
  overflows (this also serves :func:`lambert_w0_log`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = ["LambertResult", "lambert_w0", "lambert_w0_detailed", "lambert_w0_log", "lambert_w0_array"]

BRANCH_POINT = -math.exp(-1.0)
CLAMP_TOLERANCE = 1e-14
MAX_ITER = 50
STEP_TOL = 1e-14

# e split into a double-double pair
_E_HI = math.e
_E_LO = 1.4456468917292502e-16

# Taylor coefficients of W0 around the branch point in powers of p
_BRANCH_SERIES = (
    -1.0,
    1.0,
    -1.0 / 3.0,
    11.0 / 72.0,
    -43.0 / 540.0,
    769.0 / 17280.0,
    -221.0 / 8505.0,
    680863.0 / 43545600.0,
    -1963.0 / 204120.0,
    226287557.0 / 37623398400.0,
)
_SERIES_ONLY_BELOW = 1e-3


@dataclass(frozen=True)
class LambertResult:
    value: float
    iterations: int
    residual: float


def _two_prod(a: float, b: float) -> tuple[float, float]:
    # Dekker's exact product: a*b == hi + lo
    hi = a * b
    c = 134217729.0 * a
    ah = c - (c - a)
    al = a - ah
    c = 134217729.0 * b
    bh = c - (c - b)
    bl = b - bh
    lo = ((ah * bh - hi) + ah * bl + al * bh) + al * bl
    return hi, lo


def _branch_offset(x: float) -> float:
    """Return ``1 + e*x`` accurate to ~1e-32 absolute for x near -1/e."""
    hi, lo = _two_prod(_E_HI, x)
    # hi lies in [-1, -1/2] near the branch point, so 1 + hi is exact
    return (1.0 + hi) + (lo + _E_LO * x)


def _series(p: float) -> float:
    w = 0.0
    for c in reversed(_BRANCH_SERIES):
        w = w * p + c
    return w


def _residual(w: float, x: float) -> float:
    return w * math.exp(w) - x


def _halley_direct(w: float, x: float) -> tuple[float, int]:
    it = 0
    for it in range(1, MAX_ITER + 1):
        ew = math.exp(w)
        f = w * ew - x
        if f == 0.0:
            return w, it
        wp1 = w + 1.0
        if wp1 == 0.0:
            break
        step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w_new = w - step
        if w_new < -1.0:
            w_new = -1.0
        if abs(w_new - w) <= STEP_TOL * max(abs(w_new), 1e-300):
            return w_new, it
        w = w_new
    return w, it


def _halley_log(w: float, log_x: float) -> tuple[float, int]:
    # root of g(w) = w + ln(w) - ln(x), valid for w > 0
    it = 0
    for it in range(1, MAX_ITER + 1):
        g = w + math.log(w) - log_x
        g1 = 1.0 + 1.0 / w
        g2 = -1.0 / (w * w)
        step = g / (g1 - g * g2 / (2.0 * g1))
        w_new = w - step
        if w_new <= 0.0:
            w_new = w / 2.0
        if abs(w_new - w) <= STEP_TOL * abs(w_new):
            return w_new, it
        w = w_new
    return w, it


def _log_guess(log_x: float) -> float:
    l2 = math.log(log_x)
    return log_x - l2 + l2 / log_x


def lambert_w0_detailed(x: float) -> LambertResult:
    """Evaluate W0(x) and report iteration count and residual ``w e^w - x``."""
    x = float(x)
    if math.isnan(x):
        raise DomainError("lambert_w0 of NaN")
    if x == math.inf:
        return LambertResult(math.inf, 0, 0.0)
    if x < BRANCH_POINT - CLAMP_TOLERANCE:
        raise DomainError(f"lambert_w0 argument {x!r} is below -1/e")
    if x == 0.0:
        return LambertResult(0.0, 0, 0.0)

    if x < -0.25:
        q = _branch_offset(x)
        if q <= 0.0:
            return LambertResult(-1.0, 0, _residual(-1.0, x))
        p = math.sqrt(2.0 * q)
        w0 = _series(p)
        if p < _SERIES_ONLY_BELOW:
            return LambertResult(w0, 0, _residual(w0, x))
        w, it = _halley_direct(w0, x)
        return LambertResult(w, it, _residual(w, x))

    if x > 3.0:
        log_x = math.log(x)
        w, it = _halley_log(_log_guess(log_x), log_x)
        res = _residual(w, x) if w < 700.0 else math.nan
        return LambertResult(w, it, res)

    lx = math.log1p(x)
    w0 = lx * (1.0 - math.log1p(lx) / (2.0 + lx))
    w, it = _halley_direct(w0, x)
    return LambertResult(w, it, _residual(w, x))


def lambert_w0(x: float) -> float:
    """Principal branch W0 of the Lambert W function for real ``x >= -1/e``.

    Arguments at most 1e-14 below -1/e are clamped to the branch point and
    return -1. Raises :class:`DomainError` below that.

    >>> lambert_w0(math.e)
    1.0
    """
    return lambert_w0_detailed(x).value


def lambert_w0_log(log_x: float) -> float:
    """W0 evaluated at ``exp(log_x)`` without forming the exponential.

    Useful when the argument would overflow a double.
    """
    log_x = float(log_x)
    if math.isnan(log_x):
        raise DomainError("lambert_w0_log of NaN")
    if log_x == math.inf:
        return math.inf
    if log_x < 700.0:
        return lambert_w0(math.exp(log_x))
    w, _ = _halley_log(_log_guess(log_x), log_x)
    return w


def lambert_w0_array(x) -> np.ndarray:
    """Elementwise :func:`lambert_w0` over an array-like."""
    arr = np.asarray(x, dtype=float)
    flat = [lambert_w0(v) for v in arr.ravel()]
    return np.asarray(flat, dtype=float).reshape(arr.shape)
