"""Digamma and trigamma for positive real arguments.

Both shift the argument upward with the functional recurrence until it
reaches `_ASYMPTOTIC_FROM`, then apply the Bernoulli-number asymptotic series
truncated after seven terms.
"""
from __future__ import annotations

import numpy as np

from .errors import DomainError

_ASYMPTOTIC_FROM = 10.0

# B_2k / (2k), k = 1..7
_PSI_COEFFS = (1 / 12, -1 / 120, 1 / 252, -1 / 240, 1 / 132, -691 / 32760, 1 / 12)
# B_2k, k = 1..7
_BERNOULLI = (1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6)


def _as_positive(x):
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError("argument must be positive and finite")
    if np.any(~np.isfinite(arr)):
        raise DomainError("argument must be finite")
    return arr


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _split(a):
    c = 134217729.0 * a  # 2**27 + 1
    hi = c - (c - a)
    return hi, a - hi


def _reciprocal(x):
    """1/x as an unevaluated sum hi + lo."""
    hi = 1.0 / x
    ah, al = _split(hi)
    bh, bl = _split(x)
    p = hi * x
    p_lo = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return hi, ((1.0 - p) - p_lo) / x


def _shift(arr, power):
    """Shift arr to >= _ASYMPTOTIC_FROM, collecting the skipped arguments."""
    x = arr.copy()
    skipped = []
    low = x < _ASYMPTOTIC_FROM
    while np.any(low):
        skipped.append((low, np.where(low, x, 1.0)))
        x[low] += 1.0
        low = x < _ASYMPTOTIC_FROM
    return x, skipped


def digamma(x):
    """psi(x) = d/dx ln Gamma(x) for x > 0 (scalar or array)."""
    arr = _as_positive(x)
    z, skipped = _shift(arr, 1)
    w = 1.0 / (z * z)
    series = np.zeros_like(z)
    for c in reversed(_PSI_COEFFS):
        series = (series + c) * w
    hi = np.log(z) - 0.5 / z - series
    lo = np.zeros_like(hi)
    # compensated subtraction of 1/x_i, largest term last
    for low, xi in reversed(skipped):
        r_hi, r_lo = _reciprocal(xi)
        hi, err = _two_sum(hi, np.where(low, -r_hi, 0.0))
        lo += err - np.where(low, r_lo, 0.0)
    out = hi + lo
    return out if out.ndim else float(out)


def trigamma(x):
    """psi'(x) for x > 0 (scalar or array)."""
    arr = _as_positive(x)
    z, skipped = _shift(arr, 2)
    acc = np.zeros_like(z)
    for low, xi in reversed(skipped):
        acc += np.where(low, xi ** -2.0, 0.0)
    w = 1.0 / (z * z)
    series = np.zeros_like(z)
    for b in reversed(_BERNOULLI):
        series = (series + b) * w
    out = (1.0 / z + 0.5 * w + series / z) + acc
    return out if out.ndim else float(out)
