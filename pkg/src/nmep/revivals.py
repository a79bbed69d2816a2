"""Closed-form revival amplitudes and the exceptional-point cascade.

The n-th revival switches on at t = n T_R and evolves as
a_n(t) = exp(-gamma t) L_n^(-1)(2 gamma t). The vector (a_0, ..., a_n)
obeys a linear ODE whose matrix is a single (n+1)-dimensional Jordan
block.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, asdict
from fractions import Fraction

import numpy as np

from .errors import DomainError, OutOfEnvelopeError, TruncationError
from .dynamics import rk4_linear
from .model import SystemConfig, derive_rates
from .quadrature import fourier_integral


@dataclass
class RevivalSeries:
    order: int
    times: np.ndarray
    values: np.ndarray
    gamma: float


@dataclass
class EPMatrix:
    order_plus_one: int
    gamma: float
    entries: np.ndarray


@dataclass
class JordanInfo:
    eigenvalue: float
    algebraic_multiplicity: int
    geometric_multiplicity: int
    nilpotency_index: int

    def as_dict(self):
        return asdict(self)


def laguerre_gen(n: int, x, alpha: float = -1.0):
    """Generalized Laguerre polynomial L_n^(alpha)(x) by forward recurrence.

    (m+1) L_{m+1} = (2m + 1 + alpha - x) L_m - (m + alpha) L_{m-1},
    seeded with L_0 = 1 and L_1 = 1 + alpha - x.
    """
    if n < 0 or int(n) != n:
        raise DomainError("order must be a non-negative integer")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if n == 0:
        return prev if prev.ndim else float(prev)
    cur = 1.0 + alpha - x
    for m in range(1, n):
        prev, cur = cur, ((2 * m + 1 + alpha - x) * cur - (m + alpha) * prev) / (m + 1)
    return cur if cur.ndim else float(cur)


def laguerre_gen_derivative(n: int, x, alpha: float = -1.0):
    """d/dx L_n^(alpha)(x) = -L_{n-1}^(alpha+1)(x)."""
    if n < 0:
        raise DomainError("order must be non-negative")
    if n == 0:
        return np.zeros_like(np.asarray(x, dtype=float)) + 0.0
    return -laguerre_gen(n - 1, x, alpha + 1.0)


def revival_amplitude(n: int, t, gamma: float):
    """a_n(t) = exp(-gamma t) L_n^(-1)(2 gamma t)."""
    t = np.asarray(t, dtype=float)
    return np.exp(-gamma * t) * laguerre_gen(n, 2 * gamma * t)


def revival_recurrence_all(n_max: int, t, gamma: float) -> np.ndarray:
    """Rows a_0 .. a_{n_max} from a_n = ((n-1)/n) a_{n-1} - (2 gamma t / n) sum_{k<n} a_k."""
    t = np.asarray(t, dtype=float)
    out = np.empty((n_max + 1,) + t.shape)
    out[0] = np.exp(-gamma * t)
    running = out[0].copy()
    for n in range(1, n_max + 1):
        out[n] = (n - 1) / n * out[n - 1] - 2 * gamma * t / n * running
        running = running + out[n]
    return out


def revival_recurrence(n: int, t, gamma: float):
    if n < 0:
        raise DomainError("order must be non-negative")
    res = revival_recurrence_all(n, t, gamma)[n]
    return res if res.ndim else float(res)


def revival_quadrature(n: int, t: float, gamma: float) -> float:
    """a_n(t) from its Fourier integral, evaluated numerically.

    Integrand (gamma/pi) exp(-i w t) (w - i gamma)^n / ((w + i gamma)^n (w^2 + gamma^2)).
    Valid for 0 <= gamma t <= 5 and n <= 5.
    """
    if not (0 <= n <= 5) or not (0 <= gamma * t <= 5):
        raise OutOfEnvelopeError(f"quadrature oracle limited to n <= 5, 0 <= gamma t <= 5 "
                                 f"(got n={n}, gamma t={gamma * t:g})")

    def f(w):
        return gamma / math.pi * ((w - 1j * gamma) / (w + 1j * gamma)) ** n / (w * w + gamma * gamma)

    return float(fourier_integral(f, t, gamma).real)


def reconstruct(times, config: SystemConfig, n_max: int) -> np.ndarray:
    """a(t) = sum_{n <= n_max} theta(t - n T_R) a_n(t - n T_R), with theta(0) = 1."""
    gamma, _, T_R = derive_rates(config)
    t = np.asarray(times, dtype=float)
    if t.size and n_max < math.floor(t.max() / T_R):
        raise TruncationError(f"n_max={n_max} too small for t_max={t.max():g} "
                              f"(needs >= {math.floor(t.max() / T_R)})")
    out = np.zeros_like(t)
    for n in range(n_max + 1):
        shifted = t - n * T_R
        on = shifted >= 0
        if np.any(on):
            out[on] += revival_amplitude(n, shifted[on], gamma)
    return out


def revival_series(n: int, times, gamma: float) -> RevivalSeries:
    t = np.asarray(times, dtype=float)
    return RevivalSeries(order=n, times=t, values=revival_amplitude(n, t, gamma), gamma=gamma)


def ep_matrix(n: int, gamma: float) -> EPMatrix:
    """(n+1)x(n+1) chain matrix: -gamma on the diagonal, -2 gamma below it."""
    if n < 0:
        raise DomainError("order must be non-negative")
    m = np.tril(np.full((n + 1, n + 1), -2.0 * gamma), -1)
    np.fill_diagonal(m, -gamma)
    return EPMatrix(order_plus_one=n + 1, gamma=gamma, entries=m)


def integrate_ep_chain(matrix: EPMatrix, times, dt: float) -> np.ndarray:
    """RK4 solution of d/dt (a_0..a_n) = M (a_0..a_n) with a(0) = (1, 0, ..., 0).

    Returns an array of shape (len(times), n+1).
    """
    M = matrix.entries
    x0 = np.zeros(matrix.order_plus_one)
    x0[0] = 1.0
    rows = [x.real for x in rk4_linear(lambda x: M @ x, x0, times, dt)]
    return np.array(rows)


def ep_chain_residual(n: int, gamma: float, times, method: str = "analytic",
                      step: float | None = None) -> float:
    """max_t |da_n/dt + gamma a_n + 2 gamma sum_{k<n} a_k|.

    ``analytic`` differentiates the closed form through
    dL_n^(-1)/dx = -L_{n-1}^(0)(x); ``finite-difference`` uses a central
    difference with step 1e-6/gamma by default.
    """
    t = np.asarray(times, dtype=float)
    if method == "analytic":
        x = 2 * gamma * t
        deriv = -gamma * revival_amplitude(n, t, gamma) \
            + np.exp(-gamma * t) * 2 * gamma * laguerre_gen_derivative(n, x)
    elif method == "finite-difference":
        h = 1e-6 / gamma if step is None else step
        deriv = (revival_amplitude(n, t + h, gamma) - revival_amplitude(n, t - h, gamma)) / (2 * h)
    else:
        raise ValueError(f"unknown method {method!r}")
    lower = sum((revival_amplitude(k, t, gamma) for k in range(n)), np.zeros_like(t))
    res = deriv + gamma * revival_amplitude(n, t, gamma) + 2 * gamma * lower
    return float(np.max(np.abs(res)))


def _exact(v):
    return Fraction(float(v))


def _matmul(a, b):
    n = len(a)
    return [[sum((a[i][k] * b[k][j] for k in range(n) if a[i][k] and b[k][j]), Fraction(0))
             for j in range(n)] for i in range(n)]


def _rank(rows):
    rows = [r[:] for r in rows]
    rank, cols = 0, len(rows[0]) if rows else 0
    for c in range(cols):
        pivot = next((r for r in range(rank, len(rows)) if rows[r][c] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        for r in range(rank + 1, len(rows)):
            if rows[r][c] != 0:
                f = rows[r][c] / rows[rank][c]
                rows[r] = [x - f * y for x, y in zip(rows[r], rows[rank])]
        rank += 1
    return rank


def jordan_analysis(matrix: EPMatrix) -> JordanInfo:
    """Exact Jordan data of a lower-triangular matrix with a single eigenvalue.

    Works in rational arithmetic on the binary values of the entries, so
    all multiplicities and the nilpotency index are exact.
    """
    entries = matrix.entries
    size = entries.shape[0]
    if np.any(np.triu(entries, 1) != 0):
        raise ValueError("expected a lower-triangular matrix")
    diag = [_exact(v) for v in np.diag(entries)]
    lam = diag[0]
    algebraic = sum(1 for d in diag if d == lam)
    shifted = [[_exact(entries[i, j]) - (lam if i == j else 0) for j in range(size)]
               for i in range(size)]
    geometric = size - _rank(shifted)
    power, index = shifted, 1
    while any(v != 0 for row in power for v in row):
        power = _matmul(power, shifted)
        index += 1
        if index > size + 1:
            index = -1  # not nilpotent: more than one eigenvalue
            break
    return JordanInfo(eigenvalue=float(lam), algebraic_multiplicity=algebraic,
                      geometric_multiplicity=geometric, nilpotency_index=index)
