"""Eigenfrequencies and oscillator weights of the coupled system.

Eigenfrequencies are written as omega_tilde = carrier + k*delta_omega + alpha.
Interlacing puts exactly one root in every gap between neighbouring
reservoir frequencies. The ``k >= 0`` roots are labelled by the gap
(k, k+1) and have 0 < alpha < delta_omega. The ``k < 0`` roots are labelled
by (k-1, k) and have -delta_omega < alpha < 0. This makes alpha_{-k} = -alpha_k.
The gap (-1, 0) is then left without a label of its own, so its root is the
mirror of the k = 0 root and is stored as a second k = 0 mode with
alpha = -alpha_0. A spectrum of N + 1 reservoir modes therefore has N + 2
roots: two at k = 0 and one for every other |k| <= N/2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import PoleError, SolverError
from .jacobi import jacobi_eigh
from .model import CoupledSystemMatrix, SystemConfig, build_matrix, derive_rates
from .special import digamma, trigamma

__all__ = [
    "EigenMode", "EigenDecomposition", "solve_alpha_infinite", "solve_alpha_finite",
    "digamma", "trigamma", "mode_weight", "exact_weight", "diagonalize_oracle",
    "eigen_residual", "decompose", "default_k_max",
]


@dataclass(frozen=True)
class EigenMode:
    k: int
    omega_tilde: float
    alpha: float
    weight: float


@dataclass
class EigenDecomposition:
    """Eigenmodes ordered by increasing eigenfrequency.

    `vectors` holds the full eigenvector matrix (columns) when the dense
    oracle produced the decomposition; row 0 is the oscillator component.
    """

    k: np.ndarray
    omega_tilde: np.ndarray
    alpha: np.ndarray
    weight: np.ndarray
    method: str
    residual: Optional[np.ndarray] = None
    vectors: Optional[np.ndarray] = None

    def __len__(self):
        return self.k.size

    @property
    def modes(self) -> list[EigenMode]:
        return [EigenMode(int(k), float(w), float(a), float(h))
                for k, w, a, h in zip(self.k, self.omega_tilde, self.alpha, self.weight)]

    def weight_sum(self) -> float:
        return float(np.sum(self.weight))


def _side(k, side):
    k = np.asarray(k)
    if side is None:
        return np.where(k >= 0, 1, -1)
    side = np.broadcast_to(np.asarray(side), k.shape)
    if np.any((k > 0) & (side < 0)) or np.any((k < 0) & (side > 0)):
        raise ValueError("side must be +1 for k > 0 and -1 for k < 0")
    return side


def _bisect(f, lo, hi, fprime=None, max_iter=200):
    """Vectorized bisection for increasing f with f(lo) < 0 < f(hi).

    The endpoints themselves are never evaluated. Runs until the bracket
    cannot be split further, then takes one Newton step that is accepted only
    if it stays inside the bracket and lowers |f|.
    """
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        active = (mid > lo) & (mid < hi)
        if not np.any(active):
            break
        fm = f(mid)
        lo = np.where(active & (fm < 0), mid, lo)
        hi = np.where(active & (fm > 0), mid, hi)
        hit = active & (fm == 0)
        lo = np.where(hit, mid, lo)
        hi = np.where(hit, mid, hi)
    x = 0.5 * (lo + hi)
    if fprime is None:
        return x
    fx = f(x)
    with np.errstate(invalid="ignore", divide="ignore"):
        xn = x - fx / fprime(x)
    ok = np.isfinite(xn) & (xn >= lo) & (xn <= hi)
    xn = np.where(ok, xn, x)
    better = ok & (np.abs(f(xn)) < np.abs(fx))
    return np.where(better, xn, x)


def _bracket(side):
    eps = 0.0
    lo = np.where(side > 0, eps, -1.0)
    hi = np.where(side > 0, 1.0, -eps)
    return lo, hi


def _infinite_residual(alpha, k, gamma, dw):
    return alpha - dw / math.pi * np.arctan(gamma / (alpha + k * dw))


def _scalar(v, k):
    return float(v) if np.ndim(k) == 0 else v


def solve_alpha_infinite(k, gamma: float, delta_omega: float, *, side=None):
    """Shift alpha_k of the infinite-reservoir eigenfrequency equation.

    Solves alpha = (delta_omega/pi) arctan(gamma / (alpha + k delta_omega))
    (principal branch) for integer or array `k`. The root lies in
    (0, delta_omega) for k >= 0 and (-delta_omega, 0) for k < 0; pass
    ``side=-1`` with k = 0 for the mirrored root.
    """
    if not (gamma > 0 and delta_omega > 0):
        raise ValueError("gamma and delta_omega must be positive")
    kk = np.asarray(k, dtype=float)
    sd = _side(kk, side)
    dw = float(delta_omega)

    def f(x):
        return (kk + x) * dw - gamma / np.tan(math.pi * x)

    def fp(x):
        return dw + gamma * math.pi / np.sin(math.pi * x) ** 2

    lo, hi = _bracket(sd)
    x = _bisect(f, lo, hi, fp)
    alpha = x * dw
    res = _infinite_residual(alpha, kk, gamma, dw)
    bad = ~(np.abs(res) <= 1e-13 * dw)
    if np.any(bad):
        i = int(np.flatnonzero(bad.ravel())[0])
        raise SolverError(
            f"infinite-N root for k={kk.ravel()[i]:g} not converged: bracket "
            f"[{lo.ravel()[i] * dw:.6e}, {hi.ravel()[i] * dw:.6e}], residual {res.ravel()[i]:.3e}")
    return _scalar(alpha, k)


def _finite_terms(kk, M, gamma, dw):
    def f(x):
        psi = digamma(M + kk + 1 + x) - digamma(M - kk + 1 - x)
        return (kk + x) * dw - gamma / np.tan(math.pi * x) - gamma / math.pi * psi

    def fp(x):
        tri = trigamma(M + kk + 1 + x) + trigamma(M - kk + 1 - x)
        return dw + gamma * math.pi / np.sin(math.pi * x) ** 2 - gamma / math.pi * tri

    return f, fp


def finite_equation_residual(alpha, k, config: SystemConfig):
    """Defect of the digamma form of the finite-N eigenfrequency equation."""
    gamma = derive_rates(config)[0]
    dw = config.delta_omega
    kk = np.asarray(k, dtype=float)
    f, _ = _finite_terms(kk, config.half, gamma, dw)
    return _scalar(f(np.asarray(alpha, dtype=float) / dw), k)


def solve_alpha_finite(k, config: SystemConfig, *, side=None):
    """Shift alpha_k for the finite reservoir of `config` (|k| <= N/2).

    Solves the exact equation
    alpha + k dw = gamma cot(pi alpha/dw)
                   + (gamma/pi) [psi(N/2 + k + 1 + alpha/dw) - psi(N/2 - k + 1 - alpha/dw)]
    by bisection on the Sturm interval. At the band edges |k| = N/2 the
    interval has no pole on its outer side; if the root lies beyond
    |alpha| = dw there, SolverError is raised.
    """
    gamma = derive_rates(config)[0]
    dw = config.delta_omega
    M = config.half
    kk = np.asarray(k, dtype=float)
    if np.any(np.abs(kk) > M) or np.any(kk != np.round(kk)):
        raise ValueError(f"k must be an integer with |k| <= {M}")
    sd = _side(kk, side)
    f, fp = _finite_terms(kk, M, gamma, dw)

    edge = np.abs(kk) == M
    if np.any(edge):
        # the outer end of an edge interval is a regular point of the secular function
        outer = config.carrier + (kk + sd) * dw
        r = np.asarray(eigen_residual(np.where(edge, outer, np.nan)[edge], config))
        wrong = (sd[edge] * r) <= 0
        if np.any(wrong):
            i = int(np.flatnonzero(wrong)[0])
            raise SolverError(
                f"edge root k={kk[edge][i]:g} not bracketed in the Sturm interval; "
                f"residual at the outer end {outer[edge][i]:.6e} is {r[i]:.3e}")

    lo, hi = _bracket(sd)
    x = _bisect(f, lo, hi, fp)
    alpha = x * dw
    res = f(x)
    # the (k + x) dw term limits attainable accuracy to a few ulp of |k| dw
    floor = 1e-12 * dw + 16 * np.finfo(float).eps * np.abs(kk) * dw
    bad = ~(np.abs(res) <= floor)
    if np.any(bad):
        i = int(np.flatnonzero(bad.ravel())[0])
        raise SolverError(
            f"finite-N root for k={kk.ravel()[i]:g} not converged: bracket "
            f"[{lo.ravel()[i] * dw:.6e}, {hi.ravel()[i] * dw:.6e}], residual {res.ravel()[i]:.3e}")
    return _scalar(alpha, k)


def mode_weight(alpha, k, config: SystemConfig):
    """Lorentz-like oscillator weight h_ak^2 of the infinite reservoir.

    weight = (1/pi) gamma dw / ((alpha + k dw)^2 + Gamma^2)
    """
    gamma, Gamma, _ = derive_rates(config)
    dw = config.delta_omega
    detuning = np.asarray(alpha) + np.asarray(k) * dw
    w = gamma * dw / math.pi / (detuning ** 2 + Gamma ** 2)
    return _scalar(w, np.asarray(alpha) + np.asarray(k))


def exact_weight(alpha, k, config: SystemConfig):
    """Exact oscillator weight 1 / (1 + sum_j g^2 / (omega_tilde - omega_j)^2).

    The lattice sum is evaluated in closed form with trigamma functions.
    """
    gamma = derive_rates(config)[0]
    dw = config.delta_omega
    M = config.half
    kk = np.asarray(k, dtype=float)
    x = np.asarray(alpha, dtype=float) / dw
    lattice = (math.pi / np.sin(math.pi * x)) ** 2 - trigamma(M - kk + 1 - x) - trigamma(M + kk + 1 + x)
    return _scalar(1.0 / (1.0 + gamma / (math.pi * dw) * lattice), kk + x)


def eigen_residual(omega_tilde, config: SystemConfig):
    """omega_tilde - carrier - sum_j g^2 / (omega_tilde - omega_j) by direct summation."""
    w = np.atleast_1d(np.asarray(omega_tilde, dtype=float))
    freqs = config.mode_frequencies()
    g2 = config.coupling ** 2
    out = np.empty_like(w)
    for start in range(0, w.size, 256):
        chunk = w[start:start + 256]
        diff = chunk[:, None] - freqs[None, :]
        if np.any(diff == 0):
            raise PoleError("evaluation exactly at a reservoir frequency")
        out[start:start + 256] = chunk - config.carrier - g2 * np.sum(1.0 / diff, axis=1)
    return out if np.ndim(omega_tilde) else float(out[0])


def label_modes(omega_tilde, config: SystemConfig):
    """Assign (k, alpha) labels to sorted eigenfrequencies of the finite system."""
    w = np.asarray(omega_tilde, dtype=float) - config.carrier
    dw = config.delta_omega
    M = config.half
    k = np.where(w >= 0, np.floor(w / dw), np.ceil(w / dw))
    k = np.clip(k, -M, M).astype(int)
    return k, w - k * dw


def diagonalize_oracle(matrix: CoupledSystemMatrix, config: Optional[SystemConfig] = None,
                       tol=1e-12, max_sweeps=60) -> EigenDecomposition:
    """Brute-force decomposition by cyclic Jacobi on the dense matrix.

    When `config` is given, modes are labelled by (k, alpha); otherwise k is
    the position in the sorted spectrum and alpha is NaN.
    """
    if matrix.dimension > 5000:
        raise ValueError("dense oracle limited to dimension <= 5000")
    w, V = jacobi_eigh(matrix.dense(), tol=tol, max_sweeps=max_sweeps)
    # fix the sign convention h_ak >= 0
    V = V * np.where(V[0] < 0, -1.0, 1.0)
    if config is not None:
        k, alpha = label_modes(w, config)
    else:
        k, alpha = np.arange(w.size), np.full(w.size, np.nan)
    return EigenDecomposition(k=k, omega_tilde=w, alpha=alpha, weight=V[0] ** 2,
                              method="dense-oracle", vectors=V)


def default_k_max(gamma: float, delta_omega: float) -> int:
    """Truncation |k| <= K with K = ceil(200 gamma / dw): neglected weight < 1%."""
    return int(math.ceil(200.0 * gamma / delta_omega))


def decompose(config: SystemConfig, method: str = "finite", k_max: Optional[int] = None
              ) -> EigenDecomposition:
    """Eigenmodes of `config` by one of three routes.

    ``finite``    roots of the exact finite-N equation with exact weights
    ``infinite``  infinite-reservoir roots for |k| <= k_max, Lorentz-like weights
    ``dense``     cyclic Jacobi on the dense matrix
    """
    dw = config.delta_omega
    if method == "dense":
        dec = diagonalize_oracle(build_matrix(config), config)
        dec.residual = eigen_residual(dec.omega_tilde, config)
        return dec
    if method == "finite":
        M = config.half
        pos = np.arange(0, M + 1)
        k = np.concatenate((-pos[::-1], pos))
        side = np.concatenate((-np.ones(M + 1, int), np.ones(M + 1, int)))
        alpha = solve_alpha_finite(k, config, side=side)
        weight = exact_weight(alpha, k, config)
        residual = finite_equation_residual(alpha, k, config)
        tag = "transcendental-finite"
    elif method == "infinite":
        gamma = derive_rates(config)[0]
        K = default_k_max(gamma, dw) if k_max is None else int(k_max)
        if K < 0:
            raise ValueError("k_max must be non-negative")
        pos = np.arange(0, K + 1)
        k = np.concatenate((-pos[::-1], pos))
        side = np.concatenate((-np.ones(K + 1, int), np.ones(K + 1, int)))
        alpha = solve_alpha_infinite(k, gamma, dw, side=side)
        weight = mode_weight(alpha, k, config)
        residual = _infinite_residual(alpha, k, gamma, dw)
        tag = "transcendental-infinite"
    else:
        raise ValueError(f"unknown method {method!r}")
    omega = config.carrier + k * dw + alpha
    return EigenDecomposition(k=k, omega_tilde=omega, alpha=alpha, weight=weight,
                              method=tag, residual=residual)
