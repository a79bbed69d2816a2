"""Time evolution of the oscillator amplitude a(t) and reservoir amplitudes b_j(t).

Initial state: a(0) = 1, b_j(0) = 0. Two independent routes are provided.
Eigenbasis propagation is exact in time. Fixed-step classical RK4 on the
equations of motion serves as a cross-check.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .eigen import EigenDecomposition, decompose
from .errors import FormatError, StepSizeError, UnavailableError
from .model import SystemConfig, build_matrix

RK4_STABILITY = 0.05
DEFAULT_SAMPLES_PER_PERIOD = 2000


@dataclass
class StateTrajectory:
    times: np.ndarray
    a: np.ndarray
    method: str
    b: Optional[np.ndarray] = None
    norm: Optional[np.ndarray] = None
    warnings: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    @property
    def abs2(self) -> np.ndarray:
        return np.abs(self.a) ** 2


def thread_count() -> int:
    value = os.environ.get("NMEP_THREADS")
    if value:
        try:
            return max(1, int(value))
        except ValueError:
            pass
    return os.cpu_count() or 1


def time_grid(config: SystemConfig, t_max: float,
              samples_per_period: int = DEFAULT_SAMPLES_PER_PERIOD) -> np.ndarray:
    """Uniform grid on [0, t_max] with `samples_per_period` points per T_R."""
    if not t_max > 0:
        raise ValueError("t_max must be positive")
    dt = config.revival_time / samples_per_period
    n = int(math.floor(t_max / dt * (1 + 1e-12)))
    return np.arange(n + 1) * dt


def _check_uniform(times) -> tuple[np.ndarray, float]:
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size < 2:
        raise FormatError("time grid needs at least two samples")
    if t[0] < 0:
        raise FormatError("time grid must start at t >= 0")
    steps = np.diff(t)
    h = (t[-1] - t[0]) / (t.size - 1)
    if not h > 0 or np.max(np.abs(steps - h)) > 1e-9 * max(h, abs(t[-1])):
        raise FormatError("time grid must be uniform and increasing")
    return t, h


def _phases(times, omega, coeffs, threads):
    """sum_k coeffs[k, :] exp(-i omega_k t) for every t, chunked over time."""
    out = np.empty((times.size,) + coeffs.shape[1:], dtype=complex)
    chunk = max(1, int(4_000_000 // max(omega.size, 1)))
    spans = [(s, min(s + chunk, times.size)) for s in range(0, times.size, chunk)]

    def work(span):
        s, e = span
        out[s:e] = np.exp(-1j * np.outer(times[s:e], omega)) @ coeffs

    if threads > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, spans))
    else:
        for span in spans:
            work(span)
    return out


def evolve_eigenbasis(config: SystemConfig, times, mode: str = "finite", *,
                      store_reservoir: bool = False, k_max: Optional[int] = None,
                      decomposition: Optional[EigenDecomposition] = None,
                      solver: str = "transcendental") -> StateTrajectory:
    """a(t) = sum_k h_ak^2 exp(-i omega_k t) and b_j(t) = sum_k h_jk h_ak exp(-i omega_k t).

    mode ``finite`` uses the exact finite-N eigenmodes (``solver`` selects
    the transcendental roots or the dense Jacobi oracle). mode ``infinite``
    uses the truncated infinite-reservoir modes and cannot provide b_j.
    """
    t, _ = _check_uniform(times)
    threads = thread_count()
    warnings = []
    if config.coupling == 0:
        a = np.exp(-1j * config.carrier * t)
        b = np.zeros((t.size, config.n_modes), complex) if store_reservoir else None
        traj = StateTrajectory(times=t, a=a, b=b, method="eigenbasis")
        if store_reservoir:
            traj.norm = np.abs(a) ** 2
        traj.info = {"mode": mode, "decoupled": True}
        return traj

    if decomposition is None:
        if mode == "finite":
            decomposition = decompose(config, "dense" if solver == "dense" else "finite")
        elif mode == "infinite":
            decomposition = decompose(config, "infinite", k_max=k_max)
        else:
            raise ValueError(f"unknown mode {mode!r}")
    dec = decomposition
    wsum = dec.weight_sum()
    if wsum < 0.99:
        warnings.append(f"eigenmode weights sum to {wsum:.6f} < 0.99; increase k_max")

    coeffs = dec.weight[:, None]
    if store_reservoir:
        if dec.method == "transcendental-infinite":
            raise UnavailableError("reservoir amplitudes need finite-N eigenvectors")
        if dec.vectors is not None:
            h_a = dec.vectors[0]
            h_j = dec.vectors[1:]
        else:
            h_a = np.sqrt(dec.weight)
            # h_jk = g h_ak / (omega_k - omega_j)
            h_j = config.coupling * h_a[None, :] / (dec.omega_tilde[None, :]
                                                    - config.mode_frequencies()[:, None])
        coeffs = np.column_stack((dec.weight, (h_j * h_a[None, :]).T))

    amps = _phases(t, dec.omega_tilde, coeffs, threads)
    traj = StateTrajectory(times=t, a=amps[:, 0], method="eigenbasis", warnings=warnings)
    if store_reservoir:
        traj.b = amps[:, 1:]
        traj.norm = np.abs(traj.a) ** 2 + np.sum(np.abs(traj.b) ** 2, axis=1)
    traj.info = {"mode": mode, "decomposition": dec.method, "n_eigenmodes": len(dec),
                 "weight_sum": wsum}
    return traj


def rk4_bound(config: SystemConfig) -> float:
    """Largest step allowed by dt * omega_max <= 0.05."""
    w_max = abs(config.carrier) + config.half * config.delta_omega \
        + config.coupling * math.sqrt(config.n_modes)
    return RK4_STABILITY / w_max


def rk4_linear(apply, x0, times, dt):
    """Classical RK4 for dx/dt = apply(x), sampled on a uniform grid.

    Every output interval is split into an integer number of equal steps no
    longer than `dt`, so samples fall exactly on step boundaries.
    Yields the state at each requested time.
    """
    t, h = _check_uniform(times)
    x = np.array(x0, dtype=complex)

    def advance(x, span):
        if span <= 0:
            return x
        n = int(math.ceil(span / dt * (1 - 1e-12)))
        step = span / n
        for _ in range(n):
            k1 = apply(x)
            k2 = apply(x + 0.5 * step * k1)
            k3 = apply(x + 0.5 * step * k2)
            k4 = apply(x + step * k3)
            x = x + step / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        return x

    x = advance(x, t[0])
    yield x
    for _ in range(1, t.size):
        x = advance(x, h)
        yield x


def evolve_rk4(config: SystemConfig, times, dt: Optional[float] = None, *,
               store_reservoir: bool = False) -> StateTrajectory:
    """Direct integration of the equations of motion with classical RK4.

    The default step is half of the stability bound 0.05 / omega_max.
    """
    bound = rk4_bound(config)
    if dt is None:
        dt = 0.5 * bound
    if not dt > 0:
        raise StepSizeError("dt must be positive")
    if dt > bound * (1 + 1e-12):
        raise StepSizeError(f"dt={dt:.6g} exceeds the bound 0.05/omega_max = {bound:.6g}")
    H = build_matrix(config)

    def apply(x):
        return -1j * H.matvec(x)

    x0 = np.zeros(config.n_modes + 1, dtype=complex)
    x0[0] = 1.0
    t, _ = _check_uniform(times)
    a = np.empty(t.size, complex)
    b = np.empty((t.size, config.n_modes), complex) if store_reservoir else None
    norm = np.empty(t.size)
    for i, x in enumerate(rk4_linear(apply, x0, t, dt)):
        a[i] = x[0]
        norm[i] = float(np.vdot(x, x).real)
        if store_reservoir:
            b[i] = x[1:]
    traj = StateTrajectory(times=t, a=a, b=b, method="rk4")
    # the full state is always available to RK4, so the norm is kept regardless
    traj.norm = norm
    traj.info = {"dt": dt, "dt_bound": bound}
    return traj


def total_norm(trajectory: StateTrajectory) -> np.ndarray:
    """|a|^2 + sum_j |b_j|^2 per sample."""
    if trajectory.norm is None:
        raise UnavailableError("trajectory was computed without reservoir amplitudes")
    return trajectory.norm
