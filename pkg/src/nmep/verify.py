"""Self-verification suites run by ``nmep verify``.

Each check measures one invariant and compares it with a fixed tolerance.
The ``quick`` suite uses small reservoirs and finishes in well under a
minute. The ``full`` suite adds the large-N trajectory comparisons.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import dynamics, eigen, model, revivals, spectra
from .special import digamma

EULER_GAMMA = 0.5772156649015329


@dataclass
class Check:
    name: str
    measured: float
    tolerance: float
    passed: bool

    def as_dict(self):
        return asdict(self)


def _le(name, measured, tol):
    measured = float(measured)
    return Check(name, measured, float(tol), bool(measured <= tol))


def _model_checks():
    c = model.SystemConfig.from_gamma(0.0035, 0.002, 201)
    g = model.coupling_for_rate(model.derive_rates(c)[0], c.delta_omega)
    yield _le("model.rate_round_trip", abs(g - c.coupling) / c.coupling, 1e-14)
    m = model.build_matrix(model.SystemConfig(delta_omega=2.0 ** -9, coupling=0.01, n_modes=9)).dense()
    mask = np.ones_like(m, bool)
    mask[0, :] = mask[:, 0] = False
    np.fill_diagonal(mask, False)
    yield _le("model.arrowhead_zeros", np.count_nonzero(m[mask]), 0)
    yield _le("model.equidistant", np.max(np.abs(np.diff(np.diag(m)[1:]) - 2.0 ** -9)), 0)


def _eigen_checks(n_modes=201):
    c = model.SystemConfig.from_gamma(0.0035, 0.002, n_modes)
    dw = c.delta_omega
    tag = f"[N={n_modes - 1}]"
    fin = eigen.decompose(c, "finite")
    den = eigen.decompose(c, "dense")
    yield _le("eigen.finite_vs_dense" + tag, np.max(np.abs(fin.omega_tilde - den.omega_tilde)) / dw, 1e-10)
    yield _le("eigen.pole_sum_residual" + tag, np.max(np.abs(eigen.eigen_residual(fin.omega_tilde, c))), 1e-9)
    yield _le("eigen.weights_vs_dense" + tag, np.max(np.abs(fin.weight - den.weight)), 1e-8)
    yield _le("eigen.orthonormality" + tag, np.max(np.abs(den.vectors.T @ den.vectors - np.eye(len(den)))), 1e-10)
    inf = eigen.decompose(c, "infinite")
    s = inf.weight_sum()
    yield _le("eigen.weight_sum_default_truncation" + tag, max(0.99 - s, s - 1.0, 0.0), 0.0)
    k = np.arange(1, 51)
    a_p = eigen.solve_alpha_infinite(k, c.gamma, dw)
    a_m = eigen.solve_alpha_infinite(-k, c.gamma, dw)
    yield _le("eigen.antisymmetry" + tag, np.max(np.abs(a_p + a_m)), 1e-13)
    yield _le("eigen.infinite_residual" + tag, np.max(np.abs(inf.residual)) / dw, 1e-14)
    yield _le("eigen.digamma_at_1" + tag, abs(digamma(1.0) + EULER_GAMMA), 1e-13)


def _dynamics_checks(rk4_modes=61, markov_modes=2001):
    c = model.SystemConfig.from_gamma(0.0035, 0.002, 201)
    t = dynamics.time_grid(c, 2 * c.revival_time, samples_per_period=400)
    tr = dynamics.evolve_eigenbasis(c, t, store_reservoir=True)
    yield _le("dynamics.eigenbasis_norm", np.max(np.abs(tr.norm - 1)), 1e-10)

    c = model.SystemConfig.from_gamma(0.0035, 0.002, rk4_modes)
    t = dynamics.time_grid(c, 2 * c.revival_time, samples_per_period=200)
    eig = dynamics.evolve_eigenbasis(c, t)
    at_bound = dynamics.evolve_rk4(c, t, dt=dynamics.rk4_bound(c))
    yield _le("dynamics.rk4_vs_eigenbasis", np.max(np.abs(at_bound.a - eig.a)), 1e-6)
    default = dynamics.evolve_rk4(c, t)
    yield _le("dynamics.rk4_norm_drift", abs(default.norm[-1] - 1), 1e-8)

    c = model.SystemConfig.from_gamma(0.0035, 0.002, markov_modes)
    t = dynamics.time_grid(c, 0.3 * c.revival_time)
    a = dynamics.evolve_eigenbasis(c, t).a
    yield _le("dynamics.markov_limit", np.max(np.abs(np.abs(a) - np.exp(-c.gamma * t))), 5e-3)


def _revival_checks():
    gamma = 0.0035
    worst = 0.0
    for gt in (0.1, 1.0, 5.0, 20.0):
        t = gt / gamma
        rec = revivals.revival_recurrence_all(20, t, gamma)
        for n in range(21):
            lag = revivals.revival_amplitude(n, t, gamma)
            tol = 1e-10 if (n == 20 and gt == 20.0) else 1e-12
            worst = max(worst, abs(lag - rec[n]) / max(abs(lag), 1e-300) * (1e-12 / tol))
    yield _le("revivals.laguerre_vs_recurrence", worst, 1e-12)
    worst = 0.0
    for n in range(6):
        for gt in (0.0, 0.5, 1.0, 2.5, 5.0):
            worst = max(worst, abs(revivals.revival_quadrature(n, gt / gamma, gamma)
                                   - revivals.revival_amplitude(n, gt / gamma, gamma)))
    yield _le("revivals.quadrature", worst, 1e-8)
    bad = 0
    for n in range(21):
        info = revivals.jordan_analysis(revivals.ep_matrix(n, gamma))
        bad += (info.eigenvalue != -gamma or info.algebraic_multiplicity != n + 1
                or info.geometric_multiplicity != 1 or info.nilpotency_index != n + 1)
    yield _le("revivals.jordan_structure_mismatches", bad, 0)
    t = np.linspace(0, 10 / gamma, 201)
    m = revivals.ep_matrix(6, gamma)
    sol = revivals.integrate_ep_chain(m, t, dt=0.002 / gamma)
    ref = np.array([revivals.revival_amplitude(n, t, gamma) for n in range(7)]).T
    yield _le("revivals.ep_chain_rk4", np.max(np.abs(sol - ref)), 1e-9)
    t = np.linspace(0, 20 / gamma, 801)
    worst_a = max(revivals.ep_chain_residual(n, gamma, t) for n in range(11))
    worst_fd = max(revivals.ep_chain_residual(n, gamma, t, "finite-difference") for n in range(11))
    yield _le("revivals.chain_residual_analytic", worst_a / gamma, 1e-10)
    yield _le("revivals.chain_residual_fd", worst_fd / gamma, 1e-6)


def _spectra_checks(window_modes=1001):
    gamma = 0.0071
    w = spectra.omega_grid(25 * gamma, gamma / 200)
    even = max(np.max(np.abs(s.values - s.values[::-1])) / np.max(np.abs(s.values))
               for s in (spectra.analytic_spectrum(n, w, gamma) for n in range(11)))
    yield _le("spectra.evenness", even, 1e-12)
    lor = gamma / math.pi / (w ** 2 + gamma ** 2)
    s0 = spectra.analytic_spectrum(0, w, gamma).values
    yield _le("spectra.s0_lorentzian", np.max(np.abs(s0 - lor) / lor), 1e-12)
    norm = max(abs(spectra.spectrum_integral(n, gamma) - (n == 0)) for n in range(11))
    yield _le("spectra.normalization", norm, 1e-6)
    unstable = 0
    counts = {}
    for n in (3, 5):
        coarse = spectra.find_peaks(spectra.analytic_spectrum(n, w, gamma)).count
        fine = spectra.find_peaks(spectra.analytic_spectrum(
            n, spectra.omega_grid(25 * gamma, gamma / 400), gamma)).count
        unstable += coarse != fine
        counts[n] = fine
    yield _le("spectra.peak_count_stability", unstable, 0)
    yield _le("spectra.peak_count_nondecreasing", max(counts[3] - counts[5], 0), 0)
    widths, _ = spectra.fwhm_scaling(range(1, 7), gamma)
    yield _le("spectra.fwhm_monotone_violations", int(np.sum(np.diff(widths) >= 0)), 0)

    c = model.SystemConfig.from_gamma(gamma, 0.002, window_modes)
    T = c.revival_time
    traj = dynamics.evolve_eigenbasis(c, dynamics.time_grid(c, 5 * T))
    worst = 0.0
    for n in (3, 5):
        num = spectra.find_peaks(spectra.windowed_spectrum(traj, ((n - 1) * T, n * T), w, gamma))
        ana = spectra.find_peaks(spectra.analytic_spectrum(n, w, gamma))
        worst = max(worst, abs(num.dominant().omega - ana.dominant().omega) / (w[1] - w[0]))
    yield _le("spectra.windowed_dominant_peak_offset_in_spacings", worst, 1.0)


def _trajectory_checks():
    gamma, dw = 0.0035, 0.002
    errors = []
    for n_modes in (4001, 8001):
        c = model.SystemConfig.from_gamma(gamma, dw, n_modes)
        t = dynamics.time_grid(c, 3 * c.revival_time)
        a = dynamics.evolve_eigenbasis(c, t).a
        errors.append(float(np.max(np.abs(a - revivals.reconstruct(t, c, 3)))))
        if n_modes == 4001:
            p = np.abs(a) ** 2
            T = c.revival_time
            idx = np.flatnonzero((p[1:-1] > p[:-2]) & (p[1:-1] > p[2:])) + 1
            offsets = [np.min(np.abs(t[idx] - m * T)) / T for m in (1, 2)]
            yield _le("dynamics.revival_timing_within_0.02TR", max(offsets), 0.02)
            # |a_1(tau)|^2 = 4 gamma^2 tau^2 exp(-2 gamma tau) peaks at tau = 1/gamma
            first = idx[np.argmin(np.abs(t[idx] - (T + 1 / gamma)))]
            yield _le("dynamics.first_revival_peak_at_TR_plus_1_over_gamma",
                      abs(t[first] - (T + 1 / gamma)) / T, 2e-3)
    yield _le("trajectory.reconstruction_error_N4000", errors[0], 5e-3)
    yield _le("trajectory.error_decreases_with_N", errors[1] - errors[0], 0.0)


def run_suite(suite: str = "quick") -> list[Check]:
    if suite not in ("quick", "full"):
        raise ValueError(f"unknown suite {suite!r}")
    checks = list(_model_checks())
    checks += list(_eigen_checks())
    if suite == "quick":
        checks += list(_dynamics_checks())
        checks += list(_revival_checks())
        checks += list(_spectra_checks())
    else:
        checks += list(_eigen_checks(401))
        checks += list(_dynamics_checks(rk4_modes=401, markov_modes=4001))
        checks += list(_revival_checks())
        checks += list(_spectra_checks(window_modes=4001))
        checks += list(_trajectory_checks())
    return checks
