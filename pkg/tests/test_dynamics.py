import numpy as np
import pytest

from nmep.dynamics import (evolve_eigenbasis, evolve_rk4, rk4_bound, time_grid, total_norm,
                           thread_count)
from nmep.eigen import decompose
from nmep.errors import FormatError, StepSizeError, UnavailableError
from nmep.model import SystemConfig
from nmep.revivals import reconstruct

GAMMA, DW = 0.0035, 0.002


@pytest.fixture(scope="module")
def rk4_pair():
    c = SystemConfig.from_gamma(GAMMA, DW, 401)
    t = time_grid(c, 2 * c.revival_time, samples_per_period=200)
    eig = evolve_eigenbasis(c, t)
    at_bound = evolve_rk4(c, t, dt=rk4_bound(c))
    half = evolve_rk4(c, t, dt=0.5 * rk4_bound(c))
    return c, eig, at_bound, half


def test_time_grid():
    c = SystemConfig.from_gamma(GAMMA, DW, 11)
    t = time_grid(c, 3 * c.revival_time)
    assert t.size == 6001 and t[0] == 0
    assert t[-1] == pytest.approx(3 * c.revival_time, rel=1e-15)


def test_decoupled_oscillator():
    c = SystemConfig(delta_omega=DW, coupling=0.0, n_modes=21, omega0=1.0, rotating_frame=False)
    t = np.linspace(0, 50, 101)
    tr = evolve_eigenbasis(c, t, store_reservoir=True)
    np.testing.assert_allclose(tr.a, np.exp(-1j * t), atol=1e-15)
    assert np.all(tr.b == 0)
    rk = evolve_rk4(c, t, store_reservoir=True)
    assert np.all(rk.b == 0)
    # lab frame: RK4 truncation of exp(-i t) only
    assert np.max(np.abs(rk.a - np.exp(-1j * t))) < 1e-6
    rot = SystemConfig(delta_omega=DW, coupling=0.0, n_modes=21)
    np.testing.assert_array_equal(evolve_rk4(rot, t).a, np.ones(t.size))


def test_initial_condition_and_unitarity():
    c = SystemConfig.from_gamma(GAMMA, DW, 201)
    t = time_grid(c, 2 * c.revival_time, samples_per_period=500)
    tr = evolve_eigenbasis(c, t, store_reservoir=True)
    assert abs(tr.a[0] - 1) < 1e-14
    assert np.max(np.abs(tr.b[0])) < 1e-14
    norm = total_norm(tr)
    assert abs(norm[0] - 1) < 1e-14
    assert np.max(np.abs(norm - 1)) <= 1e-10


def test_dense_and_transcendental_eigenbases_agree():
    c = SystemConfig.from_gamma(GAMMA, DW, 201)
    t = time_grid(c, 2 * c.revival_time, samples_per_period=200)
    a = evolve_eigenbasis(c, t, store_reservoir=True)
    b = evolve_eigenbasis(c, t, solver="dense", store_reservoir=True)
    assert np.max(np.abs(a.a - b.a)) < 1e-10
    assert np.max(np.abs(a.b - b.b)) < 1e-10


def test_rk4_matches_eigenbasis_at_bound(rk4_pair):
    _, eig, at_bound, _ = rk4_pair
    assert np.max(np.abs(at_bound.a - eig.a)) <= 1e-6


def test_rk4_fourth_order(rk4_pair):
    _, eig, at_bound, half = rk4_pair
    ratio = np.max(np.abs(at_bound.a - eig.a)) / np.max(np.abs(half.a - eig.a))
    assert 12 < ratio < 20


def test_rk4_norm_drift_at_default_step():
    c = SystemConfig.from_gamma(GAMMA, DW, 401)
    t = time_grid(c, 2 * c.revival_time, samples_per_period=50)
    tr = evolve_rk4(c, t)
    assert abs(tr.norm[-1] - 1) <= 1e-8
    assert np.max(np.abs(total_norm(tr) - 1)) <= 1e-8


def test_rk4_step_bound():
    c = SystemConfig.from_gamma(GAMMA, DW, 41)
    with pytest.raises(StepSizeError, match="bound"):
        evolve_rk4(c, [0.0, 1.0], dt=2 * rk4_bound(c))


def test_norm_requires_reservoir():
    c = SystemConfig.from_gamma(GAMMA, DW, 41)
    tr = evolve_eigenbasis(c, [0.0, 1.0])
    with pytest.raises(UnavailableError):
        total_norm(tr)


def test_nonuniform_grid_rejected():
    c = SystemConfig.from_gamma(GAMMA, DW, 41)
    with pytest.raises(FormatError):
        evolve_eigenbasis(c, [0.0, 1.0, 3.0])


def test_infinite_mode_truncation_warning():
    c = SystemConfig.from_gamma(GAMMA, DW, 41)
    tr = evolve_eigenbasis(c, [0.0, 1.0], mode="infinite", k_max=5)
    assert tr.warnings and "k_max" in tr.warnings[0]
    with pytest.raises(UnavailableError):
        evolve_eigenbasis(c, [0.0, 1.0], mode="infinite", store_reservoir=True)


def test_infinite_mode_tracks_closed_form():
    c = SystemConfig.from_gamma(GAMMA, DW, 41)
    t = time_grid(c, 2.5 * c.revival_time, samples_per_period=400)
    tr = evolve_eigenbasis(c, t, mode="infinite", k_max=20000)
    assert np.max(np.abs(tr.a - reconstruct(t, c, 2))) < 1e-3


def test_revivals_appear_near_revival_time():
    c = SystemConfig.from_gamma(GAMMA, DW, 4001)
    t = time_grid(c, 1.5 * c.revival_time)
    p = evolve_eigenbasis(c, t).abs2
    collapsed = p[(t > 0.7 * c.revival_time) & (t < 0.95 * c.revival_time)].max()
    revived = p[(t > c.revival_time) & (t < 1.3 * c.revival_time)].max()
    assert collapsed < 1e-4 and revived > 0.3


def _maxima(t, p):
    idx = np.flatnonzero((p[1:-1] > p[:-2]) & (p[1:-1] > p[2:])) + 1
    return t[idx]


def test_revival_timing_within_two_percent():
    # local maxima of |a|^2 within 0.02 T_R of the first three multiples of T_R
    c = SystemConfig.from_gamma(GAMMA, DW, 4001)
    T = c.revival_time
    t = time_grid(c, 3.5 * T)
    peaks = _maxima(t, evolve_eigenbasis(c, t).abs2)
    offsets = [np.min(np.abs(peaks - m * T)) / T for m in (1, 2, 3)]
    assert max(offsets) <= 0.02, f"nearest maxima offsets / T_R: {offsets}"


def test_first_revival_peak_at_one_decay_time_after_revival():
    # |a_1(tau)|^2 = (2 gamma tau)^2 exp(-2 gamma tau) is largest at tau = 1/gamma
    c = SystemConfig.from_gamma(GAMMA, DW, 8001)
    T = c.revival_time
    t = time_grid(c, 1.5 * T, samples_per_period=20000)
    peaks = _maxima(t, evolve_eigenbasis(c, t).abs2)
    first = peaks[np.argmin(np.abs(peaks - (T + 1 / GAMMA)))]
    assert abs(first - (T + 1 / GAMMA)) < 1e-3 * T


def test_markov_limit_improves_with_smaller_spacing():
    devs = []
    for dw, n_modes in ((0.004, 1001), (0.002, 2001), (0.001, 4001)):
        c = SystemConfig.from_gamma(GAMMA, dw, n_modes)
        t = time_grid(c, 0.3 * c.revival_time)
        a = evolve_eigenbasis(c, t).a
        devs.append(np.max(np.abs(np.abs(a) - np.exp(-GAMMA * t))))
    assert devs[1] <= 5e-3
    assert devs[0] > devs[1] > devs[2]


def test_thread_count_is_deterministic(monkeypatch):
    c = SystemConfig.from_gamma(GAMMA, DW, 1001)
    t = time_grid(c, 2 * c.revival_time)
    dec = decompose(c)
    monkeypatch.setenv("NMEP_THREADS", "1")
    assert thread_count() == 1
    one = evolve_eigenbasis(c, t, decomposition=dec).a
    monkeypatch.setenv("NMEP_THREADS", "4")
    four = evolve_eigenbasis(c, t, decomposition=dec).a
    np.testing.assert_array_equal(one, four)
