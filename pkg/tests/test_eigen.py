import math

import numpy as np
import pytest

from nmep.eigen import (decompose, default_k_max, diagonalize_oracle, eigen_residual, exact_weight,
                        finite_equation_residual, mode_weight, solve_alpha_finite,
                        solve_alpha_infinite)
from nmep.errors import PoleError
from nmep.model import SystemConfig, build_matrix, derive_rates

GAMMA, DW = 0.0035, 0.002


@pytest.fixture(scope="module")
def n200():
    c = SystemConfig.from_gamma(GAMMA, DW, 201)
    return c, decompose(c, "finite"), decompose(c, "dense")


def _fixed_point_alpha0(gamma, dw):
    a = 0.5 * dw
    for _ in range(500):
        a = dw / math.pi * math.atan(gamma / a)
    return a


def test_alpha0_fixed_point_oracle():
    a = solve_alpha_infinite(0, GAMMA, DW)
    assert a == pytest.approx(_fixed_point_alpha0(GAMMA, DW), abs=1e-12)
    assert a == pytest.approx(8.48e-4, abs=1e-6)


def test_alpha_vanishes_with_coupling():
    for k in (1, -3, 40):
        assert abs(solve_alpha_infinite(k, 1e-12, DW)) < 1e-12


def test_infinite_antisymmetry_and_brackets():
    k = np.arange(1, 51)
    ap = solve_alpha_infinite(k, GAMMA, DW)
    am = solve_alpha_infinite(-k, GAMMA, DW)
    assert np.max(np.abs(ap + am)) <= 1e-13
    assert np.all((ap > 0) & (ap < DW)) and np.all((am < 0) & (am > -DW))
    assert -solve_alpha_infinite(0, GAMMA, DW, side=-1) == pytest.approx(solve_alpha_infinite(0, GAMMA, DW),
                                                                          abs=1e-18)


def test_infinite_residual_bound():
    k = np.arange(-400, 401)
    a = solve_alpha_infinite(k, GAMMA, DW)
    res = a - DW / math.pi * np.arctan(GAMMA / (a + k * DW))
    assert np.max(np.abs(res)) <= 1e-14 * DW


def test_infinite_function_increasing_across_brackets():
    # F(alpha) = alpha - (dw/pi) arctan(gamma / (alpha + k dw)) changes sign inside each interval
    for k in range(-20, 21):
        lo, hi = (1e-12, DW * (1 - 1e-12)) if k >= 0 else (-DW * (1 - 1e-12), -1e-12)
        F = [x - DW / math.pi * math.atan(GAMMA / (x + k * DW)) for x in (lo, hi)]
        if k == 0:
            continue  # arctan jumps at alpha = 0; covered by the cot form
        assert F[0] < 0 < F[1]


def test_finite_converges_to_infinite():
    errs = []
    for n_modes in (101, 1001, 10001, 100001):
        c = SystemConfig.from_gamma(GAMMA, DW, n_modes)
        errs.append(abs(solve_alpha_finite(3, c) - solve_alpha_infinite(3, GAMMA, DW)))
    assert all(b < a for a, b in zip(errs, errs[1:]))
    assert errs[-1] < 1e-8 * DW * 1e3


def test_finite_edge_modes_within_sturm_bound():
    c = SystemConfig.from_gamma(GAMMA, DW, 201)
    for k in (100, -100):
        a = solve_alpha_finite(k, c)
        assert abs(a) <= DW


def test_finite_residual_below_bound(n200):
    c, fin, _ = n200
    assert np.max(np.abs(fin.residual)) <= 1e-12 * c.delta_omega
    res = finite_equation_residual(fin.alpha, fin.k, c)
    np.testing.assert_array_equal(res, fin.residual)


def test_pole_sum_residual_at_finite_roots(n200):
    # bound 1e-10 dw; low-weight modes sit at the double-precision floor ulp(omega) / h^2
    c, fin, _ = n200
    res = np.abs(eigen_residual(fin.omega_tilde, c))
    worst = float(res.max())
    assert worst <= 1e-10 * c.delta_omega, f"max residual {worst:.3e} at k = {fin.k[res.argmax()]}"


def test_finite_roots_match_dense(n200):
    c, fin, den = n200
    np.testing.assert_array_equal(fin.k, den.k)
    assert np.max(np.abs(fin.omega_tilde - den.omega_tilde)) <= 1e-10 * c.delta_omega
    assert np.all(np.diff(fin.omega_tilde) > 0)
    assert np.sum(fin.k == 0) == 2


def test_dense_residual_and_orthonormality(n200):
    c, _, den = n200
    assert np.max(np.abs(den.residual)) <= 1e-9
    V = den.vectors
    assert np.max(np.abs(V.T @ V - np.eye(V.shape[0]))) <= 1e-10
    A = build_matrix(c).dense()
    off = V.T @ A @ V
    off -= np.diag(np.diag(off))
    assert np.linalg.norm(off) <= 1e-12 * np.linalg.norm(A) * 10


def test_exact_weights_match_dense(n200):
    c, fin, den = n200
    assert np.max(np.abs(fin.weight - den.weight)) <= 1e-8
    assert abs(fin.weight_sum() - 1) <= 1e-12
    assert np.all((fin.weight > 0) & (fin.weight < 1))


def test_lorentz_weights_approach_exact_weights_with_n():
    # the Lorentz-like form is the infinite-reservoir limit of the exact weights
    gaps = []
    for n_modes in (201, 2001, 20001):
        c = SystemConfig.from_gamma(GAMMA, DW, n_modes)
        k = np.arange(-50, 51)
        alpha = solve_alpha_finite(k, c)
        gaps.append(np.max(np.abs(mode_weight(alpha, k, c) - exact_weight(alpha, k, c))))
    assert gaps[1] < 0.2 * gaps[0] and gaps[2] < 0.2 * gaps[1]


def test_resonant_weight():
    c = SystemConfig.from_gamma(GAMMA, DW, 201)
    _, Gamma, _ = derive_rates(c)
    assert mode_weight(0.0, 0, c) == pytest.approx(GAMMA * DW / (math.pi * Gamma ** 2), rel=1e-15)


def test_weight_sum_tail_bound():
    c = SystemConfig.from_gamma(GAMMA, DW, 201)
    for K in (50, 200, 1000):
        s = decompose(c, "infinite", k_max=K).weight_sum()
        assert abs(1 - s) <= 2 * 2 * GAMMA / (math.pi * K * DW)
    default = decompose(c, "infinite")
    assert len(default) == 2 * (default_k_max(GAMMA, DW) + 1)
    assert 0.99 <= default.weight_sum() <= 1.0


def test_weight_sum_at_hundred_gamma_truncation():
    # a truncation K dw = 100 gamma leaves a tail of 2 gamma / (pi K dw) = 0.0064
    c = SystemConfig.from_gamma(GAMMA, DW, 201)
    K = math.ceil(100 * GAMMA / DW)
    s = decompose(c, "infinite", k_max=K).weight_sum()
    assert abs((1 - s) - 2 * GAMMA / (math.pi * K * DW)) < 2e-4


def test_two_by_two_oracle():
    c = SystemConfig(delta_omega=1.0, coupling=0.3, n_modes=3)
    m = build_matrix(c)
    m2 = type(m)(diagonal=np.zeros(2), coupling=0.3)
    dec = diagonalize_oracle(m2)
    np.testing.assert_allclose(dec.omega_tilde, [-0.3, 0.3], rtol=1e-15)
    np.testing.assert_allclose(dec.weight, [0.5, 0.5], rtol=1e-14)


def test_residual_sign_change_across_sturm_intervals():
    c = SystemConfig.from_gamma(GAMMA, DW, 41)
    edges = c.mode_frequencies()
    eps = 1e-9 * DW
    below = eigen_residual(edges[1:] - eps, c)
    above = eigen_residual(edges[:-1] + eps, c)
    assert np.all(above < 0) and np.all(below > 0)


def test_residual_decoupled():
    c = SystemConfig(delta_omega=DW, coupling=0.0, n_modes=41)
    assert eigen_residual(0.5 * DW, c) == 0.5 * DW
    c1 = SystemConfig(delta_omega=DW, coupling=0.0, n_modes=41, omega0=1.0, rotating_frame=False)
    assert eigen_residual(1.0 + 0.5 * DW, c1) == pytest.approx(0.5 * DW, abs=1e-15)


def test_residual_pole():
    c = SystemConfig.from_gamma(GAMMA, DW, 41)
    with pytest.raises(PoleError):
        eigen_residual(3 * DW, c)


def test_exact_weight_matches_direct_sum():
    c = SystemConfig.from_gamma(GAMMA, DW, 201)
    fin = decompose(c, "finite")
    i = 57
    direct = 1 / (1 + np.sum(c.coupling ** 2 / (fin.omega_tilde[i] - c.mode_frequencies()) ** 2))
    assert exact_weight(fin.alpha[i], fin.k[i], c) == pytest.approx(direct, rel=1e-12)


def test_large_reservoir_solves():
    c = SystemConfig.from_gamma(GAMMA, DW, 8001)
    fin = decompose(c, "finite")
    assert len(fin) == 8002
    assert abs(fin.weight_sum() - 1) < 1e-12
