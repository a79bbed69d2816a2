"""Eigenfrequency shifts and oscillator weights near resonance."""
import numpy as np

from nmep import SystemConfig, decompose

c = SystemConfig.from_gamma(0.0035, 0.002, 201)
fin = decompose(c, "finite")
den = decompose(c, "dense")
inf = decompose(c, "infinite")

print(f"{'k':>4} {'alpha/dw (N=200)':>18} {'alpha/dw (N=inf)':>18} {'weight':>12}")
for k in range(-4, 5):
    i = np.flatnonzero(fin.k == k)[-1]
    j = np.flatnonzero(inf.k == k)[-1]
    print(f"{k:4d} {fin.alpha[i] / c.delta_omega:18.12f} {inf.alpha[j] / c.delta_omega:18.12f} "
          f"{fin.weight[i]:12.6e}")
print(f"\nmax |transcendental - Jacobi| = {np.max(np.abs(fin.omega_tilde - den.omega_tilde)):.2e}")
print(f"sum of weights: finite {fin.weight_sum():.15f}, infinite (truncated) {inf.weight_sum():.6f}")
