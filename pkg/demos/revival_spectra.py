"""Peak counts and widths of the revival spectra, analytic and from a simulation."""
import numpy as np

from nmep import (SystemConfig, analytic_spectrum, evolve_eigenbasis, find_peaks, fwhm_scaling,
                  omega_grid, time_grid, windowed_spectrum)

gamma = 0.0071
w = omega_grid(25 * gamma, gamma / 400)

print(" n  peaks  dominant FWHM / gamma")
for n in range(7):
    peaks = find_peaks(analytic_spectrum(n, w, gamma))
    print(f"{n:2d}  {peaks.count:5d}  {peaks.dominant().fwhm / gamma:.4f}")

widths, slope = fwhm_scaling(range(1, 7), gamma)
print(f"fitted width exponent for n = 1..6: {slope:.3f}")

c = SystemConfig.from_gamma(gamma, 0.002, 4001)
T = c.revival_time
traj = evolve_eigenbasis(c, time_grid(c, 6 * T))
wg = omega_grid(25 * gamma, gamma / 200)
for n in (3, 5):
    # the n-th revival lives in [n T_R, (n+1) T_R]
    num = windowed_spectrum(traj, (n * T, (n + 1) * T), wg, gamma, n)
    ana = analytic_spectrum(n, wg, gamma)
    err = np.max(np.abs(num.values.real - ana.values)) / np.max(np.abs(ana.values))
    print(f"window [{n}, {n + 1}] T_R: max |Re G - S_{n}| / max |S_{n}| = {err:.2e}")
