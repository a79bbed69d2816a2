"""Exceptional points of growing order behind successive revivals."""
import numpy as np

from nmep import ep_matrix, integrate_ep_chain, jordan_analysis, revival_amplitude

gamma = 0.0035

print(" n  eigenvalue  alg  geo  nilpotency")
for n in range(8):
    info = jordan_analysis(ep_matrix(n, gamma))
    print(f"{n:2d}  {info.eigenvalue:+.4f}   {info.algebraic_multiplicity:3d}  "
          f"{info.geometric_multiplicity:3d}  {info.nilpotency_index:6d}")

# integrating the chain reproduces the polynomial-times-exponential amplitudes
t = np.linspace(0, 10 / gamma, 201)
chain = integrate_ep_chain(ep_matrix(5, gamma), t, dt=0.002 / gamma)
ref = np.array([revival_amplitude(k, t, gamma) for k in range(6)]).T
print(f"\nRK4 chain vs closed form, n <= 5: max error {np.max(np.abs(chain - ref)):.2e}")

# the n-th revival has n sign changes
for n in range(1, 6):
    a = revival_amplitude(n, np.linspace(1e-6, 40 / gamma, 20001), gamma)
    print(f"a_{n}: {np.count_nonzero(np.diff(np.sign(a)) != 0)} sign changes")
