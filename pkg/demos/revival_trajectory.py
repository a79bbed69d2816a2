"""Collapse and revivals of an oscillator coupled to a 4001-mode reservoir.

Prints |a(t)|^2 at a few times and the deviation from the closed-form
revival series, then writes the full trajectory to revival_trajectory.csv.
"""
import sys

import numpy as np

from nmep import SystemConfig, evolve_eigenbasis, reconstruct, time_grid
from nmep.cli import write_csv


def main(out="revival_trajectory.csv"):
    c = SystemConfig.from_gamma(0.0035, 0.002, 4001)
    T = c.revival_time
    t = time_grid(c, 3 * T)
    a = evolve_eigenbasis(c, t).a
    closed = reconstruct(t, c, 3)

    print(f"gamma = {c.gamma:.6g}, coupling = {c.coupling:.6g}, T_R = {T:.6g}")
    for frac in (0.0, 0.2, 0.9, 1.0, 1.0 + 1 / (c.gamma * T), 2.0, 3.0):
        i = int(round(frac * T / (t[1] - t[0])))
        print(f"  t = {frac:6.3f} T_R   |a|^2 = {abs(a[i]) ** 2:.6f}   closed form {closed[i] ** 2:.6f}")
    print(f"max |a - closed form| = {np.max(np.abs(a - closed)):.3e}")
    write_csv(out, ["t", "re_a", "im_a", "closed_form"], [t, a.real, a.imag, closed])


if __name__ == "__main__":
    main(*sys.argv[1:])
