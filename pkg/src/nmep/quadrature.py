"""Gauss-Legendre rules for integrals over the whole real frequency axis.

Both rules map a half-line r in [0, inf) to theta in [0, pi/2) with
r = scale * tan(theta). This turns the algebraic 1/r^2 decay of Lorentzian
integrands into a bounded integrand on a finite interval.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

DEFAULT_NODES = 2000
PANEL_NODES = 200


@lru_cache(maxsize=8)
def _legendre(n):
    return np.polynomial.legendre.leggauss(n)


def _tangent_rule(breaks, n_nodes, scale):
    x, w = _legendre(n_nodes)
    theta, weight = [], []
    for a, b in zip(breaks[:-1], breaks[1:]):
        theta.append(0.5 * (b - a) * (x + 1) + a)
        weight.append(0.5 * (b - a) * w)
    theta = np.concatenate(theta)
    weight = np.concatenate(weight)
    r = scale * np.tan(theta)
    dr = scale * weight / np.cos(theta) ** 2
    return r, dr


def real_line_integral(f, scale, n_nodes=DEFAULT_NODES):
    """Integral of f over the real line, for f smooth and O(1/omega^2) at infinity."""
    x, w = _legendre(n_nodes)
    theta = 0.5 * math.pi * x
    omega = scale * np.tan(theta)
    dw = 0.5 * math.pi * scale * w / np.cos(theta) ** 2
    return np.sum(f(omega) * dw)


def fourier_integral(f, t, scale, beta=math.pi / 3, panel_nodes=PANEL_NODES):
    """Integral of f(omega) exp(-i omega t) over the real line, for t >= 0.

    `f` must be analytic in the closed lower half-plane except for poles on
    the negative imaginary axis, and must decay like 1/omega^2. For t > 0 the
    two half-lines are rotated by -beta into the lower half-plane, where the
    exponential decays. The rotated wedges contain no singularity when
    beta < pi/2. The theta range is split into panels at
    tan(theta) = 10^0, 10^1, ... up to the decay length 1/(scale t), so the
    boundary layer at small t is resolved.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    if t == 0:
        return real_line_integral(f, scale)
    decay = scale * t * math.sin(beta)
    top = max(0, int(math.ceil(math.log10(50.0 / decay)))) if decay < 50 else 0
    breaks = [0.0] + [math.atan(10.0 ** j) for j in range(top + 1)] + [0.5 * math.pi]
    r, dr = _tangent_rule(breaks, panel_nodes, scale)
    total = 0j
    for direction, orientation in ((np.exp(-1j * beta), 1.0), (-np.exp(1j * beta), -1.0)):
        omega = r * direction
        total += orientation * np.sum(f(omega) * np.exp(-1j * omega * t) * direction * dr)
    return total
