"""Revival dynamics of an oscillator coupled to a finite equidistant reservoir.

The oscillator amplitude collapses and revives every T_R = 2 pi / delta_omega.
The n-th revival is exp(-gamma t) L_n^(-1)(2 gamma t), the solution at an
exceptional point of order n + 1. Every closed form is paired with a
brute-force numerical check.
"""
from .model import (SystemConfig, CoupledSystemMatrix, build_matrix, coupling_for_rate,
                    derive_rates)
from .eigen import (EigenDecomposition, EigenMode, decompose, diagonalize_oracle, eigen_residual,
                    exact_weight, mode_weight, solve_alpha_finite, solve_alpha_infinite)
from .special import digamma, trigamma
from .dynamics import StateTrajectory, evolve_eigenbasis, evolve_rk4, time_grid, total_norm
from .revivals import (EPMatrix, RevivalSeries, ep_chain_residual, ep_matrix, jordan_analysis,
                       integrate_ep_chain, laguerre_gen, reconstruct, revival_amplitude, revival_quadrature,
                       revival_recurrence)
from .spectra import (PeakList, SpectrumGrid, analytic_spectrum, find_peaks, fwhm_scaling, omega_grid,
                      peak_fwhm, windowed_spectrum)

__version__ = "0.1.0"
