"""Revival spectra: closed form, windowed transforms of trajectories, peaks and widths.

Sign convention: a(t) = integral F(omega) exp(-i omega t) d omega, so a sampled
signal is transformed with exp(+i omega t) and a factor dt / (2 pi).
Peak analysis works on |S|^2.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dynamics import StateTrajectory, _check_uniform, thread_count
from .errors import DegenerateWindowError, FormatError, PeakRangeError, ResolutionError
from .quadrature import real_line_integral

MIN_WINDOW_SAMPLES = 10
MAX_SPACING = 1.0 / 200     # grid spacing limit for peak search, in units of gamma
MIN_COVERAGE = 20.0         # required half-width of the grid, in units of gamma
MERGE_RADIUS = 1.0 / 100    # in units of gamma
_DFT_CHUNK = 256            # omega points per block; fixed so results do not depend on threads


@dataclass
class SpectrumGrid:
    omegas: np.ndarray
    values: np.ndarray
    order: Optional[int]
    kind: str
    gamma: Optional[float] = None
    info: dict = field(default_factory=dict)

    @property
    def spacing(self) -> float:
        return float((self.omegas[-1] - self.omegas[0]) / (self.omegas.size - 1))

    @property
    def abs2(self) -> np.ndarray:
        return np.abs(self.values) ** 2


@dataclass(frozen=True)
class Peak:
    omega: float
    height: float
    fwhm: float
    index: int


@dataclass
class PeakList:
    peaks: list
    spacing: float
    merge_radius: float
    magnitude: bool = True

    def __len__(self):
        return len(self.peaks)

    @property
    def count(self) -> int:
        return len(self.peaks)

    def dominant(self) -> Peak:
        if not self.peaks:
            raise PeakRangeError("no peaks found")
        return max(self.peaks, key=lambda p: p.height)

    def as_dict(self) -> dict:
        return {
            "count": self.count,
            "peaks": [{"omega": p.omega, "height": p.height, "fwhm": None if math.isnan(p.fwhm) else p.fwhm}
                      for p in self.peaks],
            "detection": {"spacing": self.spacing, "merge_radius": self.merge_radius,
                          "target": "abs2" if self.magnitude else "real",
                          "rule": "strict local maximum, merged within merge_radius"},
        }


def omega_grid(half_width: float, spacing: float) -> np.ndarray:
    """Uniform grid symmetric about 0 that covers [-half_width, half_width]."""
    if not (half_width > 0 and spacing > 0):
        raise ValueError("half_width and spacing must be positive")
    m = int(math.ceil(half_width / spacing * (1 - 1e-12)))
    return np.arange(-m, m + 1) * spacing


def spectrum_integrand(n: int, omegas, gamma: float) -> np.ndarray:
    """(gamma/pi) (omega - i gamma)^(n-1) / (omega + i gamma)^(n+1), complex.

    Accepts complex omega so the integrand can be continued off the real axis.
    """
    w = np.asarray(omegas)
    lower = w - 1j * gamma
    upper = w + 1j * gamma
    return gamma / math.pi * lower ** (n - 1) / upper ** (n + 1)


def analytic_spectrum(n: int, omegas, gamma: float) -> SpectrumGrid:
    """S_n(omega), the real part of `spectrum_integrand`."""
    if n < 0:
        raise ValueError("order must be non-negative")
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    w = np.asarray(omegas, dtype=float)
    return SpectrumGrid(omegas=w, values=spectrum_integrand(n, w, gamma).real,
                        order=n, kind="analytic", gamma=gamma)


def spectrum_integral(n: int, gamma: float) -> float:
    """Integral of S_n over the real line; equals 1 for n = 0 and 0 otherwise."""
    return float(real_line_integral(lambda w: spectrum_integrand(n, w, gamma).real, gamma))


def _dft(tau, a, omegas, threads):
    out = np.empty(omegas.size, dtype=complex)
    spans = [(s, min(s + _DFT_CHUNK, omegas.size)) for s in range(0, omegas.size, _DFT_CHUNK)]

    def work(span):
        s, e = span
        out[s:e] = np.exp(1j * np.outer(omegas[s:e], tau)) @ a

    if threads > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, spans))
    else:
        for span in spans:
            work(span)
    return out


def windowed_spectrum(trajectory: StateTrajectory, window, omegas,
                      gamma: Optional[float] = None, order: Optional[int] = None) -> SpectrumGrid:
    """Rectangular-window transform of a(t) on [t_lo, t_hi].

    G(omega) = dt/(2 pi) sum_m a(t_m) exp(i omega (t_m - t_lo)) over the samples
    inside the window, evaluated directly at every requested omega. Time is
    measured from the window start, so a revival switching on at t_lo is
    transformed as a causal signal.
    """
    t, dt = _check_uniform(trajectory.times)
    t_lo, t_hi = float(window[0]), float(window[1])
    if not t_hi > t_lo:
        raise DegenerateWindowError("window must have t_hi > t_lo")
    slack = 1e-9 * dt
    if t_lo < t[0] - slack or t_hi > t[-1] + slack:
        raise FormatError(f"window [{t_lo:g}, {t_hi:g}] outside the trajectory "
                          f"[{t[0]:g}, {t[-1]:g}]")
    inside = (t >= t_lo - slack) & (t <= t_hi + slack)
    if np.count_nonzero(inside) < MIN_WINDOW_SAMPLES:
        raise DegenerateWindowError(f"window holds {np.count_nonzero(inside)} samples, "
                                    f"need at least {MIN_WINDOW_SAMPLES}")
    w = np.asarray(omegas, dtype=float)
    a = np.asarray(trajectory.a, dtype=complex)[inside]
    values = dt / (2 * math.pi) * _dft(t[inside] - t_lo, a, w, thread_count())
    return SpectrumGrid(omegas=w, values=values, order=order, kind="windowed", gamma=gamma,
                        info={"window": [t_lo, t_hi], "samples": int(a.size), "dt": dt})


def fft_spectrum(trajectory: StateTrajectory, window) -> SpectrumGrid:
    """Quick-look transform on FFT bin frequencies (same normalization as the direct DFT)."""
    t, dt = _check_uniform(trajectory.times)
    inside = (t >= window[0]) & (t <= window[1])
    a = np.asarray(trajectory.a, dtype=complex)[inside]
    if a.size < MIN_WINDOW_SAMPLES:
        raise DegenerateWindowError("window holds too few samples")
    # exp(+i omega t) convention is the inverse DFT up to the factor n
    values = np.fft.fftshift(np.fft.ifft(a)) * a.size * dt / (2 * math.pi)
    omegas = np.fft.fftshift(np.fft.fftfreq(a.size, d=dt)) * 2 * math.pi
    return SpectrumGrid(omegas=omegas, values=values, order=None, kind="fft",
                        info={"window": [float(window[0]), float(window[1])]})


def _target(spectrum: SpectrumGrid, magnitude: bool) -> np.ndarray:
    return spectrum.abs2 if magnitude else np.real(spectrum.values)


def _check_resolution(spectrum: SpectrumGrid, gamma: float):
    w = spectrum.omegas
    if w.size < 3:
        raise ResolutionError("spectrum grid needs at least three points")
    h = spectrum.spacing
    if np.max(np.abs(np.diff(w) - h)) > 1e-9 * max(h, np.max(np.abs(w))):
        raise FormatError("frequency grid must be uniform")
    tol = 1e-9 * gamma
    if h > MAX_SPACING * gamma + tol:
        raise ResolutionError(f"grid spacing {h:.3e} exceeds gamma/200 = {MAX_SPACING * gamma:.3e}")
    if w[0] > -MIN_COVERAGE * gamma + tol or w[-1] < MIN_COVERAGE * gamma - tol:
        raise ResolutionError(f"grid [{w[0]:.3e}, {w[-1]:.3e}] does not cover "
                              f"[-20 gamma, 20 gamma] = +-{MIN_COVERAGE * gamma:.3e}")


def peak_fwhm(spectrum: SpectrumGrid, peak, magnitude: bool = True) -> float:
    """Full width at half maximum around grid index `peak` (or a Peak).

    Walks outward to the first samples at or below half the peak value and
    interpolates the crossings linearly.
    """
    y = _target(spectrum, magnitude)
    w = spectrum.omegas
    i = peak.index if isinstance(peak, Peak) else int(peak)
    half = 0.5 * y[i]
    if not half > 0:
        raise PeakRangeError("peak value must be positive")

    def crossing(step):
        j = i
        while 0 <= j + step < y.size:
            j += step
            if y[j] <= half:
                k = j - step
                return w[k] + (half - y[k]) * (w[j] - w[k]) / (y[j] - y[k])
        raise PeakRangeError(f"half-maximum crossing of the peak at omega={w[i]:.6e} "
                             "lies outside the grid")

    return float(crossing(1) - crossing(-1))


def find_peaks(spectrum: SpectrumGrid, magnitude: bool = True,
               gamma: Optional[float] = None, widths: bool = True) -> PeakList:
    """Strict local maxima of |S|^2 (or Re S), merged within gamma/100.

    The grid must be uniform with spacing at most gamma/200 and cover
    [-20 gamma, 20 gamma]. When two maxima are closer than the merge radius
    the higher one is kept. Peaks whose half-maximum crossing falls outside
    the grid keep fwhm = nan.
    """
    gamma = spectrum.gamma if gamma is None else gamma
    if gamma is None or not gamma > 0:
        raise ResolutionError("a positive gamma is needed to set the peak-search scales")
    _check_resolution(spectrum, gamma)
    y = _target(spectrum, magnitude)
    idx = np.flatnonzero((y[1:-1] > y[:-2]) & (y[1:-1] > y[2:])) + 1
    radius = MERGE_RADIUS * gamma
    kept: list[int] = []
    for i in idx:
        if kept and spectrum.omegas[i] - spectrum.omegas[kept[-1]] < radius:
            if y[i] > y[kept[-1]]:
                kept[-1] = int(i)
            continue
        kept.append(int(i))
    peaks = []
    for i in kept:
        width = float("nan")
        if widths:
            try:
                width = peak_fwhm(spectrum, i, magnitude)
            except PeakRangeError:
                pass  # edge sidelobe: position and height are still reported
        peaks.append(Peak(omega=float(spectrum.omegas[i]), height=float(y[i]), fwhm=width, index=i))
    return PeakList(peaks=peaks, spacing=spectrum.spacing, merge_radius=radius, magnitude=magnitude)


def dominant_fwhm(n: int, gamma: float, spacing_fraction: float = 1.0 / 400,
                  half_width: float = 25.0) -> float:
    """FWHM of the highest peak of |S_n|^2."""
    grid = omega_grid(half_width * gamma, spacing_fraction * gamma)
    s = analytic_spectrum(n, grid, gamma)
    y = s.abs2
    return peak_fwhm(s, int(np.argmax(y)))


def fwhm_scaling(orders, gamma: float, **kwargs):
    """Dominant-peak widths for `orders` and the fitted exponent p in fwhm ~ n^p."""
    orders = np.asarray(list(orders), dtype=float)
    widths = np.array([dominant_fwhm(int(n), gamma, **kwargs) for n in orders])
    slope = np.polyfit(np.log(orders), np.log(widths), 1)[0]
    return widths, float(slope)
