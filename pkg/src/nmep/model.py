"""Oscillator coupled to a finite reservoir of equidistant modes.

Frequencies and times are in units of the carrier frequency omega0. In the
rotating frame (the default) the carrier is removed, which is the same as
setting omega0 = 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidConfigError


@dataclass(frozen=True)
class SystemConfig:
    """Physical parameters of the oscillator + reservoir system.

    n_modes is the number of reservoir modes N + 1, with mode indices
    j = -N/2 .. N/2, so it must be odd. ``coupling = 0`` is accepted as the
    decoupled limit; the effective rates are then undefined.
    """

    delta_omega: float
    coupling: float
    n_modes: int
    omega0: float = 1.0
    rotating_frame: bool = True

    def __post_init__(self):
        if not (self.delta_omega > 0 and math.isfinite(self.delta_omega)):
            raise InvalidConfigError(f"delta_omega must be positive, got {self.delta_omega}")
        if not (self.coupling >= 0 and math.isfinite(self.coupling)):
            raise InvalidConfigError(f"coupling must be non-negative, got {self.coupling}")
        if int(self.n_modes) != self.n_modes or self.n_modes < 3 or self.n_modes % 2 == 0:
            raise InvalidConfigError(
                f"n_modes must be an odd integer >= 3 (N even), got {self.n_modes}")
        object.__setattr__(self, "n_modes", int(self.n_modes))

    @classmethod
    def from_gamma(cls, gamma, delta_omega, n_modes, **kw) -> "SystemConfig":
        return cls(delta_omega=delta_omega, coupling=coupling_for_rate(gamma, delta_omega),
                   n_modes=n_modes, **kw)

    @property
    def n(self) -> int:
        """N, the reservoir size parameter (n_modes - 1)."""
        return self.n_modes - 1

    @property
    def half(self) -> int:
        return (self.n_modes - 1) // 2

    @property
    def carrier(self) -> float:
        """Oscillator frequency in the working frame."""
        return 0.0 if self.rotating_frame else float(self.omega0)

    @property
    def gamma(self) -> float:
        return derive_rates(self)[0]

    @property
    def Gamma(self) -> float:
        return derive_rates(self)[1]

    @property
    def revival_time(self) -> float:
        return 2 * math.pi / self.delta_omega

    def mode_indices(self) -> np.ndarray:
        return np.arange(-self.half, self.half + 1)

    def mode_frequencies(self) -> np.ndarray:
        """Reservoir frequencies carrier + j*delta_omega, j = -N/2..N/2."""
        return self.carrier + self.mode_indices() * self.delta_omega

    def as_dict(self) -> dict:
        return {
            "omega0": self.omega0,
            "delta_omega": self.delta_omega,
            "n_modes": self.n_modes,
            "coupling": self.coupling,
            "rotating_frame": self.rotating_frame,
        }


def derive_rates(config: SystemConfig) -> tuple[float, float, float]:
    """Return (gamma, Gamma, T_R) for a configuration.

    gamma = pi g^2 / delta_omega is the Born-Markov decay rate, Gamma is the
    width of the Lorentz-like eigenmode weight distribution and
    T_R = 2 pi / delta_omega the revival period.
    """
    g, dw = config.coupling, config.delta_omega
    if not g > 0:
        raise InvalidConfigError("rates are undefined for coupling <= 0")
    if not dw > 0:
        raise InvalidConfigError("delta_omega must be positive")
    gamma = math.pi * g * g / dw
    Gamma = math.sqrt(gamma * gamma + gamma * dw / math.pi)
    return gamma, Gamma, 2 * math.pi / dw


def coupling_for_rate(gamma: float, delta_omega: float) -> float:
    """Coupling g that produces decay rate `gamma` for mode spacing `delta_omega`."""
    if not (gamma > 0 and delta_omega > 0):
        raise InvalidConfigError(
            f"gamma and delta_omega must be positive, got {gamma}, {delta_omega}")
    return math.sqrt(gamma * delta_omega / math.pi)


@dataclass(frozen=True)
class CoupledSystemMatrix:
    """Real symmetric arrowhead matrix of the linear equations of motion.

    Index 0 is the oscillator; indices 1..N+1 are reservoir modes ordered
    j = -N/2..N/2. Only the diagonal and the constant border are stored.
    """

    diagonal: np.ndarray
    coupling: float

    @property
    def dimension(self) -> int:
        return self.diagonal.size

    def dense(self) -> np.ndarray:
        m = np.diag(self.diagonal.astype(float))
        m[0, 1:] = self.coupling
        m[1:, 0] = self.coupling
        return m

    def matvec(self, x: np.ndarray) -> np.ndarray:
        y = self.diagonal * x
        y[0] += self.coupling * x[1:].sum()
        y[1:] += self.coupling * x[0]
        return y

    def frobenius_norm(self) -> float:
        d = self.diagonal
        return math.sqrt(float(d @ d) + 2 * (d.size - 1) * self.coupling ** 2)


def build_matrix(config: SystemConfig) -> CoupledSystemMatrix:
    if config.n_modes % 2 == 0:
        raise InvalidConfigError("n_modes must be odd")
    diag = np.concatenate(([config.carrier], config.mode_frequencies()))
    return CoupledSystemMatrix(diagonal=diag, coupling=float(config.coupling))


_BOOL = {"1": True, "true": True, "yes": True, "on": True,
         "0": False, "false": False, "no": False, "off": False}
_FLOAT_KEYS = ("omega0", "delta_omega", "coupling", "gamma")


def parse_config_text(text: str) -> dict:
    """Parse line-based ``key=value`` text; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        try:
            if key in _FLOAT_KEYS:
                out[key] = float(value)
            elif key == "n_modes":
                out[key] = int(value)
            elif key == "rotating_frame":
                out[key] = _BOOL[value.lower()]
            else:
                raise InvalidConfigError(f"line {lineno}: unknown key {key!r}")
        except (ValueError, KeyError):
            raise InvalidConfigError(f"line {lineno}: bad value for {key}: {value!r}") from None
    if "coupling" in out and "gamma" in out:
        raise InvalidConfigError("give exactly one of coupling / gamma")
    return out


def load_config(path) -> dict:
    return parse_config_text(Path(path).read_text())


def config_from_mapping(values: dict) -> SystemConfig:
    """Build a SystemConfig from parsed key/value pairs (coupling or gamma)."""
    values = dict(values)
    if "coupling" in values and "gamma" in values:
        raise InvalidConfigError("give exactly one of coupling / gamma")
    missing = [k for k in ("delta_omega", "n_modes") if k not in values]
    if "coupling" not in values and "gamma" not in values:
        missing.append("coupling|gamma")
    if missing:
        raise InvalidConfigError("missing configuration: " + ", ".join(missing))
    gamma = values.pop("gamma", None)
    if gamma is not None:
        values["coupling"] = coupling_for_rate(gamma, values["delta_omega"])
    return SystemConfig(**values)
