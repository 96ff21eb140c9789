"""
ChiralQ domain models
Probe and sample descriptions shared by every layer of the engine.

The unit contract lives here. Optical rotation uses a mass concentration
(g/cm^3, equivalently g/mL) and a path length in dm; absorbance uses a molar
concentration (mol/L) and a path length in cm. Samples store the unit tags
they were given and convert on demand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum


class ParameterError(ValueError):
    """Raised when a probe or sample description violates its invariants."""


# ---------------------------------------------------------------------------
# Units
# ---------------------------------------------------------------------------

MASS_CONCENTRATION_UNITS = ("g/cm3", "g/mL")
MOLAR_CONCENTRATION_UNITS = ("mol/L",)
CONCENTRATION_UNITS = MASS_CONCENTRATION_UNITS + MOLAR_CONCENTRATION_UNITS
PATH_LENGTH_UNITS = ("dm", "cm")

_CM_PER_UNIT = {"cm": 1.0, "dm": 10.0}


# ---------------------------------------------------------------------------
# Probe
# ---------------------------------------------------------------------------

class ProbeFamily(str, Enum):
    COHERENT = "coherent"
    POLARIZATION_SQUEEZED = "polarization_squeezed"
    TWIN_SQUEEZED = "twin_squeezed"


@dataclass(frozen=True)
class ProbeSpec:
    """Probe family plus coherent amplitude, squeezing factor and angle.

    ``alpha`` is the modulus of the coherent amplitude and ``alpha_phase`` its
    argument, so the complex amplitude is ``alpha * exp(i * alpha_phase)``.
    """

    family: ProbeFamily = ProbeFamily.POLARIZATION_SQUEEZED
    alpha: float = 0.0
    s: float = 0.0
    theta: float = 0.0
    alpha_phase: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "family", ProbeFamily(self.family))
        for name in ("alpha", "s", "theta", "alpha_phase"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ParameterError(f"probe.{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if self.alpha < 0:
            raise ParameterError("probe.alpha is a modulus and must be >= 0")
        if self.s < 0:
            raise ParameterError(f"probe.s must be >= 0, got {self.s!r}")
        if self.family is ProbeFamily.COHERENT and self.s != 0.0:
            raise ParameterError("coherent probes carry no squeezing (s must be 0)")

    @property
    def amplitude(self) -> complex:
        return self.alpha * complex(math.cos(self.alpha_phase), math.sin(self.alpha_phase))

    @property
    def photons(self) -> float:
        """Coherent photon number |alpha|^2 per displaced mode."""
        return self.alpha * self.alpha

    @property
    def theta_eff(self) -> float:
        """Squeezing angle relative to the coherent amplitude (0 = amplitude squeezed)."""
        return self.theta - 2.0 * self.alpha_phase

    def coherent_counterpart(self) -> ProbeSpec:
        """Equally bright probe of the same family with squeezing removed."""
        if self.family is ProbeFamily.POLARIZATION_SQUEEZED:
            return replace(self, family=ProbeFamily.COHERENT, s=0.0, theta=0.0)
        return replace(self, s=0.0, theta=0.0)

    def to_dict(self):
        return {
            "family": self.family.value,
            "alpha": self.alpha,
            "alpha_phase": self.alpha_phase,
            "s": self.s,
            "theta": self.theta,
        }

    @classmethod
    def from_photons(cls, photons, **kwargs) -> ProbeSpec:
        if photons < 0:
            raise ParameterError("photon number must be >= 0")
        return cls(alpha=math.sqrt(photons), **kwargs)


# ---------------------------------------------------------------------------
# Sample
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChiralSample:
    """A chiral solution in a cuvette, plus the detection efficiency.

    Attributes:
        concentration: analyte concentration, in ``concentration_unit``.
        path_length: cuvette length, in ``path_length_unit``.
        delta_gamma: optical rotatory power, rad cm^3 g^-1 dm^-1.
        eps_L, eps_R: molar extinction coefficients, L mol^-1 cm^-1.
        eta: external efficiency applied equally before both detectors.
    """

    concentration: float = 0.0
    path_length: float = 1.0
    delta_gamma: float = 0.0
    eps_L: float = 0.0
    eps_R: float = 0.0
    eta: float = 1.0
    concentration_unit: str = "g/cm3"
    path_length_unit: str = "dm"

    def __post_init__(self):
        for name in ("concentration", "path_length", "delta_gamma", "eps_L", "eps_R", "eta"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ParameterError(f"sample.{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if self.concentration < 0:
            raise ParameterError("sample.concentration must be >= 0")
        if self.path_length <= 0:
            raise ParameterError("sample.path_length must be > 0")
        if not 0.0 <= self.eta <= 1.0:
            raise ParameterError(f"sample.eta must lie in [0, 1], got {self.eta!r}")
        if self.eps_L < 0 or self.eps_R < 0:
            raise ParameterError("extinction coefficients must be >= 0")
        if self.concentration_unit not in CONCENTRATION_UNITS:
            raise ParameterError(
                f"unknown concentration unit {self.concentration_unit!r}; "
                f"expected one of {', '.join(CONCENTRATION_UNITS)}"
            )
        if self.path_length_unit not in PATH_LENGTH_UNITS:
            raise ParameterError(
                f"unknown path length unit {self.path_length_unit!r}; "
                f"expected one of {', '.join(PATH_LENGTH_UNITS)}"
            )

    @property
    def path_length_cm(self) -> float:
        return self.path_length * _CM_PER_UNIT[self.path_length_unit]

    @property
    def path_length_dm(self) -> float:
        return self.path_length_cm / _CM_PER_UNIT["dm"]

    @property
    def is_molar(self) -> bool:
        return self.concentration_unit in MOLAR_CONCENTRATION_UNITS

    @property
    def delta_epsilon(self) -> float:
        """eps_L - eps_R; may be negative."""
        return self.eps_L - self.eps_R

    @property
    def phase_rate(self) -> float:
        """d(delta phi)/dC in rad per concentration unit."""
        return self.delta_gamma * self.path_length_dm

    def with_concentration(self, concentration) -> ChiralSample:
        return replace(self, concentration=concentration)

    def to_dict(self):
        return {
            "concentration": self.concentration,
            "concentration_unit": self.concentration_unit,
            "path_length": self.path_length,
            "path_length_unit": self.path_length_unit,
            "delta_gamma": self.delta_gamma,
            "eps_L": self.eps_L,
            "eps_R": self.eps_R,
            "eta": self.eta,
        }


# Sucrose reference values: 1% w/w aqueous solution in a standard cuvette at 589 nm.
SUCROSE = ChiralSample(
    concentration=0.01,
    concentration_unit="g/cm3",
    path_length=1.0,
    path_length_unit="cm",
    delta_gamma=1.16,
)
SUCROSE_PHOTONS = 1e9
