"""
Sample channels

Maps a ChiralSample onto Gaussian channel actions: circular birefringence
(a differential phase between the circular modes), circular dichroism
(differential Beer-Lambert loss) and the external detection loss.

Circular basis, in terms of the linear (H, V) modes:

    a_L = (a_H - i a_V) / sqrt(2),    a_R = (a_H + i a_V) / sqrt(2)

With this choice a differential phase delta_phi = phi_R - phi_L rotates the
linear polarization so that a probe displaced along H ends up with

    d_H = alpha cos(delta_phi / 2) e^{i (phi_L + phi_R) / 2}
    d_V = alpha sin(delta_phi / 2) e^{i (phi_L + phi_R) / 2}
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from gaussian_core import (
    HV_LABELS,
    LR_LABELS,
    GaussianState,
    attenuate,
    passive_transform,
    state_from_probe,
)
from models import ChiralSample, ProbeFamily, ProbeSpec

logger = logging.getLogger(__name__)

# Rows express (a_L, a_R) in terms of (a_H, a_V).
CIRCULAR_FROM_LINEAR = np.array([[1.0, -1.0j], [1.0, 1.0j]]) / math.sqrt(2.0)


class ChannelError(ValueError):
    """Raised when a channel is given parameters outside its domain."""


# ---------------------------------------------------------------------------
# Channel parameters
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BirefringencePhases:
    phi_L: float
    phi_R: float

    @property
    def delta_phi(self) -> float:
        return self.phi_R - self.phi_L

    @property
    def common_phase(self) -> float:
        return (self.phi_L + self.phi_R) / 2.0


@dataclass(frozen=True)
class DichroismTransmissions:
    T_L: float
    T_R: float

    @property
    def degenerate(self) -> bool:
        """True when an arm is fully absorbed (infinite downstream variance)."""
        return self.T_L == 0.0 or self.T_R == 0.0

    @property
    def delta_absorbance(self) -> float:
        """A_L - A_R; infinite when an arm is fully absorbed."""
        if self.degenerate:
            return math.inf if self.T_L == 0.0 else -math.inf
        return math.log10(self.T_R) - math.log10(self.T_L)


@dataclass(frozen=True)
class ExternalLoss:
    eta: float


# ---------------------------------------------------------------------------
# Sample model
# ---------------------------------------------------------------------------

def phases_from_sample(sample: ChiralSample, common_phase=0.0) -> BirefringencePhases:
    """Per-eigenmode phases with phi_R - phi_L = delta_gamma * C * l."""
    if sample.is_molar and sample.delta_gamma != 0.0:
        raise ChannelError(
            "optical rotation needs a mass concentration (g/cm3 or g/mL), "
            f"got {sample.concentration_unit!r}"
        )
    delta = sample.phase_rate * sample.concentration
    return BirefringencePhases(phi_L=common_phase - delta / 2.0, phi_R=common_phase + delta / 2.0)


def transmissions_from_sample(sample: ChiralSample) -> DichroismTransmissions:
    """Beer-Lambert transmissions T_i = 10^(-eps_i C l), l in cm."""
    if not sample.is_molar and (sample.eps_L or sample.eps_R):
        raise ChannelError(
            f"absorbance needs a molar concentration (mol/L), got {sample.concentration_unit!r}"
        )
    length = sample.path_length_cm
    t_l = _beer_lambert(sample.eps_L * sample.concentration * length)
    t_r = _beer_lambert(sample.eps_R * sample.concentration * length)
    trans = DichroismTransmissions(T_L=t_l, T_R=t_r)
    if trans.degenerate:
        logger.warning(
            "Sample absorbs an arm completely (T_L=%g, T_R=%g); variances will be infinite",
            t_l, t_r,
        )
    return trans


# ---------------------------------------------------------------------------
# Channels on Gaussian states
# ---------------------------------------------------------------------------

def birefringence_unitary(phases: BirefringencePhases) -> np.ndarray:
    """2x2 (H, V) unitary of the circular phase shifter."""
    w = CIRCULAR_FROM_LINEAR
    phase = np.diag([np.exp(1j * phases.phi_L), np.exp(1j * phases.phi_R)])
    return w.conj().T @ phase @ w


def birefringence_unitary_derivative(phases: BirefringencePhases) -> np.ndarray:
    """d/d(delta_phi) of ``birefringence_unitary`` at fixed common phase."""
    w = CIRCULAR_FROM_LINEAR
    phase = np.diag([-0.5j * np.exp(1j * phases.phi_L), 0.5j * np.exp(1j * phases.phi_R)])
    return w.conj().T @ phase @ w


def apply_birefringence(state: GaussianState, phases: BirefringencePhases) -> GaussianState:
    if state.labels != HV_LABELS:
        logger.debug("Birefringence applied to modes labelled %s", state.labels)
    return passive_transform(state, birefringence_unitary(phases))


def apply_dichroism(state: GaussianState, trans: DichroismTransmissions) -> GaussianState:
    for name, value in (("T_L", trans.T_L), ("T_R", trans.T_R)):
        if not 0.0 < value <= 1.0:
            raise ChannelError(f"{name} must lie in (0, 1], got {value!r}")
    return attenuate(state, (trans.T_L, trans.T_R))


def apply_external_loss(state: GaussianState, eta) -> GaussianState:
    if not 0.0 <= eta <= 1.0:
        raise ChannelError(f"eta must lie in [0, 1], got {eta!r}")
    if eta == 1.0:
        return state
    return attenuate(state, (eta, eta))


# ---------------------------------------------------------------------------
# Pipelines
# ---------------------------------------------------------------------------

def birefringence_output(probe: ProbeSpec, sample: ChiralSample, common_phase=0.0) -> GaussianState:
    """Probe -> birefringent sample -> detector loss, in (H, V) labels."""
    state = state_from_probe(probe, labels=HV_LABELS)
    state = apply_birefringence(state, phases_from_sample(sample, common_phase))
    return apply_external_loss(state, sample.eta)


def dichroism_output(probe: ProbeSpec, sample: ChiralSample) -> GaussianState:
    """Twin probe -> dichroic sample -> detector loss, in (L, R) labels.

    A coherent probe is read as the twin probe without squeezing.
    """
    state = state_from_probe(as_twin_probe(probe), labels=LR_LABELS)
    state = apply_dichroism(state, transmissions_from_sample(sample))
    return apply_external_loss(state, sample.eta)


def as_twin_probe(probe: ProbeSpec) -> ProbeSpec:
    if probe.family is ProbeFamily.TWIN_SQUEEZED:
        return probe
    if probe.family is ProbeFamily.COHERENT:
        return ProbeSpec(
            family=ProbeFamily.TWIN_SQUEEZED, alpha=probe.alpha, alpha_phase=probe.alpha_phase
        )
    raise ChannelError("the dichroism channel takes a twin (or coherent) probe")


def _beer_lambert(absorbance):
    # 10**(-A) underflows to 0.0 for A > ~323; never raises
    if absorbance > 400.0:
        return 0.0
    return 10.0 ** (-absorbance)
