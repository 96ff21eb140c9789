"""
Truncated Fock-space oracle

Builds the probes and channels as explicit two-mode number-state operators
(cutoff N per mode, flat index n1 * (N + 1) + n2) and evaluates the QFI via
the symmetric logarithmic derivative, plus exact outcome distributions of
the detection schemes. Used at small photon numbers to check the Gaussian
fast path; bright settings are out of reach by construction.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy import linalg, sparse
from scipy.special import gammaln, xlogy

from app_config import Config
from channels import (
    BirefringencePhases,
    DichroismTransmissions,
    ExternalLoss,
    as_twin_probe,
)
from gaussian_core import HV_LABELS, LR_LABELS, GaussianState
from models import ChiralSample, ProbeFamily, ProbeSpec

logger = logging.getLogger(__name__)

# Extra levels used while exponentiating generators, cut away afterwards.
_PAD = 20
_MAX_CUTOFF = 80
_MAX_PHOTONS = 1e4


class OracleError(RuntimeError):
    """Raised when the truncated representation cannot be trusted."""


# ---------------------------------------------------------------------------
# Density type
# ---------------------------------------------------------------------------

class FockDensity:
    """Two-mode state on (N+1)^2 levels, stored as a ket while it stays pure."""

    def __init__(self, cutoff, leak=0.0, labels=HV_LABELS, ket=None, matrix=None):
        if ket is None and matrix is None:
            raise OracleError("FockDensity needs a ket or a density matrix")
        self.cutoff = int(cutoff)
        self.leak = float(leak)
        self.labels = tuple(labels)
        self.ket = None if ket is None else np.asarray(ket, dtype=complex)
        self._matrix = None if matrix is None else np.asarray(matrix, dtype=complex)

    @property
    def dim(self) -> int:
        return (self.cutoff + 1) ** 2

    @property
    def is_pure(self) -> bool:
        return self.ket is not None

    @property
    def rho(self) -> np.ndarray:
        if self._matrix is None:
            self._matrix = np.outer(self.ket, self.ket.conj())
        return self._matrix

    @property
    def trace(self) -> float:
        if self.is_pure:
            return float(np.vdot(self.ket, self.ket).real)
        return float(np.trace(self._matrix).real)

    def purity(self) -> float:
        if self.is_pure:
            return self.trace ** 2
        return float(np.vdot(self._matrix, self._matrix).real)

    def validate(self, leak_tol=None):
        """Check hermiticity, trace range and positivity; raise OracleError on failure."""
        leak_tol = Config.ORACLE_LEAK_TOL if leak_tol is None else leak_tol
        trace = self.trace
        if not 1.0 - leak_tol <= trace <= 1.0 + 1e-10:
            raise OracleError(f"trace {trace!r} outside [1 - {leak_tol}, 1]")
        if self.is_pure:
            return
        rho = self._matrix
        if not np.allclose(rho, rho.conj().T, rtol=0.0, atol=1e-10):
            raise OracleError("density matrix is not Hermitian")
        smallest = float(linalg.eigvalsh(rho, subset_by_index=[0, 0])[0])
        if smallest < -1e-9:
            raise OracleError(f"density matrix has a negative eigenvalue {smallest!r}")

    def __repr__(self):
        kind = "pure" if self.is_pure else "mixed"
        return f"FockDensity(cutoff={self.cutoff}, {kind}, leak={self.leak:.3g}, labels={self.labels})"


@dataclass(frozen=True)
class OutcomeDistribution:
    """Finite outcome distribution; values are scalars or (n1, n2) rows."""

    values: np.ndarray
    probabilities: np.ndarray

    @property
    def total(self) -> float:
        return float(np.sum(self.probabilities))

    def normalized(self) -> OutcomeDistribution:
        return OutcomeDistribution(self.values, self.probabilities / self.total)

    def mean(self):
        return np.tensordot(self.probabilities, self.values, axes=1) / self.total

    def variance(self):
        mean = self.mean()
        return np.tensordot(self.probabilities, (self.values - mean) ** 2, axes=1) / self.total

    def sample(self, rng, size) -> np.ndarray:
        index = rng.choice(len(self.probabilities), size=size, p=self.probabilities / self.total)
        return self.values[index]


@dataclass(frozen=True)
class SldReport:
    qfi: float
    qfi_coarse_floor: float
    floor: float
    excluded_weight: float
    method: str = "sld"

    @property
    def floor_sensitivity(self) -> float:
        if self.qfi == 0.0:
            return abs(self.qfi_coarse_floor)
        return abs(self.qfi - self.qfi_coarse_floor) / abs(self.qfi)

    def to_dict(self):
        return {
            "qfi": self.qfi,
            "qfi_coarse_floor": self.qfi_coarse_floor,
            "floor": self.floor,
            "floor_sensitivity": self.floor_sensitivity,
            "excluded_weight": self.excluded_weight,
            "method": self.method,
        }


# ---------------------------------------------------------------------------
# Probes
# ---------------------------------------------------------------------------

def auto_cutoff(alpha, s) -> int:
    return int(math.ceil(8.0 * (abs(alpha) ** 2 + math.sinh(s) ** 2) + 20.0))


def single_mode_ket(alpha, s, theta, cutoff) -> np.ndarray:
    """D(alpha) S(s, theta) |0>, truncated to cutoff + 1 levels (not renormalized).

    S = exp(s (e^{-i theta} a^2 - e^{i theta} a^dag^2) / 2),  D = exp(alpha a^dag - alpha* a)
    """
    dim = cutoff + 1 + _PAD
    a = _annihilation(dim).toarray()
    ad = a.conj().T
    ket = np.zeros(dim, dtype=complex)
    ket[0] = 1.0
    if s:
        phase = complex(math.cos(theta), math.sin(theta))
        ket = linalg.expm(0.5 * s * (np.conj(phase) * (a @ a) - phase * (ad @ ad))) @ ket
    if alpha:
        alpha = complex(alpha)
        ket = linalg.expm(alpha * ad - np.conj(alpha) * a) @ ket
    return ket[:cutoff + 1]


def build_probe_fock(probe: ProbeSpec, cutoff=None, leak_tol=None) -> FockDensity:
    """Probe state in the truncated basis; rejects cutoffs that leak too much."""
    leak_tol = Config.ORACLE_LEAK_TOL if leak_tol is None else leak_tol
    if probe.photons >= _MAX_PHOTONS:
        raise OracleError(f"|alpha|^2={probe.photons:g} is beyond oracle scale")
    cutoff = auto_cutoff(probe.alpha, probe.s) if cutoff is None else int(cutoff)
    if cutoff > _MAX_CUTOFF:
        raise OracleError(f"cutoff {cutoff} exceeds the dense-matrix limit {_MAX_CUTOFF}")

    alpha, s, theta = probe.amplitude, probe.s, probe.theta
    if probe.family is ProbeFamily.TWIN_SQUEEZED:
        modes, labels = ((alpha, s, theta), (alpha, s, theta)), LR_LABELS
    else:
        modes, labels = ((alpha, s, theta), (0.0, s, theta)), HV_LABELS
    first, second = (single_mode_ket(a, sq, th, cutoff) for a, sq, th in modes)
    ket = np.kron(first, second)
    leak = 1.0 - float(np.vdot(ket, ket).real)
    if leak > leak_tol:
        raise OracleError(
            f"truncation at cutoff {cutoff} loses {leak:.3g} of the probe (limit {leak_tol:g})"
        )
    logger.debug("Built %s probe at cutoff %d (leak %.3g)", probe.family.value, cutoff, leak)
    return FockDensity(cutoff=cutoff, leak=max(leak, 0.0), labels=labels, ket=ket)


# ---------------------------------------------------------------------------
# Channels
# ---------------------------------------------------------------------------

def apply_channel_fock(rho: FockDensity, channel, leak_tol=None) -> FockDensity:
    """Apply BirefringencePhases, DichroismTransmissions or ExternalLoss."""
    leak_tol = Config.ORACLE_LEAK_TOL if leak_tol is None else leak_tol
    if isinstance(channel, BirefringencePhases):
        unitary = _rotation_unitary(rho.cutoff, -channel.delta_phi / 2.0, channel.common_phase)
        out = _apply_unitary(rho, unitary)
    elif isinstance(channel, DichroismTransmissions):
        out = _apply_loss(rho, (channel.T_L, channel.T_R))
    elif isinstance(channel, ExternalLoss):
        out = _apply_loss(rho, (channel.eta, channel.eta))
    else:
        raise OracleError(f"unsupported channel {channel!r}")
    out.leak = max(1.0 - out.trace, 0.0)
    if out.leak > leak_tol:
        raise OracleError(f"trace deficit grew to {out.leak:.3g} (limit {leak_tol:g})")
    return out


def rotate_for_detection(rho: FockDensity, xi) -> FockDensity:
    """Half-waveplate at xi: mode operators become (b1, -b2) of the balanced scheme."""
    return _apply_unitary(rho, _rotation_unitary(rho.cutoff, xi, 0.0), labels=("b1", "b2"))


# ---------------------------------------------------------------------------
# Moments and overlaps
# ---------------------------------------------------------------------------

def moments_fock(rho: FockDensity) -> GaussianState:
    """First and second moments of the truncated state, as a GaussianState."""
    a1, a2 = _mode_operators(rho.cutoff)
    ops = (a1, a2)
    norm = rho.trace
    d = np.array([_expect(rho, op) for op in ops]) / norm
    normal = np.empty((2, 2), dtype=complex)
    anomalous = np.empty((2, 2), dtype=complex)
    for i in range(2):
        for j in range(2):
            normal[i, j] = (2.0 * _expect(rho, ops[j].conj().T @ ops[i]) / norm
                            + (1.0 if i == j else 0.0) - 2.0 * d[i] * np.conj(d[j]))
            anomalous[i, j] = 2.0 * _expect(rho, ops[i] @ ops[j]) / norm - 2.0 * d[i] * d[j]
    normal = (normal + normal.conj().T) / 2.0
    anomalous = (anomalous + anomalous.T) / 2.0
    return GaussianState.from_blocks(d, normal, anomalous, labels=rho.labels)


def fidelity_fock(first: FockDensity, second: FockDensity) -> float:
    """Uhlmann fidelity (Tr sqrt(sqrt(r) s sqrt(r)))^2."""
    if first.is_pure and second.is_pure:
        return float(abs(np.vdot(first.ket, second.ket)) ** 2)
    if first.is_pure or second.is_pure:
        pure, mixed = (first, second) if first.is_pure else (second, first)
        return float(np.real(np.vdot(pure.ket, mixed.rho @ pure.ket)))
    p, v = linalg.eigh(first.rho)
    root = (v * np.sqrt(np.clip(p, 0.0, None))) @ v.conj().T
    spectrum = linalg.eigvalsh(root @ second.rho @ root)
    return float(np.sum(np.sqrt(np.clip(spectrum, 0.0, None))) ** 2)


def qfi_fidelity(rho_minus: FockDensity, rho_plus: FockDensity, dC) -> float:
    """Bures estimate 8 (1 - sqrt(F)) / (2 dC)^2 from states at C -/+ dC."""
    fidelity = min(fidelity_fock(rho_minus, rho_plus), 1.0)
    return 8.0 * (1.0 - math.sqrt(fidelity)) / (2.0 * dC) ** 2


# ---------------------------------------------------------------------------
# QFI
# ---------------------------------------------------------------------------

def sld_analysis(family: Callable[[float], FockDensity], concentration, dC=None,
                 floor=None) -> SldReport:
    """QFI of a family C -> FockDensity with floor sensitivity diagnostics.

    Pure families use 4 (<dpsi|dpsi> - |<psi|dpsi>|^2); mixed ones use
    2 sum |<j|drho|k>|^2 / (p_j + p_k) over pairs above floor * max(p).
    Derivatives are Richardson-extrapolated central differences.
    """
    dC = Config.ORACLE_DC_SCALE * max(abs(concentration), 1.0) if dC is None else dC
    floor = Config.SLD_FLOOR if floor is None else floor
    center = family(concentration)

    if center.is_pure:
        dpsi = _richardson(lambda c: family(c).ket, concentration, dC)
        psi = center.ket
        qfi = 4.0 * float(np.real(np.vdot(dpsi, dpsi)) - abs(np.vdot(psi, dpsi)) ** 2)
        return SldReport(qfi=qfi, qfi_coarse_floor=qfi, floor=floor, excluded_weight=0.0,
                         method="pure")

    drho = _richardson(lambda c: family(c).rho, concentration, dC)
    p, v = linalg.eigh(center.rho)
    projected = np.abs(v.conj().T @ drho @ v) ** 2
    denominator = p[:, None] + p[None, :]
    scale = float(np.max(p))

    qfi, excluded = _sld_sum(projected, denominator, floor * scale)
    coarse, _ = _sld_sum(projected, denominator, 100.0 * floor * scale)
    report = SldReport(qfi=qfi, qfi_coarse_floor=coarse, floor=floor, excluded_weight=excluded)
    if report.floor_sensitivity > 1e-3:
        logger.warning(
            "SLD QFI moves by %.3g when the spectral floor is raised 100x (excluded weight %.3g)",
            report.floor_sensitivity, excluded,
        )
    return report


def qfi_sld(family: Callable[[float], FockDensity], concentration, dC=None, floor=None) -> float:
    return sld_analysis(family, concentration, dC, floor).qfi


def classical_fisher_fock(p_minus, p_plus, dC, p_center, floor=1e-15) -> float:
    """Fisher information sum (dp)^2 / p of a distribution known at C -/+ dC."""
    dp = (np.asarray(p_plus) - np.asarray(p_minus)) / (2.0 * dC)
    p_center = np.asarray(p_center)
    keep = p_center > floor
    return float(np.sum(dp[keep] ** 2 / p_center[keep]))


# ---------------------------------------------------------------------------
# Measurements
# ---------------------------------------------------------------------------

def balanced_distribution_fock(rho: FockDensity, xi) -> OutcomeDistribution:
    """Exact distribution of S = n_b1 - n_b2 after the waveplate at xi."""
    joint = _number_probabilities(rotate_for_detection(rho, xi))
    n1, n2 = _number_grid(rho.cutoff)
    cutoff = rho.cutoff
    probs = np.bincount((n1 - n2 + cutoff), weights=joint, minlength=2 * cutoff + 1)
    return OutcomeDistribution(values=np.arange(-cutoff, cutoff + 1), probabilities=probs)


def counts_distribution_fock(rho: FockDensity) -> OutcomeDistribution:
    """Joint distribution of (n1, n2) photon counts."""
    n1, n2 = _number_grid(rho.cutoff)
    return OutcomeDistribution(values=np.stack([n1, n2], axis=1),
                               probabilities=_number_probabilities(rho))


def measurement_distribution_fock(rho: FockDensity, observable, xi=None) -> OutcomeDistribution:
    """``observable`` is "balanced" (needs xi) or "counts"."""
    if observable == "balanced":
        if xi is None:
            raise OracleError("balanced detection needs a waveplate angle xi")
        return balanced_distribution_fock(rho, xi)
    if observable == "counts":
        return counts_distribution_fock(rho)
    raise OracleError(f"unknown observable {observable!r}")


# ---------------------------------------------------------------------------
# Sample families
# ---------------------------------------------------------------------------

def birefringence_family_fock(probe: ProbeSpec, sample: ChiralSample, common_phase=0.0,
                              cutoff=None):
    source = build_probe_fock(probe, cutoff)
    rate = sample.phase_rate

    def family(concentration):
        delta = rate * concentration
        phases = BirefringencePhases(common_phase - delta / 2.0, common_phase + delta / 2.0)
        out = apply_channel_fock(source, phases)
        if sample.eta < 1.0:
            out = apply_channel_fock(out, ExternalLoss(sample.eta))
        return out

    return family


def dichroism_family_fock(probe: ProbeSpec, sample: ChiralSample, cutoff=None):
    source = build_probe_fock(as_twin_probe(probe), cutoff)
    length = sample.path_length_cm

    def family(concentration):
        if concentration < 0:
            raise OracleError("dichroism oracle needs C >= dC (transmissions above 1)")
        trans = DichroismTransmissions(10.0 ** (-sample.eps_L * concentration * length),
                                       10.0 ** (-sample.eps_R * concentration * length))
        out = apply_channel_fock(source, trans)
        if sample.eta < 1.0:
            out = apply_channel_fock(out, ExternalLoss(sample.eta))
        return out

    return family


def oracle_qfi_birefringence(probe: ProbeSpec, sample: ChiralSample, common_phase=0.0,
                             cutoff=None, dC=None) -> SldReport:
    family = birefringence_family_fock(probe, sample, common_phase, cutoff)
    return sld_analysis(family, sample.concentration, dC)


def oracle_qfi_dichroism(probe: ProbeSpec, sample: ChiralSample, cutoff=None, dC=None) -> SldReport:
    family = dichroism_family_fock(probe, sample, cutoff)
    return sld_analysis(family, sample.concentration, dC)


@dataclass(frozen=True)
class BalancedResponse:
    distribution: OutcomeDistribution
    mean: float
    variance: float
    dmean_dC: float
    cfi: float


def balanced_response_fock(probe: ProbeSpec, sample: ChiralSample, xi, common_phase=0.0,
                           cutoff=None, dC=None) -> BalancedResponse:
    """Exact balanced-detection statistics and their Fisher information at C."""
    family = birefringence_family_fock(probe, sample, common_phase, cutoff)
    concentration = sample.concentration
    dC = Config.ORACLE_DC_SCALE * max(abs(concentration), 1.0) if dC is None else dC

    def probabilities(c):
        return balanced_distribution_fock(family(c), xi).probabilities

    center = balanced_distribution_fock(family(concentration), xi)
    dp = _richardson(probabilities, concentration, dC)
    keep = center.probabilities > 1e-15
    cfi = float(np.sum(dp[keep] ** 2 / center.probabilities[keep]))
    return BalancedResponse(
        distribution=center,
        mean=float(center.mean()),
        variance=float(center.variance()),
        dmean_dC=float(dp @ center.values),
        cfi=cfi,
    )


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

@lru_cache(maxsize=8)
def _annihilation(dim):
    return sparse.diags(np.sqrt(np.arange(1, dim)), 1, shape=(dim, dim), format="csr",
                        dtype=complex)


@lru_cache(maxsize=4)
def _mode_operators(cutoff):
    a = _annihilation(cutoff + 1)
    eye = sparse.identity(cutoff + 1, dtype=complex, format="csr")
    return sparse.kron(a, eye, format="csr"), sparse.kron(eye, a, format="csr")


@lru_cache(maxsize=4)
def _number_grid(cutoff):
    index = np.arange((cutoff + 1) ** 2)
    return index // (cutoff + 1), index % (cutoff + 1)


@lru_cache(maxsize=64)
def _rotation_unitary(cutoff, angle, phase_per_photon):
    """exp(i phase N) exp(angle J) with J = a1^dag a2 - a2^dag a1.

    Built block by block over total photon number K; blocks with K > cutoff
    are computed in full and then restricted to the truncated basis.
    """
    size = cutoff + 1
    rows, cols, vals = [], [], []
    for total in range(2 * cutoff + 1):
        j = np.arange(total)
        generator = np.zeros((total + 1, total + 1))
        upper = np.sqrt((j + 1.0) * (total - j))
        generator[j + 1, j] = upper
        generator[j, j + 1] = -upper
        block = linalg.expm(angle * generator) * np.exp(1j * phase_per_photon * total)
        keep = np.arange(max(0, total - cutoff), min(total, cutoff) + 1)
        flat = keep * size + (total - keep)
        sub = block[np.ix_(keep, keep)]
        r, c = np.meshgrid(flat, flat, indexing="ij")
        rows.append(r.ravel())
        cols.append(c.ravel())
        vals.append(sub.ravel())
    dim = size * size
    return sparse.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
    )


def _apply_unitary(rho: FockDensity, unitary, labels=None) -> FockDensity:
    labels = labels or rho.labels
    if rho.is_pure:
        return FockDensity(rho.cutoff, rho.leak, labels, ket=unitary @ rho.ket)
    half = unitary @ rho.rho
    return FockDensity(rho.cutoff, rho.leak, labels, matrix=(unitary @ half.conj().T).conj().T)


def _loss_weights(cutoff, transmission):
    """w[k, n] = sqrt(C(n, k) T^(n-k) (1-T)^k): amplitude of losing k of n photons."""
    n = np.arange(cutoff + 1, dtype=float)
    k = n[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        log_w2 = (gammaln(n + 1.0) - gammaln(k + 1.0) - gammaln(np.maximum(n - k, 0.0) + 1.0)
                  + xlogy(n - k, transmission) + xlogy(k, 1.0 - transmission))
        weights = np.exp(0.5 * log_w2)
    return np.where(n[None, :] >= k, weights, 0.0)


def _apply_loss(rho: FockDensity, transmissions) -> FockDensity:
    for value in transmissions:
        if not 0.0 <= value <= 1.0:
            raise OracleError(f"transmission {value!r} outside [0, 1]")
    size = rho.cutoff + 1
    tensor = rho.rho.reshape(size, size, size, size)
    for axis, transmission in enumerate(transmissions):
        if transmission == 1.0:
            continue
        tensor = _damp_mode(tensor, axis, _loss_weights(rho.cutoff, transmission))
    return FockDensity(rho.cutoff, rho.leak, rho.labels, matrix=tensor.reshape(size ** 2, size ** 2))


def _damp_mode(tensor, axis, weights):
    """Kraus sum over photons lost from one mode of a (n1, n2, m1, m2) tensor."""
    size = tensor.shape[0]
    out = np.zeros_like(tensor)
    for k in range(size):
        wk = weights[k, k:]
        if not np.any(wk):
            continue
        if axis == 0:
            out[:size - k, :, :size - k, :] += (
                wk[:, None, None, None] * wk[None, None, :, None] * tensor[k:, :, k:, :]
            )
        else:
            out[:, :size - k, :, :size - k] += (
                wk[None, :, None, None] * wk[None, None, None, :] * tensor[:, k:, :, k:]
            )
    return out


def _expect(rho: FockDensity, operator) -> complex:
    if rho.is_pure:
        return complex(np.vdot(rho.ket, operator @ rho.ket))
    return complex(operator.multiply(rho.rho.T).sum())


def _number_probabilities(rho: FockDensity) -> np.ndarray:
    if rho.is_pure:
        return np.abs(rho.ket) ** 2
    return np.clip(np.real(np.diagonal(rho.rho)), 0.0, None)


def _richardson(function, center, step):
    coarse = (function(center + step) - function(center - step)) / (2.0 * step)
    fine = (function(center + step / 2.0) - function(center - step / 2.0)) / step
    return (4.0 * fine - coarse) / 3.0


def _sld_sum(projected, denominator, threshold):
    keep = denominator > threshold
    qfi = 2.0 * float(np.sum(projected[keep] / denominator[keep]))
    excluded = float(np.sum(projected[~keep]))
    return qfi, excluded
