"""
Two-mode Gaussian states

States live in the complex ordering A = (a1, a2, a1^dag, a2^dag). The
covariance matrix is normalized so that the vacuum has Sigma = identity:

    Sigma_ij = <{dA_i, dA_j^dag}>,   d_i = <A_i>

Mode labels depend on context: (H, V) for birefringence, (L, R) for
dichroism. States are immutable; every transformation returns a new state
built from its top-half blocks, so conjugation symmetry holds bit for bit.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from app_config import Config
from models import ProbeFamily, ProbeSpec

logger = logging.getLogger(__name__)

MODE_ORDERING = ("mode1", "mode2", "mode1*", "mode2*")
HV_LABELS = ("H", "V")
LR_LABELS = ("L", "R")

SYMPLECTIC_FORM = np.diag([1.0, 1.0, -1.0, -1.0]).astype(complex)


class StateError(ValueError):
    """Raised for malformed state data or invalid probe parameters."""


# ---------------------------------------------------------------------------
# State type
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GaussianState:
    d: np.ndarray
    Sigma: np.ndarray
    labels: tuple = HV_LABELS

    def __post_init__(self):
        d = np.array(self.d, dtype=complex).reshape(-1)
        sigma = np.array(self.Sigma, dtype=complex)
        if d.shape != (4,) or sigma.shape != (4, 4):
            raise StateError(
                f"expected d of shape (4,) and Sigma of shape (4, 4), got {d.shape} and {sigma.shape}"
            )
        if not (np.all(np.isfinite(d)) and np.all(np.isfinite(sigma))):
            raise StateError("state contains non-finite entries")
        d.setflags(write=False)
        sigma.setflags(write=False)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "Sigma", sigma)
        object.__setattr__(self, "labels", tuple(self.labels))

    @classmethod
    def from_blocks(cls, amplitudes, normal, anomalous, labels=HV_LABELS) -> GaussianState:
        """Assemble a state from the mode amplitudes and the 2x2 blocks.

        ``normal`` is the upper-left block N (Hermitian) and ``anomalous`` the
        upper-right block A (symmetric); the lower half is filled by conjugation.
        """
        amplitudes = np.asarray(amplitudes, dtype=complex)
        normal = np.asarray(normal, dtype=complex)
        anomalous = np.asarray(anomalous, dtype=complex)
        d = np.concatenate([amplitudes, np.conj(amplitudes)])
        sigma = np.block([[normal, anomalous], [np.conj(anomalous), np.conj(normal)]])
        return cls(d=d, Sigma=sigma, labels=labels)

    @property
    def amplitudes(self) -> np.ndarray:
        return self.d[:2]

    @property
    def normal_block(self) -> np.ndarray:
        return self.Sigma[:2, :2]

    @property
    def anomalous_block(self) -> np.ndarray:
        return self.Sigma[:2, 2:]

    def relabel(self, labels) -> GaussianState:
        return GaussianState(d=self.d, Sigma=self.Sigma, labels=labels)

    def __repr__(self):
        return (
            f"GaussianState(labels={self.labels}, d={np.round(self.d[:2], 6).tolist()}, "
            f"photons={mean_photons(self):.6g})"
        )


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------

def vacuum(labels=HV_LABELS) -> GaussianState:
    return GaussianState(d=np.zeros(4, dtype=complex), Sigma=np.eye(4, dtype=complex), labels=labels)


def make_polarization_squeezed_probe(alpha, s, theta, labels=HV_LABELS) -> GaussianState:
    """Displaced squeezed state in mode 1, squeezed vacuum in mode 2.

    Both modes carry the squeezing (s, theta); only mode 1 is displaced.
    """
    alpha, s, theta = _check_probe_args(alpha, s, theta)
    normal, anomalous = _squeezing_blocks(s, theta)
    return GaussianState.from_blocks([alpha, 0.0], normal, anomalous, labels=labels)


def make_twin_amplitude_squeezed_probe(alpha, s, theta, labels=LR_LABELS) -> GaussianState:
    """Two identical displaced squeezed modes, labelled (L, R) by default."""
    alpha, s, theta = _check_probe_args(alpha, s, theta)
    normal, anomalous = _squeezing_blocks(s, theta)
    return GaussianState.from_blocks([alpha, alpha], normal, anomalous, labels=labels)


def state_from_probe(probe: ProbeSpec, labels=None) -> GaussianState:
    """Build the pre-channel state for a probe description."""
    if probe.family is ProbeFamily.TWIN_SQUEEZED:
        return make_twin_amplitude_squeezed_probe(
            probe.amplitude, probe.s, probe.theta, labels=labels or LR_LABELS
        )
    return make_polarization_squeezed_probe(
        probe.amplitude, probe.s, probe.theta, labels=labels or HV_LABELS
    )


# ---------------------------------------------------------------------------
# Invariants
# ---------------------------------------------------------------------------

def check_conjugation_symmetry(state: GaussianState, atol=0.0) -> bool:
    d, sigma = state.d, state.Sigma
    checks = (
        (d[2:], np.conj(d[:2])),
        (sigma[2:, 2:], np.conj(sigma[:2, :2])),
        (sigma[:2, 2:], np.conj(sigma[2:, :2])),
    )
    if atol:
        return all(np.allclose(a, b, rtol=0.0, atol=atol) for a, b in checks)
    return all(np.array_equal(a, b) for a, b in checks)


def symplectic_eigenvalues(state: GaussianState):
    """Return (lambda1, lambda2), the symplectic spectrum sorted descending.

    Uses the Hermitian form Sigma^1/2 K Sigma^1/2 when Sigma is positive
    definite and falls back to the raw spectrum of K Sigma otherwise, so
    non-physical intermediate states still get a value.
    """
    sigma = state.Sigma
    w, v = linalg.eigh(sigma)
    if np.min(w) > 0:
        root = (v * np.sqrt(w)) @ v.conj().T
        spectrum = np.abs(linalg.eigvalsh(root @ SYMPLECTIC_FORM @ root))
    else:
        spectrum = np.abs(linalg.eigvals(SYMPLECTIC_FORM @ sigma))
    spectrum = np.sort(spectrum)[::-1]
    return float(spectrum[0]), float(spectrum[2])


def is_physical(state: GaussianState, tol=None) -> bool:
    tol = Config.PHYSICALITY_TOL if tol is None else tol
    if np.min(linalg.eigvalsh(state.Sigma)) <= 0:
        return False
    return symplectic_eigenvalues(state)[1] >= 1.0 - tol


def purity(state: GaussianState) -> float:
    """Tr(rho^2) = 1 / (lambda1 * lambda2)."""
    lam1, lam2 = symplectic_eigenvalues(state)
    return 1.0 / (lam1 * lam2)


# ---------------------------------------------------------------------------
# Photon statistics
# ---------------------------------------------------------------------------

def mean_photons(state: GaussianState) -> float:
    d, sigma = state.d, state.Sigma
    coherent = float(np.sum(np.abs(d[:2]) ** 2))
    thermal = float(np.sum(sigma.diagonal()[:2].real - 1.0)) / 2.0
    return coherent + thermal


def photon_number_moments(state: GaussianState, mode, exact=True):
    """Return (mean, variance) of n = a^dag a for mode 0 or 1."""
    means, cov = photon_number_covariance(state, exact=exact)
    return float(means[mode]), float(cov[mode, mode])


def photon_number_covariance(state: GaussianState, exact=True):
    """Mean photon numbers and their 2x2 covariance matrix.

    Cov(n_i, n_j) = Re(b_i* b_j N_ij) + Re(b_i* b_j* A_ij)
                    + (|N_ij|^2 + |A_ij|^2 - delta_ij) / 4

    with b the mode amplitudes. ``exact=False`` keeps only the terms linear
    in the amplitudes (the bright limit).
    """
    beta = state.d[:2]
    normal = state.normal_block
    anomalous = state.anomalous_block

    means = np.abs(beta) ** 2 + (normal.diagonal().real - 1.0) / 2.0
    bc = np.conj(beta)
    cov = np.real(np.outer(bc, beta) * normal) + np.real(np.outer(bc, bc) * anomalous)
    if exact:
        cov = cov + (np.abs(normal) ** 2 + np.abs(anomalous) ** 2 - np.eye(2)) / 4.0
    return means, cov


def photon_number_mean_derivative(state: GaussianState, d_dot, sigma_dot):
    """Derivative of the two mean photon numbers along (d_dot, Sigma_dot)."""
    beta = state.d[:2]
    return 2.0 * np.real(np.conj(beta) * d_dot[:2]) + np.real(np.diagonal(sigma_dot)[:2]) / 2.0


# ---------------------------------------------------------------------------
# Linear maps
# ---------------------------------------------------------------------------

def passive_transform(state: GaussianState, unitary, labels=None) -> GaussianState:
    """Apply a 2x2 passive mode map a -> U a (beamsplitters, phases, waveplates)."""
    u = np.asarray(unitary, dtype=complex)
    normal = u @ state.normal_block @ u.conj().T
    anomalous = u @ state.anomalous_block @ u.T
    return GaussianState.from_blocks(
        u @ state.amplitudes, normal, anomalous, labels=labels or state.labels
    )


def attenuate(state: GaussianState, transmissions) -> GaussianState:
    """Per-mode pure-loss channel with intensity transmissions (T1, T2).

    No range check: callers validate. Finite-difference families evaluate
    this slightly outside [0, 1].
    """
    x = np.sqrt(np.asarray(transmissions, dtype=float))
    scale = np.outer(x, x)
    normal = scale * state.normal_block + np.diag(1.0 - x ** 2)
    anomalous = scale * state.anomalous_block
    return GaussianState.from_blocks(x * state.amplitudes, normal, anomalous, labels=state.labels)


def block_diagonal(unitary) -> np.ndarray:
    """Full 4x4 map blockdiag(U, U*) acting on the ordering A."""
    u = np.asarray(unitary, dtype=complex)
    zero = np.zeros((2, 2), dtype=complex)
    return np.block([[u, zero], [zero, np.conj(u)]])


# ---------------------------------------------------------------------------
# Squeezing level
# ---------------------------------------------------------------------------

def squeezing_db(s) -> float:
    """Squeezing level in dB: 10 log10(exp(2s))."""
    return 20.0 * s / math.log(10.0)


def squeezing_from_db(db) -> float:
    return db * math.log(10.0) / 20.0


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def _check_probe_args(alpha, s, theta):
    try:
        alpha = complex(alpha)
        s = float(s)
        theta = float(theta)
    except (TypeError, ValueError) as exc:
        raise StateError(f"probe arguments must be numeric: {exc}") from exc
    if not (math.isfinite(alpha.real) and math.isfinite(alpha.imag)
            and math.isfinite(s) and math.isfinite(theta)):
        raise StateError("probe arguments must be finite")
    if s < 0:
        raise StateError(f"squeezing factor must be >= 0, got {s!r}")
    return alpha, s, theta


def _squeezing_blocks(s, theta):
    if s == 0.0:
        return np.eye(2, dtype=complex), np.zeros((2, 2), dtype=complex)
    c = math.cosh(2.0 * s)
    off = -math.sinh(2.0 * s) * complex(math.cos(theta), math.sin(theta))
    return np.diag([c, c]).astype(complex), np.diag([off, off])
