"""
Metrology

Quantum Fisher information of two-mode Gaussian states, the closed-form
birefringence terms, detection models (balanced polarimetry, analyzer,
per-arm intensities and their log ratio) and the Cramer-Rao chain

    Var(C_est) >= 1 / (nu F) >= 1 / (nu Q)

Derivatives are always taken with respect to the sample concentration C, in
the sample's own concentration unit, so QFI values carry units of C^-2.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import linalg

from app_config import Config
from channels import (
    BirefringencePhases,
    DichroismTransmissions,
    apply_birefringence,
    apply_dichroism,
    apply_external_loss,
    birefringence_output,
    birefringence_unitary,
    birefringence_unitary_derivative,
    dichroism_output,
    phases_from_sample,
    transmissions_from_sample,
    as_twin_probe,
)
from gaussian_core import (
    HV_LABELS,
    LR_LABELS,
    SYMPLECTIC_FORM,
    GaussianState,
    attenuate,
    block_diagonal,
    passive_transform,
    photon_number_covariance,
    photon_number_mean_derivative,
    state_from_probe,
    symplectic_eigenvalues,
)
from models import ChiralSample, ProbeFamily, ProbeSpec

logger = logging.getLogger(__name__)

LN10 = math.log(10.0)

# Condition number above which Sigma counts as singular.
_SINGULAR_COND = 1e12
# Relative slope below which a response is treated as flat.
_FLAT_SLOPE = 1e-12


class EstimationError(ValueError):
    """Raised when the requested estimate is impossible for the configuration."""


class QfiComputationError(ValueError):
    """Raised when the Gaussian QFI cannot be evaluated (singular covariance)."""


# ---------------------------------------------------------------------------
# Result types
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ParamDerivative:
    d_dot: np.ndarray
    Sigma_dot: np.ndarray
    method: str = "analytic"
    step: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "d_dot", np.asarray(self.d_dot, dtype=complex))
        object.__setattr__(self, "Sigma_dot", np.asarray(self.Sigma_dot, dtype=complex))


@dataclass(frozen=True)
class QfiReport:
    qfi_numerical: float
    sql: float
    qfi_closed_form: Optional[float] = None
    vacuum_term: Optional[float] = None
    bright_term: Optional[float] = None
    bright_term_printed: Optional[float] = None
    trials: int = 1

    @property
    def advantage_qfi(self) -> float:
        """Closed-form QFI over the SQL (numerical QFI when no closed form exists)."""
        value = self.qfi_closed_form if self.qfi_closed_form is not None else self.qfi_numerical
        return _ratio(value, self.sql)

    @property
    def advantage_precision(self) -> float:
        return math.sqrt(self.advantage_qfi)

    @property
    def advantage_bright(self) -> float:
        if self.bright_term is None:
            return self.advantage_qfi
        return _ratio(self.bright_term, self.sql)

    @property
    def advantage_numerical(self) -> float:
        return _ratio(self.qfi_numerical, self.sql)

    @property
    def qcrb_variance(self) -> float:
        return _reciprocal(self.trials * self.qfi_numerical)

    def to_dict(self):
        return {
            "qfi_numerical": self.qfi_numerical,
            "qfi_closed_form": self.qfi_closed_form,
            "vacuum_term": self.vacuum_term,
            "bright_term": self.bright_term,
            "bright_term_printed": self.bright_term_printed,
            "sql": self.sql,
            "advantage_qfi": self.advantage_qfi,
            "advantage_precision": self.advantage_precision,
            "advantage_numerical": self.advantage_numerical,
            "qcrb_variance": self.qcrb_variance,
            "trials": self.trials,
        }


@dataclass(frozen=True)
class MeasurementStats:
    mean: float
    variance: float
    dmean_dC: float
    cfi_gaussian: float
    propagated_variance: float
    degenerate: bool = False
    bright_limit_ok: bool = True

    @classmethod
    def from_moments(cls, mean, variance, dmean_dC, slope_scale=None, bright_limit_ok=True):
        mean, variance, dmean_dC = float(mean), float(variance), float(dmean_dC)
        if slope_scale is not None and abs(dmean_dC) <= _FLAT_SLOPE * slope_scale:
            dmean_dC = 0.0
        if dmean_dC == 0.0 or not math.isfinite(variance):
            return cls(mean, variance, dmean_dC, 0.0, math.inf, True, bright_limit_ok)
        if variance <= 0.0:
            return cls(mean, variance, dmean_dC, math.inf, 0.0, False, bright_limit_ok)
        slope2 = dmean_dC * dmean_dC
        return cls(mean, variance, dmean_dC, slope2 / variance, variance / slope2,
                   False, bright_limit_ok)

    def to_dict(self):
        return {
            "mean": self.mean,
            "variance": self.variance,
            "dmean_dC": self.dmean_dC,
            "cfi_gaussian": self.cfi_gaussian,
            "propagated_variance": self.propagated_variance,
            "degenerate": self.degenerate,
            "bright_limit_ok": self.bright_limit_ok,
        }


@dataclass(frozen=True)
class BoundChain:
    crb: float
    qcrb: float
    ordered: bool
    inconsistency: Optional[str] = None

    @property
    def saturation(self) -> float:
        """qcrb / crb: 1 when the measurement extracts all available information."""
        if math.isinf(self.crb):
            return 0.0
        return _ratio(self.qcrb, self.crb)

    def to_dict(self):
        return {
            "crb": self.crb,
            "qcrb": self.qcrb,
            "ordered": self.ordered,
            "saturation": self.saturation,
            "inconsistency": self.inconsistency,
        }


# ---------------------------------------------------------------------------
# Gaussian QFI
# ---------------------------------------------------------------------------

def qfi_two_mode_gaussian(state: GaussianState, deriv: ParamDerivative, clamp=None) -> float:
    """QFI of a two-mode Gaussian family.

        Q = 1/2 vec(dS)^dag M^-1 vec(dS) + 2 dd^dag S^-1 dd
        M = conj(S) (x) S - K (x) K

    M is singular for pure states; there S and dS are scaled so that the
    smallest symplectic eigenvalue sits at 1 + clamp.
    """
    clamp = Config.PURE_STATE_CLAMP if clamp is None else clamp
    sigma = state.Sigma
    _require_invertible(sigma)

    displacement = _displacement_term(sigma, deriv.d_dot)
    if not np.any(deriv.Sigma_dot):
        return displacement

    lam_min = symplectic_eigenvalues(state)[1]
    floor = 1.0 + clamp
    scale = floor / lam_min if lam_min < floor else 1.0
    scaled = scale * sigma
    kernel = np.kron(np.conj(scaled), scaled) - np.kron(SYMPLECTIC_FORM, SYMPLECTIC_FORM)
    vec = (scale * deriv.Sigma_dot).reshape(-1, order="F")
    try:
        solution = linalg.solve(kernel, vec)
    except linalg.LinAlgError as exc:
        raise QfiComputationError(f"covariance term is singular: {exc}") from exc
    covariance = 0.5 * float(np.real(np.vdot(vec, solution)))
    return covariance + displacement


def qfi_pure_gaussian(state: GaussianState, deriv: ParamDerivative) -> float:
    """Pure-state QFI: 1/4 Tr[(S^-1 dS)^2] + 2 dd^dag S^-1 dd."""
    sigma = state.Sigma
    _require_invertible(sigma)
    product = linalg.solve(sigma, deriv.Sigma_dot)
    covariance = 0.25 * float(np.real(np.trace(product @ product)))
    return covariance + _displacement_term(sigma, deriv.d_dot)


# ---------------------------------------------------------------------------
# Derivatives
# ---------------------------------------------------------------------------

def analytic_derivatives_birefringence(probe: ProbeSpec, sample: ChiralSample,
                                       common_phase=0.0) -> ParamDerivative:
    """d/dC of the birefringence output at fixed common phase."""
    state = state_from_probe(probe, labels=HV_LABELS)
    phases = phases_from_sample(sample, common_phase)
    forward = block_diagonal(birefringence_unitary(phases))
    slope = block_diagonal(birefringence_unitary_derivative(phases)) * sample.phase_rate
    eta = sample.eta
    d_dot = math.sqrt(eta) * (slope @ state.d)
    sigma_dot = eta * (slope @ state.Sigma @ forward.conj().T + forward @ state.Sigma @ slope.conj().T)
    return ParamDerivative(d_dot=d_dot, Sigma_dot=sigma_dot, method="analytic")


def analytic_derivatives_dichroism(probe: ProbeSpec, sample: ChiralSample) -> ParamDerivative:
    """d/dC of the dichroism output.

    With x_i = sqrt(eta T_i), dx_i/dC = g_i x_i and g_i = -ln10 eps_i l / 2, so
    dd = G d and dSigma = G (Sigma - I) + (Sigma - I) G.
    """
    state = dichroism_output(probe, sample)
    g = -LN10 * sample.path_length_cm * np.array([sample.eps_L, sample.eps_R]) / 2.0
    gain = np.diag(np.concatenate([g, g])).astype(complex)
    excess = state.Sigma - np.eye(4)
    return ParamDerivative(
        d_dot=gain @ state.d,
        Sigma_dot=gain @ excess + excess @ gain,
        method="analytic",
    )


def central_difference_derivative(family: Callable[[float], GaussianState], concentration,
                                  h=None) -> ParamDerivative:
    """Richardson-extrapolated central difference of a state family C -> state."""
    h = Config.FD_STEP_SCALE * max(abs(concentration), 1.0) if h is None else h

    def difference(step):
        plus, minus = family(concentration + step), family(concentration - step)
        return (plus.d - minus.d) / (2.0 * step), (plus.Sigma - minus.Sigma) / (2.0 * step)

    coarse_d, coarse_sigma = difference(h)
    fine_d, fine_sigma = difference(h / 2.0)
    return ParamDerivative(
        d_dot=(4.0 * fine_d - coarse_d) / 3.0,
        Sigma_dot=(4.0 * fine_sigma - coarse_sigma) / 3.0,
        method="central-difference",
        step=h,
    )


def birefringence_family(probe: ProbeSpec, sample: ChiralSample, common_phase=0.0):
    """C -> output state, defined for any real C (finite differences cross C = 0)."""
    source = state_from_probe(probe, labels=HV_LABELS)
    rate = sample.phase_rate

    def family(concentration):
        delta = rate * concentration
        phases = BirefringencePhases(common_phase - delta / 2.0, common_phase + delta / 2.0)
        return apply_external_loss(apply_birefringence(source, phases), sample.eta)

    return family


def dichroism_family(probe: ProbeSpec, sample: ChiralSample):
    source = state_from_probe(as_twin_probe(probe), labels=LR_LABELS)
    length = sample.path_length_cm

    def family(concentration):
        trans = (10.0 ** (-sample.eps_L * concentration * length),
                 10.0 ** (-sample.eps_R * concentration * length))
        return attenuate(attenuate(source, trans), (sample.eta, sample.eta))

    return family


# ---------------------------------------------------------------------------
# Closed forms (birefringence)
# ---------------------------------------------------------------------------

def vacuum_term(s, eta, rate) -> float:
    """Squeezed-vacuum contribution as printed for the lossy probe.

    Recorded for arbitration only: squeezing both modes alike makes the
    vacuum part rotation invariant, so the actual QFI at alpha = 0 is zero.
    """
    sh2 = math.sinh(s) ** 2
    return 4.0 * eta ** 2 * rate ** 2 * math.sinh(2.0 * s) ** 2 / (1.0 + 2.0 * eta * (1.0 - eta) * sh2)


def bright_term(photons, s, eta, rate, delta_phi) -> float:
    """Displacement contribution, read as a quotient over the loss denominator.

    (1 - eta + eta cosh 2s + eta |sin dphi| sinh 2s) / (1 + 4 eta (1 - eta) sinh^2 s)
    """
    sh2 = math.sinh(s) ** 2
    numerator = 1.0 + 2.0 * eta * sh2 + eta * abs(math.sin(delta_phi)) * math.sinh(2.0 * s)
    return eta * photons * rate ** 2 * numerator / (1.0 + 4.0 * eta * (1.0 - eta) * sh2)


def bright_term_printed(photons, s, eta, rate, delta_phi) -> float:
    """Displacement contribution transcribed literally (|alpha|^4, no denominator)."""
    bracket = 1.0 - eta + eta * math.cosh(2.0 * s) + eta * abs(math.sin(delta_phi)) * math.sinh(2.0 * s)
    return eta * photons ** 2 * rate ** 2 * bracket


def standard_quantum_limit(photons, eta, rate) -> float:
    return eta * photons * rate ** 2


def qfi_closed_form_birefringence(probe: ProbeSpec, sample: ChiralSample, common_phase=0.0,
                                  nu=1) -> QfiReport:
    """Closed-form decomposition plus the numerical QFI of the same configuration."""
    eta = sample.eta
    if not 0.0 < eta <= 1.0:
        raise EstimationError(f"closed forms need eta in (0, 1], got {eta!r}")
    if probe.family is ProbeFamily.TWIN_SQUEEZED:
        raise EstimationError("birefringence closed forms describe the polarization-squeezed probe")
    rate = sample.phase_rate
    delta_phi = rate * sample.concentration
    photons = probe.photons

    vac = vacuum_term(probe.s, eta, rate)
    bright = bright_term(photons, probe.s, eta, rate, delta_phi)
    state = birefringence_output(probe, sample, common_phase)
    deriv = analytic_derivatives_birefringence(probe, sample, common_phase)
    return QfiReport(
        qfi_numerical=qfi_two_mode_gaussian(state, deriv),
        sql=standard_quantum_limit(photons, eta, rate),
        qfi_closed_form=vac + bright,
        vacuum_term=vac,
        bright_term=bright,
        bright_term_printed=bright_term_printed(photons, probe.s, eta, rate, delta_phi),
        trials=_check_trials(nu),
    )


def qfi_birefringence_exact(s, eta, photons, rate, theta_eff=0.0) -> float:
    """Gaussian QFI of the birefringence output at fixed common phase.

    eta |alpha|^2 rate^2 (c + S cos theta_eff) / D with c = 1 + 2 eta sinh^2 s,
    S = eta sinh 2s and D = 1 + 4 eta (1 - eta) sinh^2 s. Independent of delta_phi.
    """
    sh2 = math.sinh(s) ** 2
    c = 1.0 + 2.0 * eta * sh2
    big_s = eta * math.sinh(2.0 * s)
    return eta * photons * rate ** 2 * (c + big_s * math.cos(theta_eff)) / (1.0 + 4.0 * eta * (1.0 - eta) * sh2)


def bright_dominance_ratio(alpha, s) -> float:
    """Bright over vacuum term at eta = 1 and delta_phi = 0."""
    if s == 0:
        return math.inf
    return abs(alpha) ** 2 * math.cosh(2.0 * s) / (4.0 * math.sinh(2.0 * s) ** 2)


# ---------------------------------------------------------------------------
# Dichroism QFI
# ---------------------------------------------------------------------------

def qfi_dichroism(probe: ProbeSpec, sample: ChiralSample, nu=1) -> QfiReport:
    """Numerical QFI of the dichroism output; SQL from the unsqueezed twin probe."""
    state = dichroism_output(probe, sample)
    qfi = qfi_two_mode_gaussian(state, analytic_derivatives_dichroism(probe, sample))
    coherent = as_twin_probe(probe).coherent_counterpart()
    sql = qfi_two_mode_gaussian(
        dichroism_output(coherent, sample), analytic_derivatives_dichroism(coherent, sample)
    )
    return QfiReport(qfi_numerical=qfi, sql=sql, trials=_check_trials(nu))


# ---------------------------------------------------------------------------
# Balanced polarimetry
# ---------------------------------------------------------------------------

def is_bright(photons, s) -> bool:
    return photons >= Config.BRIGHT_LIMIT_FACTOR * math.sinh(2.0 * s) ** 2


def optimal_xi(delta_phi) -> float:
    """Waveplate rotation that puts the balanced signal at maximum slope."""
    return (2.0 * delta_phi - math.pi) / 4.0


def waveplate_unitary(xi) -> np.ndarray:
    """Half-waveplate at xi followed by the polarizing beamsplitter.

    b1 = cos(xi) a_H + sin(xi) a_V,   b2 = sin(xi) a_H - cos(xi) a_V
    """
    c, s = math.cos(xi), math.sin(xi)
    return np.array([[c, s], [s, -c]], dtype=complex)


def balanced_detection_stats(probe: ProbeSpec, sample: ChiralSample, xi=None, common_phase=0.0,
                             exact=False) -> MeasurementStats:
    """Statistics of S = n_b1 - n_b2.

    ``exact=False`` gives the bright-limit variance
    eta |alpha|^2 (1 - eta + eta (cosh 2s - cos theta_eff sinh 2s)).
    """
    delta_phi = sample.phase_rate * sample.concentration
    xi = optimal_xi(delta_phi) if xi is None else xi
    bright = _warn_if_not_bright(probe)

    rotated, d_dot, sigma_dot = _detected_modes(probe, sample, xi, common_phase)
    means, cov = photon_number_covariance(rotated, exact=exact)
    dmeans = photon_number_mean_derivative(rotated, d_dot, sigma_dot)
    signs = np.array([1.0, -1.0])
    return MeasurementStats.from_moments(
        mean=signs @ means,
        variance=signs @ cov @ signs,
        dmean_dC=signs @ dmeans,
        slope_scale=_slope_scale(rotated, sample.phase_rate),
        bright_limit_ok=bright,
    )


def analyzer_intensity_stats(probe: ProbeSpec, sample: ChiralSample, xi, common_phase=0.0,
                             exact=False) -> MeasurementStats:
    """Single detector behind a linear analyzer at xi (port b1 only)."""
    bright = _warn_if_not_bright(probe)
    rotated, d_dot, sigma_dot = _detected_modes(probe, sample, xi, common_phase)
    means, cov = photon_number_covariance(rotated, exact=exact)
    dmeans = photon_number_mean_derivative(rotated, d_dot, sigma_dot)
    return MeasurementStats.from_moments(
        mean=means[0],
        variance=cov[0, 0],
        dmean_dC=dmeans[0],
        slope_scale=_slope_scale(rotated, sample.phase_rate),
        bright_limit_ok=bright,
    )


# ---------------------------------------------------------------------------
# Dichroism statistics
# ---------------------------------------------------------------------------

def dichroism_stats(probe: ProbeSpec, trans: DichroismTransmissions, eta,
                    sample: Optional[ChiralSample] = None):
    """Bright-limit (L, R) intensity statistics of the twin probe.

    <n_i> = eta T_i (|alpha|^2 + sinh^2 s)
    Var(n_i) = |alpha|^2 eta T_i (1 + 2 eta T_i sinh^2 s - eta T_i cos theta sinh 2s)

    dmean_dC needs the sample's extinction coefficients; without a sample it
    is taken with respect to the arm's own absorbance A_i.
    """
    twin = as_twin_probe(probe)
    state = apply_external_loss(apply_dichroism(state_from_probe(twin, labels=LR_LABELS), trans), eta)
    means, cov = photon_number_covariance(state, exact=False)
    if sample is not None:
        rates = sample.path_length_cm * np.array([sample.eps_L, sample.eps_R])
    else:
        rates = np.ones(2)
    stats = []
    for i in range(2):
        stats.append(MeasurementStats.from_moments(
            mean=means[i],
            variance=cov[i, i],
            dmean_dC=-LN10 * rates[i] * means[i],
            bright_limit_ok=is_bright(twin.photons, twin.s),
        ))
    return tuple(stats)


def ratio_estimator_stats(probe: ProbeSpec, sample: ChiralSample) -> MeasurementStats:
    """Statistics of Y = log10(n_R / n_L), whose mean is delta_eps C l."""
    trans = transmissions_from_sample(sample)
    slope = sample.delta_epsilon * sample.path_length_cm
    if trans.degenerate:
        return MeasurementStats.from_moments(math.nan, math.inf, slope)
    left, right = dichroism_stats(probe, trans, sample.eta, sample)
    variance = (left.variance / left.mean ** 2 + right.variance / right.mean ** 2) / LN10 ** 2
    return MeasurementStats.from_moments(
        mean=math.log10(right.mean / left.mean),
        variance=variance,
        dmean_dC=slope,
        bright_limit_ok=left.bright_limit_ok,
    )


def dichroism_variance_factor(s, T_L, T_R, theta_eff=0.0, eta=1.0) -> float:
    """Single-shot Var(C) / beta for the ratio estimator.

    sum_i [1 / (eta T_i) + 2 sinh^2 s - cos(theta) sinh 2s]; at theta = 0 this is
    2 (e^-2s - 1) + 1 / (eta T_R) + 1 / (eta T_L).
    """
    if T_L == 0.0 or T_R == 0.0 or eta == 0.0:
        return math.inf
    return 1.0 / (eta * T_L) + 1.0 / (eta * T_R) + 2.0 * _squeezing_excess(s, theta_eff)


def dichroism_precision_ratio(s, T_L, T_R, theta_eff=0.0, eta=1.0) -> float:
    """Coherent over squeezed standard deviation of the ratio estimate."""
    return math.sqrt(
        dichroism_variance_factor(0.0, T_L, T_R, eta=eta)
        / dichroism_variance_factor(s, T_L, T_R, theta_eff, eta)
    )


def dichroism_beta(photons, delta_epsilon, path_length_cm) -> float:
    """beta = (|alpha| delta_eps l ln 10)^-2."""
    if delta_epsilon == 0.0:
        raise EstimationError("eps_L == eps_R: the ratio carries no information on C")
    if photons == 0.0:
        return math.inf
    return 1.0 / (photons * (delta_epsilon * path_length_cm * LN10) ** 2)


def dichroism_concentration_variance(probe: ProbeSpec, sample: ChiralSample) -> float:
    twin = as_twin_probe(probe)
    beta = dichroism_beta(twin.photons, sample.delta_epsilon, sample.path_length_cm)
    trans = transmissions_from_sample(sample)
    return beta * dichroism_variance_factor(twin.s, trans.T_L, trans.T_R, twin.theta_eff, sample.eta)


# ---------------------------------------------------------------------------
# Cramer-Rao chain
# ---------------------------------------------------------------------------

def crb_chain(qfi: QfiReport, cfi: MeasurementStats, nu=None, tol=None) -> BoundChain:
    nu = qfi.trials if nu is None else _check_trials(nu)
    tol = Config.CRB_CHAIN_TOL if tol is None else tol
    crb = _reciprocal(nu * cfi.cfi_gaussian)
    qcrb = _reciprocal(nu * qfi.qfi_numerical)
    ordered = crb >= qcrb * (1.0 - tol)
    inconsistency = None
    if not ordered:
        inconsistency = (
            f"classical bound {crb!r} lies below the quantum bound {qcrb!r} "
            f"(F={cfi.cfi_gaussian!r} > Q={qfi.qfi_numerical!r})"
        )
        logger.error("Cramer-Rao chain violated: %s", inconsistency)
    return BoundChain(crb=crb, qcrb=qcrb, ordered=ordered, inconsistency=inconsistency)


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def _require_invertible(sigma):
    cond = np.linalg.cond(sigma)
    if not math.isfinite(cond) or cond > _SINGULAR_COND:
        raise QfiComputationError(f"covariance matrix is singular (condition number {cond:.3g})")


def _displacement_term(sigma, d_dot):
    return 2.0 * float(np.real(np.vdot(d_dot, linalg.solve(sigma, d_dot))))


def _detected_modes(probe, sample, xi, common_phase):
    """Output state and its derivative in the detector modes (b1, b2)."""
    plate = waveplate_unitary(xi)
    state = passive_transform(birefringence_output(probe, sample, common_phase), plate,
                              labels=("b1", "b2"))
    deriv = analytic_derivatives_birefringence(probe, sample, common_phase)
    full = block_diagonal(plate)
    return state, full @ deriv.d_dot, full @ deriv.Sigma_dot @ full.conj().T


def _slope_scale(state, rate):
    return (float(np.sum(np.abs(state.d[:2]) ** 2)) + 1.0) * abs(rate)


def _warn_if_not_bright(probe):
    if is_bright(probe.photons, probe.s):
        return True
    logger.warning(
        "Probe outside the bright limit: |alpha|^2=%g < %g * sinh^2(2s)=%g; "
        "bright-limit variances are approximate",
        probe.photons, Config.BRIGHT_LIMIT_FACTOR,
        Config.BRIGHT_LIMIT_FACTOR * math.sinh(2.0 * probe.s) ** 2,
    )
    return False


def _squeezing_excess(s, theta):
    """cosh 2s - cos(theta) sinh 2s - 1, written to stay accurate at large s."""
    c = math.cos(theta)
    grow = 0.0 if c == 1.0 else 0.5 * (1.0 - c) * math.exp(2.0 * s)
    return 0.5 * (1.0 + c) * math.exp(-2.0 * s) + grow - 1.0


def _check_trials(nu):
    nu = int(nu)
    if nu < 1:
        raise EstimationError(f"number of trials must be >= 1, got {nu}")
    return nu


def _ratio(numerator, denominator):
    if denominator == 0.0:
        return math.nan if numerator == 0.0 else math.inf
    return numerator / denominator


def _reciprocal(value):
    return math.inf if value == 0.0 else 1.0 / value
