"""
Gaussian state algebra
"""

import math

import numpy as np
import pytest

from gaussian_core import (
    LR_LABELS,
    GaussianState,
    StateError,
    attenuate,
    check_conjugation_symmetry,
    is_physical,
    make_polarization_squeezed_probe,
    make_twin_amplitude_squeezed_probe,
    mean_photons,
    passive_transform,
    photon_number_covariance,
    photon_number_moments,
    purity,
    squeezing_db,
    squeezing_from_db,
    state_from_probe,
    symplectic_eigenvalues,
    vacuum,
)
from models import ProbeFamily, ProbeSpec


@pytest.mark.unit
class TestConstruction:
    def test_vacuum(self):
        state = vacuum()
        assert np.array_equal(state.Sigma, np.eye(4))
        assert mean_photons(state) == 0.0
        assert is_physical(state)
        assert purity(state) == pytest.approx(1.0)

    @pytest.mark.parametrize("alpha,s,theta", [(3.0, 0.5, 0.3), (1j, 1.2, 2.0), (0.0, 0.8, 0.0)])
    def test_probes_are_pure_and_physical(self, alpha, s, theta):
        for build in (make_polarization_squeezed_probe, make_twin_amplitude_squeezed_probe):
            state = build(alpha, s, theta)
            lam1, lam2 = symplectic_eigenvalues(state)
            assert lam1 == pytest.approx(1.0, abs=1e-9)
            assert lam2 == pytest.approx(1.0, abs=1e-9)
            assert purity(state) == pytest.approx(1.0, abs=1e-9)
            assert check_conjugation_symmetry(state)

    def test_polarization_probe_blocks(self):
        state = make_polarization_squeezed_probe(2.0, 0.5, 0.7)
        assert state.amplitudes.tolist() == [2.0, 0.0]
        assert state.Sigma[0, 0] == pytest.approx(math.cosh(1.0))
        assert state.Sigma[0, 2] == pytest.approx(-math.sinh(1.0) * np.exp(0.7j))
        assert state.Sigma[1, 3] == pytest.approx(-math.sinh(1.0) * np.exp(0.7j))

    def test_mean_photons(self):
        state = make_polarization_squeezed_probe(3.0, 0.5, 0.0)
        assert mean_photons(state) == pytest.approx(9.0 + 2.0 * math.sinh(0.5) ** 2)

    def test_twin_probe_labels(self):
        state = make_twin_amplitude_squeezed_probe(1.0, 0.2, 0.0)
        assert state.labels == LR_LABELS
        assert state.amplitudes.tolist() == [1.0, 1.0]

    def test_state_from_probe_dispatch(self):
        twin = state_from_probe(ProbeSpec(family=ProbeFamily.TWIN_SQUEEZED, alpha=1.0))
        pol = state_from_probe(ProbeSpec(family=ProbeFamily.COHERENT, alpha=1.0))
        assert twin.labels == ("L", "R")
        assert pol.labels == ("H", "V")
        assert pol.amplitudes.tolist() == [1.0, 0.0]

    @pytest.mark.parametrize("args", [(1.0, -0.1, 0.0), (1.0, math.nan, 0.0), ("x", 0.1, 0.0)])
    def test_invalid_probe_arguments(self, args):
        with pytest.raises(StateError):
            make_polarization_squeezed_probe(*args)

    def test_wrong_shapes(self):
        with pytest.raises(StateError):
            GaussianState(d=np.zeros(3), Sigma=np.eye(4))

    def test_arrays_are_read_only(self):
        state = vacuum()
        with pytest.raises(ValueError):
            state.Sigma[0, 0] = 2.0


@pytest.mark.unit
class TestPhysicality:
    def test_sub_vacuum_covariance_is_unphysical(self):
        state = GaussianState(d=np.zeros(4), Sigma=0.5 * np.eye(4))
        assert not is_physical(state)

    def test_thermal_state_is_mixed(self):
        state = GaussianState(d=np.zeros(4), Sigma=3.0 * np.eye(4))
        assert is_physical(state)
        assert purity(state) == pytest.approx(1.0 / 9.0)

    def test_broken_conjugation_symmetry_detected(self):
        sigma = np.eye(4, dtype=complex)
        sigma[2, 2] = 1.5
        state = GaussianState(d=np.zeros(4), Sigma=sigma)
        assert not check_conjugation_symmetry(state)


@pytest.mark.unit
class TestPhotonStatistics:
    def test_coherent_is_poissonian(self):
        state = make_polarization_squeezed_probe(2.5, 0.0, 0.0)
        mean, var = photon_number_moments(state, 0)
        assert mean == pytest.approx(6.25)
        assert var == pytest.approx(6.25)

    def test_squeezed_vacuum(self):
        s = 0.7
        state = make_polarization_squeezed_probe(0.0, s, 0.0)
        mean, var = photon_number_moments(state, 1)
        assert mean == pytest.approx(math.sinh(s) ** 2)
        assert var == pytest.approx(math.sinh(2.0 * s) ** 2 / 2.0)

    def test_bright_limit_drops_vacuum_terms(self):
        s, alpha = 0.4, 10.0
        state = make_polarization_squeezed_probe(alpha, s, 0.0)
        _, var = photon_number_moments(state, 0, exact=False)
        assert var == pytest.approx(alpha ** 2 * math.exp(-2.0 * s))

    def test_modes_independent_before_mixing(self):
        state = make_twin_amplitude_squeezed_probe(3.0, 0.5, 0.0)
        _, cov = photon_number_covariance(state)
        assert cov[0, 1] == pytest.approx(0.0, abs=1e-12)

    def test_beamsplitter_correlates_modes(self):
        state = make_polarization_squeezed_probe(3.0, 0.0, 0.0)
        split = passive_transform(state, np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0))
        means, cov = photon_number_covariance(split)
        assert means == pytest.approx([4.5, 4.5])
        # coherent light stays uncorrelated after a beamsplitter
        assert cov[0, 1] == pytest.approx(0.0, abs=1e-12)


@pytest.mark.unit
class TestLinearMaps:
    def test_attenuate_scales_photons(self):
        state = make_polarization_squeezed_probe(3.0, 0.5, 0.2)
        lossy = attenuate(state, (0.6, 0.6))
        assert mean_photons(lossy) == pytest.approx(0.6 * mean_photons(state), rel=1e-12)
        assert is_physical(lossy)
        assert purity(lossy) < 1.0

    def test_full_loss_gives_vacuum(self):
        lossy = attenuate(make_polarization_squeezed_probe(3.0, 0.5, 0.2), (0.0, 0.0))
        assert np.allclose(lossy.Sigma, np.eye(4))
        assert np.allclose(lossy.d, 0.0)

    def test_passive_transform_preserves_spectrum(self):
        state = attenuate(make_polarization_squeezed_probe(1.0, 0.8, 0.0), (0.7, 0.9))
        angle = 0.37
        rot = np.array([[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]])
        rotated = passive_transform(state, rot)
        assert symplectic_eigenvalues(rotated) == pytest.approx(symplectic_eigenvalues(state), rel=1e-10)
        assert mean_photons(rotated) == pytest.approx(mean_photons(state), rel=1e-12)


@pytest.mark.unit
class TestSqueezingLevel:
    def test_record_level(self):
        assert squeezing_db(1.73) == pytest.approx(15.03, abs=0.01)
        assert squeezing_db(1.0) == pytest.approx(8.686, abs=1e-3)

    def test_round_trip(self):
        assert squeezing_from_db(squeezing_db(0.9)) == pytest.approx(0.9)
