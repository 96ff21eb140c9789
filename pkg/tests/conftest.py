"""
Shared fixtures for the ChiralQ test suite.
"""

import math

import pytest

from models import SUCROSE, ChiralSample, ProbeFamily, ProbeSpec


@pytest.fixture
def unit_sample():
    """delta_gamma = 1, l = 1 dm: concentration reads directly as delta_phi."""
    def build(concentration=0.2, eta=1.0):
        return ChiralSample(concentration=concentration, delta_gamma=1.0, path_length=1.0,
                            path_length_unit="dm", eta=eta)
    return build


@pytest.fixture
def sucrose():
    return SUCROSE


@pytest.fixture
def molar_sample():
    """Molar sample with T_R = 0.9 and a 0.3 L/mol/cm dichroism at 1 mmol/L."""
    return ChiralSample(concentration=1e-3, concentration_unit="mol/L", path_length=1.0,
                        path_length_unit="cm", eps_L=46.057, eps_R=45.757)


@pytest.fixture
def squeezed_probe():
    def build(photons=1e6, s=1.0, theta=0.0):
        return ProbeSpec(family=ProbeFamily.POLARIZATION_SQUEEZED, alpha=math.sqrt(photons),
                         s=s, theta=theta)
    return build


@pytest.fixture
def twin_probe():
    def build(photons=1e9, s=1.0):
        return ProbeSpec(family=ProbeFamily.TWIN_SQUEEZED, alpha=math.sqrt(photons), s=s)
    return build
