"""Constants, particle records and derived quantities."""

import math

import pytest
from pydantic import ValidationError

from src.app.core.errors import DomainError, MissingVelocityError
from src.app.core.wavepacket import (
    DEFAULT_CONSTANTS,
    CoherenceSpec,
    CovarianceMatrix,
    PacketParams,
    Particle,
    PhysicalConstants,
    coherence_epsilon,
    de_broglie_wavelength,
    timescale_tau,
)

C70_MASS = 70 * 12.011 * 1.66053907e-27


def test_default_constants():
    assert DEFAULT_CONSTANTS.hbar == 1.054571817e-34
    assert DEFAULT_CONSTANTS.atomic_mass_unit == 1.66053907e-27
    assert DEFAULT_CONSTANTS.planck == pytest.approx(2 * math.pi * 1.054571817e-34, rel=1e-12)


def test_planck_must_match_hbar():
    with pytest.raises(ValidationError):
        PhysicalConstants(hbar=1.0, planck=6.0)
    assert PhysicalConstants(hbar=1.0).planck == pytest.approx(2 * math.pi)


def test_constants_must_be_positive():
    with pytest.raises(ValidationError):
        PhysicalConstants(hbar=-1.0)


def test_c70_mass():
    assert Particle.c70().mass == pytest.approx(1.39613143e-24, rel=1e-8)
    assert Particle.c70().mass == pytest.approx(C70_MASS, rel=1e-15)


def test_particle_rejects_bad_values():
    with pytest.raises(ValidationError):
        Particle(mass=0.0)
    with pytest.raises(ValidationError):
        Particle(mass=1.0, v_z=-3.0)


def test_timescale_tau_c70():
    assert timescale_tau(C70_MASS, 1.0e-7) == pytest.approx(1.3239e-4, rel=1e-4)
    assert timescale_tau(C70_MASS, 1.0e-7) == pytest.approx(1.3238846e-4, rel=1e-7)
    assert timescale_tau(C70_MASS, 0.0) == 0.0


def test_timescale_tau_scaling():
    assert timescale_tau(C70_MASS, 2e-7) == pytest.approx(4 * timescale_tau(C70_MASS, 1e-7), rel=1e-15)
    tau = timescale_tau(C70_MASS, 3e-7)
    assert tau * DEFAULT_CONSTANTS.hbar / (C70_MASS * 9e-14) == pytest.approx(1.0, rel=1e-14)


@pytest.mark.parametrize("mass, b", [(-1.0, 1e-7), (C70_MASS, -1e-7), (math.nan, 1e-7), (C70_MASS, math.inf)])
def test_timescale_tau_rejects_invalid_input(mass, b):
    with pytest.raises(DomainError):
        timescale_tau(mass, b)


def test_de_broglie_wavelength(c70_moving):
    assert de_broglie_wavelength(c70_moving) == pytest.approx(2.524480e-12, rel=1e-5)
    assert c70_moving.k_z() == pytest.approx(2.488903e12, rel=1e-5)
    assert c70_moving.k_z() * de_broglie_wavelength(c70_moving) == pytest.approx(2 * math.pi, rel=1e-12)


def test_de_broglie_wavelength_halves_with_double_velocity():
    slow = Particle.c70(v_z=100.0)
    fast = Particle.c70(v_z=200.0)
    assert de_broglie_wavelength(fast) == pytest.approx(de_broglie_wavelength(slow) / 2, rel=1e-15)


def test_de_broglie_wavelength_needs_velocity(c70):
    with pytest.raises(MissingVelocityError, match="longitudinal velocity required"):
        de_broglie_wavelength(c70)
    with pytest.raises(MissingVelocityError):
        c70.k_z()


def test_coherence_epsilon():
    assert coherence_epsilon(1e-7, 0.0) == 1.0
    assert coherence_epsilon(1e-7, 9.0e6) == pytest.approx(1.81, rel=1e-14)
    assert coherence_epsilon(2e-7, 5e6) == pytest.approx(2.0, rel=1e-14)
    with pytest.raises(DomainError):
        coherence_epsilon(1e-7, -1.0)


def test_derived_quantities_are_deterministic():
    assert timescale_tau(C70_MASS, 1.234e-7) == timescale_tau(C70_MASS, 1.234e-7)
    assert coherence_epsilon(1.234e-7, 8.1e6) == coherence_epsilon(1.234e-7, 8.1e6)


def test_packet_params(c70):
    params = PacketParams.for_particle(1e-7, c70, dim=2)
    assert params.dim == 2
    assert params.tau_b == timescale_tau(c70.mass, 1e-7)
    with pytest.raises(ValidationError):
        PacketParams(b=1e-7, dim=3, tau_b=1.0)
    with pytest.raises(ValidationError):
        PacketParams(b=0.0, tau_b=1.0)


def test_coherence_spec():
    spec = CoherenceSpec.for_width(1e-7, 9e6)
    assert spec.epsilon == pytest.approx(1.81)
    assert CoherenceSpec().epsilon == 1.0
    with pytest.raises(ValidationError):
        CoherenceSpec(delta_kx=0.0, epsilon=1.5)
    with pytest.raises(ValidationError):
        CoherenceSpec(delta_kx=1e6, epsilon=0.5)


def test_coherence_spec_partial_coherence_needs_epsilon_above_one():
    with pytest.raises(ValidationError):
        CoherenceSpec(delta_kx=1e6)
    with pytest.raises(ValidationError):
        CoherenceSpec(delta_kx=1e6, epsilon=1.0)
    # below double precision the spread collapses to the coherent state
    unresolved = CoherenceSpec.for_width(1e-7, 1e-3)
    assert unresolved.delta_kx == 0.0
    assert unresolved.epsilon == 1.0


def test_covariance_uncertainty_bound():
    hbar = DEFAULT_CONSTANTS.hbar
    saturated = CovarianceMatrix(sigma_xx=1e-14, sigma_pp=hbar**2 / 4 / 1e-14, sigma_xp=0.0)
    assert saturated.determinant == pytest.approx(hbar**2 / 4, rel=1e-12)
    assert saturated.satisfies_uncertainty()
    squeezed = CovarianceMatrix(sigma_xx=1e-14, sigma_pp=hbar**2 / 8 / 1e-14, sigma_xp=0.0)
    assert not squeezed.satisfies_uncertainty()
    with pytest.raises(ValidationError):
        CovarianceMatrix(sigma_xx=0.0, sigma_pp=1.0, sigma_xp=0.0)
