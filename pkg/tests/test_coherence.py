"""Partially coherent state: covariance, Gouy phase, detector and FWHM inversion."""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from src.app.core.coherence import (
    DetectorSpec,
    IntensityProfile,
    MixedState,
    covariance_mixed,
    deconvolve_fwhm,
    density_initial,
    detected_intensity,
    effective_width,
    fwhm,
    gouy_mixed,
    intensity,
    intensity_profile,
    sigma_xp_from_fwhm,
)
from src.app.core.errors import DomainError
from src.app.core.gaussian import covariance_pure, gouy_from_width_integral, gouy_pure, width_B
from src.app.core.wavepacket import DEFAULT_CONSTANTS, CoherenceSpec, PacketParams, Particle
from tests.conftest import DETECTOR_FWHM, T_FLIGHT

HBAR = DEFAULT_CONSTANTS.hbar
LN2 = math.log(2)


def test_c70_state(c70_state):
    assert c70_state.coherence.epsilon == pytest.approx(1.81, rel=1e-14)
    assert effective_width(T_FLIGHT, c70_state) == pytest.approx(6.7586247e-6, rel=1e-7)
    assert gouy_mixed(T_FLIGHT, c70_state) == pytest.approx(-0.5782828, abs=1e-7)


def test_mixed_state_rejects_inconsistent_parts(c70):
    params = PacketParams.for_particle(1e-7, c70)
    with pytest.raises(ValidationError):
        MixedState(params=params, coherence=CoherenceSpec.for_width(2e-7, 9e6), particle=c70)
    with pytest.raises(ValidationError):
        MixedState(
            params=PacketParams.for_particle(1e-7, c70, dim=2),
            coherence=CoherenceSpec.for_width(1e-7, 9e6),
            particle=c70,
        )


def test_density_initial(c70_state):
    b = c70_state.params.b
    assert density_initial(0.0, 0.0, c70_state) == pytest.approx(1 / (b * math.sqrt(math.pi)))
    x = np.linspace(-8 * b, 8 * b, 4001)
    diagonal = density_initial(x, x, c70_state).real
    assert np.sum(diagonal) * (x[1] - x[0]) == pytest.approx(1.0, rel=1e-9)
    off = density_initial(b, -b, c70_state)
    expected = math.exp(-1) * math.exp(-(9e6**2) * (2 * b) ** 2 / 4) / (b * math.sqrt(math.pi))
    assert off == pytest.approx(expected, rel=1e-12)
    assert density_initial(b, -b, c70_state) == density_initial(-b, b, c70_state)


def test_coherent_limit_matches_pure_state(c70):
    ms = MixedState.create(1e-7, 0.0, c70)
    for factor in (0.0, 0.5, 1.0, 5.0, 50.0):
        t = factor * ms.params.tau_b
        mixed = covariance_mixed(t, ms)
        pure = covariance_pure(t, ms.pure)
        assert mixed.sigma_xx == pytest.approx(pure.sigma_xx, rel=1e-14)
        assert mixed.sigma_pp == pytest.approx(pure.sigma_pp, rel=1e-14)
        assert mixed.sigma_xp == pytest.approx(pure.sigma_xp, rel=1e-14, abs=1e-60)
        assert effective_width(t, ms) == pytest.approx(width_B(t, ms.params), rel=1e-14)
        assert gouy_mixed(t, ms) == pytest.approx(gouy_pure(t, ms.params), abs=1e-15)


def test_mixed_determinant_is_constant():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        mass = 10 ** rng.uniform(-26, -23)
        b = 10 ** rng.uniform(-8, -5)
        delta_kx = rng.uniform(0, 3) / b
        ms = MixedState.create(b, delta_kx, Particle(mass=mass))
        t = rng.uniform(-10, 10) * ms.params.tau_b
        cov = covariance_mixed(t, ms)
        assert cov.determinant == pytest.approx(HBAR**2 / 4 * ms.coherence.epsilon, rel=1e-10)
        assert cov.satisfies_uncertainty()


def test_gouy_width_integral_identity():
    rng = np.random.default_rng(11)
    for _ in range(100):
        mass = 10 ** rng.uniform(-26, -23)
        b = 10 ** rng.uniform(-8, -5)
        ms = MixedState.create(b, rng.uniform(0, 3) / b, Particle(mass=mass))
        t = 10 ** rng.uniform(-2, 3) * ms.params.tau_b
        quadrature = gouy_from_width_integral(lambda s: effective_width(s, ms), t, mass)
        assert quadrature == pytest.approx(gouy_mixed(t, ms), rel=1e-8)


def test_gouy_mixed_limits(c70):
    coherent = MixedState.create(1e-7, 0.0, c70)
    assert abs(abs(gouy_mixed(1e6 * coherent.params.tau_b, coherent)) - math.pi / 4) < 1e-5
    ms = MixedState.create(1e-7, 2e7, c70)
    bound = math.pi / (4 * math.sqrt(ms.coherence.epsilon))
    phases = gouy_mixed(np.geomspace(1e-3, 1e6, 50) * ms.params.tau_b, ms)
    assert np.all(np.abs(phases) < bound)
    assert abs(phases[-1]) == pytest.approx(bound, rel=1e-5)


def test_intensity_is_gaussian_of_sigma_xx(c70_state):
    sigma_xx = covariance_mixed(T_FLIGHT, c70_state).sigma_xx
    assert intensity(0.0, T_FLIGHT, c70_state) == pytest.approx(1 / math.sqrt(2 * math.pi * sigma_xx))
    profile = intensity_profile(T_FLIGHT, c70_state)
    assert profile.norm() == pytest.approx(1.0, abs=1e-6)
    assert profile.second_moment() == pytest.approx(sigma_xx, rel=1e-6)


def test_detected_intensity_gaussian_kernel(c70_state):
    det = DetectorSpec(D=DETECTOR_FWHM)
    assert det.variance == pytest.approx(2.596851e-11, rel=1e-6)
    profile = intensity_profile(T_FLIGHT, c70_state, det)
    sigma_xx = covariance_mixed(T_FLIGHT, c70_state).sigma_xx
    assert profile.second_moment() == pytest.approx(sigma_xx + det.variance, rel=1e-6)
    assert detected_intensity(0.0, T_FLIGHT, c70_state, DetectorSpec()) == intensity(
        0.0, T_FLIGHT, c70_state
    )


def test_detected_intensity_tophat_kernel(c70_state):
    det = DetectorSpec(D=DETECTOR_FWHM, kernel="tophat")
    profile = intensity_profile(T_FLIGHT, c70_state, det, points=8001)
    sigma_xx = covariance_mixed(T_FLIGHT, c70_state).sigma_xx
    assert profile.norm() == pytest.approx(1.0, abs=1e-6)
    assert profile.second_moment() == pytest.approx(sigma_xx + det.variance, rel=1e-5)


def test_fwhm_gaussian(c70_state):
    sigma_xx = covariance_mixed(T_FLIGHT, c70_state).sigma_xx
    det = DetectorSpec(D=DETECTOR_FWHM)
    assert fwhm(T_FLIGHT, c70_state, DetectorSpec()) == pytest.approx(
        2 * math.sqrt(2 * LN2 * sigma_xx), rel=1e-15
    )
    detected = fwhm(T_FLIGHT, c70_state, det)
    assert detected**2 == pytest.approx(fwhm(T_FLIGHT, c70_state, DetectorSpec()) ** 2 + DETECTOR_FWHM**2, rel=1e-12)


def test_fwhm_is_half_maximum_width(c70_state):
    for det in (DetectorSpec(D=DETECTOR_FWHM), DetectorSpec(D=DETECTOR_FWHM, kernel="tophat")):
        width = fwhm(T_FLIGHT, c70_state, det)
        peak = detected_intensity(0.0, T_FLIGHT, c70_state, det)
        edge = detected_intensity(width / 2, T_FLIGHT, c70_state, det)
        assert edge == pytest.approx(peak / 2, rel=1e-9)


def test_tophat_fwhm_limits(c70_state):
    narrow = DetectorSpec(D=1e-12, kernel="tophat")
    gaussian = fwhm(T_FLIGHT, c70_state, DetectorSpec())
    assert fwhm(T_FLIGHT, c70_state, narrow) == pytest.approx(gaussian, rel=1e-6)
    wide = DetectorSpec(D=1e-3, kernel="tophat")
    assert fwhm(T_FLIGHT, c70_state, wide) == pytest.approx(1e-3, rel=1e-3)


def test_deconvolve_fwhm_round_trip(c70_state):
    intrinsic = fwhm(T_FLIGHT, c70_state, DetectorSpec())
    for det in (DetectorSpec(D=DETECTOR_FWHM), DetectorSpec(D=DETECTOR_FWHM, kernel="tophat")):
        measured = fwhm(T_FLIGHT, c70_state, det)
        assert deconvolve_fwhm(measured, det) == pytest.approx(intrinsic, rel=1e-8)
    assert deconvolve_fwhm(5e-6, DetectorSpec()) == 5e-6
    with pytest.raises(DomainError):
        deconvolve_fwhm(1e-6, DetectorSpec(D=DETECTOR_FWHM))


def test_sigma_xp_from_fwhm_round_trip(c70):
    for b in np.geomspace(5e-8, 5e-6, 40):
        for delta_kx in (0.0, 1e6, 9e6, 3e7):
            ms = MixedState.create(float(b), delta_kx, c70)
            width = fwhm(T_FLIGHT, ms, DetectorSpec())
            expected = covariance_mixed(T_FLIGHT, ms).sigma_xp
            assert sigma_xp_from_fwhm(width, float(b), delta_kx) == pytest.approx(expected, rel=1e-10)


def test_sigma_xp_from_fwhm_floor():
    b = 1e-6
    floor = 2 * math.sqrt(LN2) * b
    assert sigma_xp_from_fwhm(floor, b, 9e6) == 0.0
    assert sigma_xp_from_fwhm(floor * (1 - 1e-14), b, 9e6) == 0.0
    with pytest.raises(DomainError):
        sigma_xp_from_fwhm(0.9 * floor, b, 9e6)


def test_intensity_profile_validation():
    grid = np.linspace(-1, 1, 11)
    with pytest.raises(ValidationError):
        IntensityProfile(t=0.0, grid=grid, values=np.ones(10))
    with pytest.raises(ValidationError):
        IntensityProfile(t=0.0, grid=grid, values=np.full(11, 2.0))
    with pytest.raises(ValidationError):
        IntensityProfile(t=0.0, grid=grid[::-1], values=np.full(11, 0.5))
    assert IntensityProfile(t=0.0, grid=grid, values=np.full(11, 0.5)).norm() == pytest.approx(1.0)


def test_detector_spec_validation():
    with pytest.raises(ValidationError):
        DetectorSpec(D=-1.0)
    with pytest.raises(ValidationError):
        DetectorSpec(D=1e-6, kernel="lorentzian")
    assert DetectorSpec(D=1.2e-5, kernel="tophat").variance == pytest.approx(1.2e-5**2 / 12)
