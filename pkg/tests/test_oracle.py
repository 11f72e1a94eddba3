"""Numerical oracle: grid propagation, ensemble averages and the verification suite."""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from src.app.core.coherence import MixedState, covariance_mixed, gouy_mixed, intensity
from src.app.core.errors import GridOverflowError, NormalizationError, PhaseUndefinedError
from src.app.core.gaussian import (
    covariance_pure,
    gouy_pure,
    radius_R,
    wavefunction_pure,
    width_B,
)
from src.app.core.oracle import (
    EnsembleSpec,
    GridField,
    OracleSettings,
    ensemble_average,
    ensemble_nodes,
    fit_wavefront_radius,
    gouy_trace,
    grid_for,
    numeric_gouy,
    numeric_moments,
    propagate_free,
    run_verification_suite,
    sweep_conjecture,
    verify_conjecture,
)
from tests.conftest import B_SLIT, DELTA_KX, T_FLIGHT

TIMES_TAU = (0.5, 1.0, 5.0, 50.0)


@pytest.fixture
def initial_field(pure_packet):
    half_span, n = grid_for(
        B_SLIT, pure_packet.particle.mass, 50 * pure_packet.params.tau_b, points=2**14
    )
    return GridField.gaussian(B_SLIT, half_span, n)


def test_grid_field_layout(initial_field):
    assert initial_field.n == 2**14
    assert initial_field.x[initial_field.n // 2] == 0.0
    assert initial_field.norm() == pytest.approx(1.0, abs=1e-14)


def test_grid_field_requires_power_of_two():
    with pytest.raises(ValidationError):
        GridField(x_min=-1.0, x_max=1.0, values=np.ones(100, dtype=complex))
    with pytest.raises(ValidationError):
        GridField(x_min=1.0, x_max=-1.0, values=np.ones(128, dtype=complex))


def test_propagation_matches_closed_form(initial_field, pure_packet):
    mass = pure_packet.particle.mass
    for factor in (1.0, 5.0):
        t = factor * pure_packet.params.tau_b
        field = propagate_free(initial_field, t, mass)
        exact = wavefunction_pure(field.x, None, t, pure_packet)
        peak = np.max(np.abs(exact))
        assert np.max(np.abs(field.values - exact)) < 1e-9 * peak


def test_propagation_edge_cases(initial_field, pure_packet):
    mass = pure_packet.particle.mass
    assert propagate_free(initial_field, 0.0, mass) is initial_field
    with pytest.raises(ValueError):
        propagate_free(initial_field, math.inf, mass)
    tau = pure_packet.params.tau_b
    back = propagate_free(propagate_free(initial_field, tau, mass), -tau, mass)
    np.testing.assert_allclose(back.values, initial_field.values, atol=1e-8)


def test_numeric_moments_match_pure_covariance(initial_field, pure_packet):
    mass = pure_packet.particle.mass
    params = pure_packet.params
    for factor in TIMES_TAU:
        t = factor * params.tau_b
        field = propagate_free(initial_field, t, mass)
        cov = numeric_moments(field)
        exact = covariance_pure(t, pure_packet)
        assert field.norm() == pytest.approx(1.0, abs=1e-12)
        assert math.sqrt(2 * cov.sigma_xx) == pytest.approx(width_B(t, params), rel=1e-6)
        assert cov.sigma_xx == pytest.approx(exact.sigma_xx, rel=1e-8)
        assert cov.sigma_pp == pytest.approx(exact.sigma_pp, rel=1e-8)
        assert cov.sigma_xp == pytest.approx(exact.sigma_xp, rel=1e-8)
        assert cov.determinant == pytest.approx(exact.determinant, rel=1e-8)


def test_numeric_gouy_matches_closed_form(initial_field, pure_packet):
    mass = pure_packet.particle.mass
    for factor in TIMES_TAU:
        t = factor * pure_packet.params.tau_b
        phase = numeric_gouy(propagate_free(initial_field, t, mass), initial_field)
        assert phase == pytest.approx(gouy_pure(t, pure_packet.params, dim=1), abs=1e-6)


def test_wavefront_radius(initial_field, pure_packet):
    mass = pure_packet.particle.mass
    for factor in TIMES_TAU:
        t = factor * pure_packet.params.tau_b
        radius = fit_wavefront_radius(propagate_free(initial_field, t, mass), mass)
        assert radius == pytest.approx(radius_R(t, pure_packet.params), rel=1e-6)
    assert fit_wavefront_radius(initial_field, mass) == math.inf


def test_gouy_trace_unwraps_along_ladder(initial_field, pure_packet):
    tau = pure_packet.params.tau_b
    times = np.linspace(0.0, 50.0, 26) * tau
    trace = gouy_trace(initial_field, times, pure_packet.particle.mass)
    np.testing.assert_allclose(trace, gouy_pure(times, pure_packet.params), atol=1e-6)


def test_numeric_gouy_undefined_on_axis_node(initial_field):
    odd = initial_field.model_copy(update={"values": initial_field.x * initial_field.values})
    with pytest.raises(PhaseUndefinedError):
        numeric_gouy(odd.normalized(), initial_field)


def test_grid_overflow_detected(pure_packet):
    field = GridField.gaussian(B_SLIT, 6 * B_SLIT, 256)
    with pytest.raises(GridOverflowError):
        propagate_free(field, 50 * pure_packet.params.tau_b, pure_packet.particle.mass)


def test_moments_need_normalized_field(initial_field):
    doubled = initial_field.model_copy(update={"values": 2 * initial_field.values})
    with pytest.raises(NormalizationError):
        numeric_moments(doubled)


def test_ensemble_nodes():
    kicks, weights = ensemble_nodes(0.0, EnsembleSpec())
    assert kicks.tolist() == [0.0] and weights.tolist() == [1.0]
    kicks, weights = ensemble_nodes(DELTA_KX, EnsembleSpec())
    assert kicks.size == 32
    assert weights.sum() == pytest.approx(1.0, rel=1e-14)
    # g(k) has variance delta_kx**2 / 2
    assert np.sum(weights * kicks**2) == pytest.approx(DELTA_KX**2 / 2, rel=1e-12)
    with pytest.raises(ValidationError):
        EnsembleSpec(quadrature_nodes=4)


def test_sampled_ensemble_is_seeded():
    spec = EnsembleSpec(mode="sampled", seed=3)
    first, _ = ensemble_nodes(DELTA_KX, spec)
    second, _ = ensemble_nodes(DELTA_KX, spec)
    other, _ = ensemble_nodes(DELTA_KX, EnsembleSpec(mode="sampled", seed=4))
    np.testing.assert_array_equal(first, second)
    assert not np.array_equal(first, other)


def test_ensemble_average_matches_mixed_covariance(c70_state):
    cov, profile = ensemble_average(c70_state, T_FLIGHT, points=2**14)
    exact = covariance_mixed(T_FLIGHT, c70_state)
    assert cov.sigma_xx == pytest.approx(exact.sigma_xx, rel=1e-8)
    assert cov.sigma_pp == pytest.approx(exact.sigma_pp, rel=1e-8)
    assert cov.sigma_xp == pytest.approx(exact.sigma_xp, rel=1e-8)
    assert profile.norm() == pytest.approx(1.0, abs=1e-6)
    assert profile.second_moment() == pytest.approx(exact.sigma_xx, rel=1e-6)


def test_coherent_ensemble_equals_pure_state(c70, pure_packet):
    ms = MixedState.create(B_SLIT, 0.0, c70)
    t = 5 * ms.params.tau_b
    cov, _ = ensemble_average(ms, t)
    exact = covariance_pure(t, pure_packet)
    assert cov.sigma_xx == pytest.approx(exact.sigma_xx, rel=1e-8)
    assert cov.sigma_xp == pytest.approx(exact.sigma_xp, rel=1e-8)


def test_verify_conjecture_at_flight_parameters(c70_state):
    report = verify_conjecture(c70_state, T_FLIGHT, steps=64)
    assert report.steps == 64
    assert report.epsilon == pytest.approx(1.81)
    assert report.max_rel_deviation <= 1e-5
    assert report.rows[-1].t == pytest.approx(T_FLIGHT, rel=1e-12)
    assert report.rows[-1].mu_closed_form == pytest.approx(gouy_mixed(T_FLIGHT, c70_state))


def test_verify_conjecture_rounds_steps(c70_state):
    report = verify_conjecture(c70_state, T_FLIGHT, steps=30)
    assert report.steps == 32
    with pytest.raises(ValueError):
        verify_conjecture(c70_state, T_FLIGHT, steps=8)


def test_sweep_conjecture_over_coherence(c70):
    reports = sweep_conjecture(B_SLIT, c70, T_FLIGHT, products=(0.0, 1.0, 3.0))
    assert [r.epsilon for r in reports] == pytest.approx([1.0, 2.0, 10.0])
    for report in reports:
        assert report.max_rel_deviation <= 1e-4


def test_verification_suite_passes_with_defaults(c70):
    settings = OracleSettings(b=B_SLIT, particle=c70, delta_kx=DELTA_KX, t_flight=T_FLIGHT)
    report = run_verification_suite(settings)
    assert report.passed, [(r.case, r.quantity, r.deviation, r.error) for r in report.failures]
    cases = {row.case for row in report.rows}
    assert {"pure t=0.5tau", "pure t=50tau", "mixed dk=0", "mixed dk=9e+06"} <= cases


def test_verification_suite_fails_on_coarse_grid(c70):
    settings = OracleSettings(
        b=B_SLIT, particle=c70, delta_kx=DELTA_KX, t_flight=T_FLIGHT, grid_points=256
    )
    report = run_verification_suite(settings)
    assert not report.passed
    assert report.failures


def test_moments_converge_under_grid_refinement(pure_packet):
    mass = pure_packet.particle.mass
    tau = pure_packet.params.tau_b
    half_span, _ = grid_for(B_SLIT, mass, 50 * tau)
    coarse = GridField.gaussian(B_SLIT, half_span, 2**14)
    fine = GridField.gaussian(B_SLIT, half_span, 2**15)
    assert fine.dx == pytest.approx(coarse.dx / 2, rel=1e-15)
    for factor in TIMES_TAU:
        a = numeric_moments(propagate_free(coarse, factor * tau, mass))
        b = numeric_moments(propagate_free(fine, factor * tau, mass))
        for name in ("sigma_xx", "sigma_pp", "sigma_xp"):
            assert abs(getattr(a, name) - getattr(b, name)) <= 1e-9 * abs(getattr(b, name))


def test_ensemble_intensity_matches_closed_form(c70_state):
    _, profile = ensemble_average(c70_state, T_FLIGHT, points=2**14)
    exact = intensity(profile.grid, T_FLIGHT, c70_state)
    peak = intensity(0.0, T_FLIGHT, c70_state)
    centre = int(np.argmin(np.abs(profile.grid)))
    assert profile.grid[centre] == 0.0
    assert profile.values[centre] == pytest.approx(peak, rel=1e-6)
    assert np.max(np.abs(profile.values - exact)) <= 1e-6 * peak


def test_oracle_runs_are_deterministic(c70_state, c70):
    first = verify_conjecture(c70_state, T_FLIGHT, steps=16)
    second = verify_conjecture(c70_state, T_FLIGHT, steps=16)
    assert first.model_dump_json() == second.model_dump_json()

    spec = EnsembleSpec(mode="sampled", seed=7)
    cov_a, profile_a = ensemble_average(c70_state, T_FLIGHT, spec)
    cov_b, profile_b = ensemble_average(c70_state, T_FLIGHT, spec)
    assert cov_a == cov_b
    np.testing.assert_array_equal(profile_a.values, profile_b.values)

    settings = OracleSettings(
        b=B_SLIT, particle=c70, delta_kx=DELTA_KX, t_flight=T_FLIGHT, grid_points=256
    )
    assert (
        run_verification_suite(settings).model_dump_json()
        == run_verification_suite(settings).model_dump_json()
    )
