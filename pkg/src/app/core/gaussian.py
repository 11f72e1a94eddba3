"""
Closed-form free evolution of a pure Gaussian matter-wave packet.

The packet amplitude per transverse dimension is

    (pi B**2)**(-1/4) * exp(-x**2 / 2B**2) * exp(i m x**2 / 2 hbar R) * exp(i mu_1)

with B(t) = b sqrt(1 + (t/tau_b)**2), R(t) = t + tau_b**2/t (a time, the
wavefront curvature expressed through m/hbar) and the per-dimension Gouy
phase mu_1 = -arctan(t/tau_b)/2. A packet in `dim` dimensions carries
dim * mu_1. Time arguments accept floats or numpy arrays; negative times
are allowed.
"""

import math
from typing import Callable, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.integrate import quad

from src.app.core.errors import DomainError
from src.app.core.wavepacket import (
    DEFAULT_CONSTANTS,
    CovarianceMatrix,
    PacketParams,
    Particle,
    PhysicalConstants,
    de_broglie_wavelength,
    timescale_tau,
)
from src.config.defaults import QUAD_LIMIT, QUAD_RTOL


def _scalar_or_array(value):
    value = np.asarray(value, dtype=float)
    return float(value) if value.ndim == 0 else value


class PureEvolution(BaseModel):
    """A pure Gaussian packet together with the particle carrying it."""

    model_config = ConfigDict(frozen=True)

    params: PacketParams
    particle: Particle
    constants: PhysicalConstants = DEFAULT_CONSTANTS

    @model_validator(mode="after")
    def _tau_matches_particle(self):
        expected = timescale_tau(self.particle.mass, self.params.b, self.constants)
        if abs(self.params.tau_b - expected) > 1e-12 * expected:
            raise ValueError("params.tau_b was computed for a different mass or hbar")
        return self

    @classmethod
    def create(
        cls,
        b: float,
        particle: Particle,
        dim: int = 1,
        constants: PhysicalConstants = DEFAULT_CONSTANTS,
    ) -> "PureEvolution":
        params = PacketParams.for_particle(b, particle, dim, constants)
        return cls(params=params, particle=particle, constants=constants)


def width_B(t, params: PacketParams):
    """Packet width B(t); even in t."""
    t = np.asarray(t, dtype=float)
    return _scalar_or_array(params.b * np.sqrt(1.0 + (t / params.tau_b) ** 2))


def radius_R(t, params: PacketParams):
    """Wavefront curvature time R(t) = t + tau_b**2/t.

    At t = 0 the wavefront is flat and the result is a signed infinity
    rather than an error, so sweeps through t = 0 do not abort.
    """
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore"):
        radius = t + params.tau_b**2 / t
    return _scalar_or_array(radius)


def inverse_radius(t, params: PacketParams):
    """1/R(t), finite everywhere (zero at t = 0)."""
    t = np.asarray(t, dtype=float)
    return _scalar_or_array(t / (t**2 + params.tau_b**2))


def gouy_pure(t, params: PacketParams, dim: Optional[int] = None):
    """Gouy phase -(dim/2) arctan(t/tau_b); dim defaults to params.dim."""
    dim = params.dim if dim is None else dim
    if dim not in (1, 2):
        raise DomainError(f"dim must be 1 or 2, got {dim}")
    t = np.asarray(t, dtype=float)
    return _scalar_or_array(-0.5 * dim * np.arctan(t / params.tau_b))


def _amplitude_1d(x, t, ev: PureEvolution):
    params = ev.params
    width = width_B(t, params)
    curvature = ev.particle.mass * inverse_radius(t, params) / (2.0 * ev.constants.hbar)
    x = np.asarray(x, dtype=float)
    envelope = (math.pi * width**2) ** -0.25 * np.exp(-(x**2) / (2.0 * width**2))
    return envelope * np.exp(1j * curvature * x**2)


def wavefunction_pure(x, y, t: float, ev: PureEvolution):
    """Evolved packet amplitude psi(x, y, t).

    For a one-dimensional packet pass y=None; the y factor is dropped and
    the phase carries a single dimension's Gouy term.
    """
    dim = ev.params.dim
    if (dim == 2) != (y is not None):
        raise DomainError(f"a dim={dim} packet needs {'x and y' if dim == 2 else 'x only'}")
    psi = _amplitude_1d(x, t, ev)
    if dim == 2:
        psi = psi * _amplitude_1d(y, t, ev)
    return psi * np.exp(1j * gouy_pure(t, ev.params))


def covariance_pure(t: float, ev: PureEvolution) -> CovarianceMatrix:
    """Per-dimension covariance matrix; its determinant stays at hbar**2/4."""
    hbar = ev.constants.hbar
    b = ev.params.b
    return CovarianceMatrix(
        sigma_xx=width_B(t, ev.params) ** 2 / 2.0,
        sigma_pp=hbar**2 / (2.0 * b**2),
        sigma_xp=hbar * t / (2.0 * ev.params.tau_b),
    )


def gouy_from_width_integral(
    width_fn: Callable[[float], float],
    t: float,
    mass: float,
    constants: PhysicalConstants = DEFAULT_CONSTANTS,
    rtol: float = QUAD_RTOL,
    limit: int = QUAD_LIMIT,
) -> float:
    """Gouy phase -(hbar/2m) * integral_0^t dt'/width(t')**2 by adaptive quadrature.

    For the pure-state width this is the per-dimension phase
    -arctan(t/tau_b)/2.

    Args:
        width_fn (Callable[[float], float]): Packet width B(t) in m, positive on [0, t].
        t (float): Upper limit in seconds; negative t integrates backwards.
        mass (float): Particle mass in kg.
        rtol (float): Relative tolerance passed to quad.
        limit (int): Subinterval limit passed to quad.

    Returns:
        float: The phase in rad.

    Raises:
        DomainError: If the width is non-positive or non-finite where sampled.
    """

    def integrand(s: float) -> float:
        width = width_fn(s)
        if not (math.isfinite(width) and width > 0):
            raise DomainError(f"width must be positive, got {width} at t={s}")
        return 1.0 / width**2

    if t == 0:
        return 0.0
    integrand(0.0)
    integrand(t)
    value, _ = quad(integrand, 0.0, t, epsabs=0.0, epsrel=rtol, limit=limit)
    return -constants.hbar / (2.0 * mass) * value


class OpticalBeam(BaseModel):
    """Paraxial optical Gaussian beam; w0 is the 1/e amplitude radius."""

    model_config = ConfigDict(frozen=True)

    lambda_L: float = Field(gt=0)
    w0: float = Field(gt=0)
    z_R: float = Field(gt=0)

    @model_validator(mode="before")
    @classmethod
    def _derive_rayleigh_range(cls, data):
        if isinstance(data, dict) and data.get("z_R") is None:
            w0, lambda_l = data.get("w0"), data.get("lambda_L")
            if w0 and lambda_l:
                data = {**data, "z_R": math.pi * w0**2 / lambda_l}
        return data

    def width(self, z):
        z = np.asarray(z, dtype=float)
        return _scalar_or_array(self.w0 * np.sqrt(1.0 + (z / self.z_R) ** 2))

    def radius(self, z):
        z = np.asarray(z, dtype=float)
        with np.errstate(divide="ignore"):
            return _scalar_or_array(z + self.z_R**2 / z)

    def gouy(self, z):
        """Gouy phase zeta(z) = arctan(z/z_R) (enters the field as exp(-i zeta))."""
        z = np.asarray(z, dtype=float)
        return _scalar_or_array(np.arctan(z / self.z_R))


def optical_equivalent(
    params: PacketParams,
    particle: Particle,
    constants: PhysicalConstants = DEFAULT_CONSTANTS,
) -> OpticalBeam:
    """Optical beam obeying the same paraxial equation as the packet.

    With lambda_L = lambda_P and z = v_z t the packet maps onto a beam of
    waist w0 = sqrt(2) b, so that z_R = v_z tau_b, w(z) = sqrt(2) B(t),
    R(z) = v_z R(t) and zeta(z) = -gouy_pure(t, dim=2).
    """
    lambda_p = de_broglie_wavelength(particle, constants)
    return OpticalBeam(lambda_L=lambda_p, w0=math.sqrt(2.0) * params.b)


def optical_correspondence_deviation(ev: PureEvolution, times) -> float:
    """Largest relative mismatch between the beam and packet over `times` (t != 0)."""
    beam = optical_equivalent(ev.params, ev.particle, ev.constants)
    v_z = ev.particle.require_velocity("the optical correspondence")
    times = np.atleast_1d(np.asarray(times, dtype=float))
    z = v_z * times
    pairs = [
        (beam.width(z), math.sqrt(2.0) * np.atleast_1d(width_B(times, ev.params))),
        (beam.radius(z), v_z * np.atleast_1d(radius_R(times, ev.params))),
        (beam.gouy(z), -np.atleast_1d(gouy_pure(times, ev.params, dim=2))),
    ]
    deviation = 0.0
    for optical, packet in pairs:
        optical = np.atleast_1d(optical)
        scale = np.maximum(np.abs(packet), np.finfo(float).tiny)
        deviation = max(deviation, float(np.max(np.abs(optical - packet) / scale)))
    deviation = max(deviation, abs(beam.z_R - v_z * ev.params.tau_b) / beam.z_R)
    return deviation
