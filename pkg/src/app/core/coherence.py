"""
Partially coherent slit-exit state and its free evolution.

The molecules leave the slit in a Gaussian mixture of transverse momenta,

    rho(x, x', 0) = 1/(b sqrt(pi)) exp(-(x**2 + x'**2)/2b**2) exp(-delta_kx**2 (x - x')**2 / 4),

obtained from the momentum distribution g(k) = exp(-k**2/delta_kx**2)/(sqrt(pi) delta_kx).
Everything below is one-dimensional (transverse x only).
"""

import math
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.integrate import trapezoid
from scipy.optimize import brentq
from scipy.special import ndtr

from src.app.core.errors import DomainError
from src.app.core.gaussian import PureEvolution
from src.app.core.wavepacket import (
    DEFAULT_CONSTANTS,
    CoherenceSpec,
    CovarianceMatrix,
    PacketParams,
    Particle,
    PhysicalConstants,
    coherence_epsilon,
    timescale_tau,
)

LN2 = math.log(2.0)
# FWHM of a Gaussian with unit variance
GAUSSIAN_FWHM_PER_SIGMA = 2.0 * math.sqrt(2.0 * LN2)


def _scalar_or_array(value):
    value = np.asarray(value)
    return value.item() if value.ndim == 0 else value


class MixedState(BaseModel):
    """Partially coherent one-dimensional Gaussian state."""

    model_config = ConfigDict(frozen=True)

    params: PacketParams
    coherence: CoherenceSpec
    particle: Particle
    constants: PhysicalConstants = DEFAULT_CONSTANTS

    @model_validator(mode="after")
    def _check_consistency(self):
        if self.params.dim != 1:
            raise ValueError("mixed states are one-dimensional (dim=1)")
        tau = timescale_tau(self.particle.mass, self.params.b, self.constants)
        if abs(self.params.tau_b - tau) > 1e-12 * tau:
            raise ValueError("params.tau_b was computed for a different mass or hbar")
        eps = coherence_epsilon(self.params.b, self.coherence.delta_kx)
        if abs(self.coherence.epsilon - eps) > 1e-12 * eps:
            raise ValueError("coherence.epsilon was computed for a different width b")
        return self

    @classmethod
    def create(
        cls,
        b: float,
        delta_kx: float,
        particle: Particle,
        constants: PhysicalConstants = DEFAULT_CONSTANTS,
    ) -> "MixedState":
        return cls(
            params=PacketParams.for_particle(b, particle, 1, constants),
            coherence=CoherenceSpec.for_width(b, delta_kx),
            particle=particle,
            constants=constants,
        )

    @property
    def pure(self) -> PureEvolution:
        """The coherent packet the mixture is built from."""
        return PureEvolution(
            params=self.params, particle=self.particle, constants=self.constants
        )


class DetectorSpec(BaseModel):
    """Detector resolution: kernel of full width at half maximum D (m)."""

    model_config = ConfigDict(frozen=True)

    D: float = Field(default=0.0, ge=0, allow_inf_nan=False)
    kernel: Literal["gaussian", "tophat"] = "gaussian"

    @property
    def variance(self) -> float:
        if self.kernel == "gaussian":
            return self.D**2 / (8.0 * LN2)
        return self.D**2 / 12.0


class IntensityProfile(BaseModel):
    """Probability density sampled on an ordered grid at time t."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    t: float
    grid: np.ndarray
    values: np.ndarray

    @model_validator(mode="after")
    def _check_profile(self):
        if self.grid.shape != self.values.shape or self.grid.ndim != 1:
            raise ValueError("grid and values must be 1D arrays of equal length")
        if np.any(np.diff(self.grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        if np.any(self.values < 0):
            raise ValueError("intensity values must be non-negative")
        if abs(self.norm() - 1.0) > 1e-6:
            raise ValueError(f"profile is not normalized (integral {self.norm():.9f})")
        return self

    def norm(self) -> float:
        return float(trapezoid(self.values, self.grid))

    def second_moment(self) -> float:
        mean = trapezoid(self.grid * self.values, self.grid)
        return float(trapezoid((self.grid - mean) ** 2 * self.values, self.grid))


def density_initial(x, x_prime, ms: MixedState):
    """Initial density matrix rho(x, x', 0) after the momentum average."""
    b = ms.params.b
    delta_kx = ms.coherence.delta_kx
    x = np.asarray(x, dtype=float)
    x_prime = np.asarray(x_prime, dtype=float)
    rho = (
        np.exp(-(x**2 + x_prime**2) / (2.0 * b**2))
        * np.exp(-(delta_kx**2) * (x - x_prime) ** 2 / 4.0)
        / (b * math.sqrt(math.pi))
    )
    return _scalar_or_array(rho.astype(complex))


def _sigma_xx(t, ms: MixedState):
    # B**2 [1 + (tau B dk / R)**2] / 2 expanded to b**2 (1 + eps (t/tau)**2) / 2
    ratio = np.asarray(t, dtype=float) / ms.params.tau_b
    return ms.params.b**2 * (1.0 + ms.coherence.epsilon * ratio**2) / 2.0


def _sigma_xp(t, ms: MixedState):
    ratio = np.asarray(t, dtype=float) / ms.params.tau_b
    return ms.constants.hbar / 2.0 * ratio * ms.coherence.epsilon


def covariance_mixed(t: float, ms: MixedState) -> CovarianceMatrix:
    """Covariance of the evolved mixture; det = (hbar**2/4) * epsilon at all t."""
    hbar = ms.constants.hbar
    return CovarianceMatrix(
        sigma_xx=float(_sigma_xx(t, ms)),
        sigma_pp=hbar**2 * ms.coherence.epsilon / (2.0 * ms.params.b**2),
        sigma_xp=float(_sigma_xp(t, ms)),
    )


def effective_width(t, ms: MixedState):
    """B-bar(t) = sqrt(2 sigma_xx), the mixed-state counterpart of B(t)."""
    return _scalar_or_array(np.sqrt(2.0 * _sigma_xx(t, ms)))


def gouy_mixed(t, ms: MixedState):
    """Gouy phase of the mixture from its x-p correlation.

    mu = -1/(2 sqrt(eps)) arctan(2 sigma_xp / (hbar sqrt(eps))), bounded by
    pi/(4 sqrt(eps)) in magnitude.
    """
    root_eps = math.sqrt(ms.coherence.epsilon)
    argument = 2.0 * _sigma_xp(t, ms) / (ms.constants.hbar * root_eps)
    return _scalar_or_array(-np.arctan(argument) / (2.0 * root_eps))


def _gaussian_density(x, variance):
    x = np.asarray(x, dtype=float)
    return np.exp(-(x**2) / (2.0 * variance)) / np.sqrt(2.0 * math.pi * variance)


def intensity(x, t: float, ms: MixedState):
    """I(x, t) = rho(x, x, t): a centred Gaussian of variance sigma_xx(t)."""
    return _scalar_or_array(_gaussian_density(x, _sigma_xx(t, ms)))


def _tophat_blur(x, sigma: float, width: float):
    x = np.asarray(x, dtype=float)
    return (ndtr((x + width / 2.0) / sigma) - ndtr((x - width / 2.0) / sigma)) / width


def detected_intensity(x, t: float, ms: MixedState, det: DetectorSpec):
    """Intensity convolved with the detector kernel (unit normalized)."""
    if det.D == 0:
        return intensity(x, t, ms)
    sigma_xx = float(_sigma_xx(t, ms))
    if det.kernel == "gaussian":
        return _scalar_or_array(_gaussian_density(x, sigma_xx + det.variance))
    return _scalar_or_array(_tophat_blur(x, math.sqrt(sigma_xx), det.D))


def _tophat_fwhm(sigma: float, width: float) -> float:
    if width == 0:
        return GAUSSIAN_FWHM_PER_SIGMA * sigma
    if sigma == 0:
        return width
    half = _tophat_blur(0.0, sigma, width) / 2.0
    upper = width / 2.0 + 12.0 * sigma
    return 2.0 * brentq(
        lambda x: _tophat_blur(x, sigma, width) - half, 0.0, upper, xtol=1e-18, rtol=1e-14
    )


def fwhm(t: float, ms: MixedState, det: DetectorSpec) -> float:
    """Full width at half maximum of the detected pattern."""
    sigma_xx = float(_sigma_xx(t, ms))
    if det.kernel == "tophat" and det.D > 0:
        return _tophat_fwhm(math.sqrt(sigma_xx), det.D)
    return 2.0 * math.sqrt(2.0 * LN2 * (sigma_xx + det.variance))


def deconvolve_fwhm(W: float, det: DetectorSpec) -> float:
    """Remove the detector kernel from a measured width."""
    if det.D == 0:
        return W
    if W < det.D:
        raise DomainError(f"width {W} is narrower than the detector resolution {det.D}")
    if det.kernel == "gaussian":
        return math.sqrt(W**2 - det.D**2)
    if W == det.D:
        return 0.0
    sigma = brentq(
        lambda s: _tophat_fwhm(s, det.D) - W,
        1e-12 * W,
        W / GAUSSIAN_FWHM_PER_SIGMA,
        xtol=1e-18,
        rtol=1e-13,
    )
    return GAUSSIAN_FWHM_PER_SIGMA * sigma


def sigma_xp_from_fwhm(
    W: float,
    b: float,
    delta_kx: float,
    constants: PhysicalConstants = DEFAULT_CONSTANTS,
) -> float:
    """Invert a (detector-free) FWHM into sigma_xp using the saturated determinant.

    Returns the non-negative root; t > 0 (spreading after the slit) is assumed.
    """
    floor = 2.0 * math.sqrt(LN2) * b
    excess = (W / floor) ** 2 - 1.0
    if excess < 0:
        if excess < -1e-12:
            raise DomainError(
                f"width below initial-state minimum: W={W} < 2 sqrt(ln2) b={floor}"
            )
        excess = 0.0
    eps = coherence_epsilon(b, delta_kx)
    return constants.hbar / 2.0 * math.sqrt(eps) * math.sqrt(excess)


def intensity_profile(
    t: float,
    ms: MixedState,
    det: DetectorSpec = DetectorSpec(),
    points: int = 2001,
    half_span_sigmas: float = 8.0,
) -> IntensityProfile:
    """Detected intensity sampled on a grid spanning +-8 effective widths."""
    sigma_eff = math.sqrt(float(_sigma_xx(t, ms)) + det.variance)
    grid = np.linspace(-half_span_sigmas * sigma_eff, half_span_sigmas * sigma_eff, points)
    values = np.asarray(detected_intensity(grid, t, ms, det), dtype=float)
    return IntensityProfile(t=t, grid=grid, values=values)
