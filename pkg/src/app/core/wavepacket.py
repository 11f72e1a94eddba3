"""
Physical constants, particle and packet parameter types.

All quantities are SI. The records are frozen pydantic models so they can be
shared freely between sweeps.
"""

import math
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.app.core.errors import DomainError, MissingVelocityError
from src.config.constants import ATOMIC_MASS_UNIT, C70_MASS_U, HBAR


def _require_finite(name: str, value: float, allow_zero: bool = True) -> float:
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value}")
    if value < 0 or (value == 0 and not allow_zero):
        bound = ">= 0" if allow_zero else "> 0"
        raise DomainError(f"{name} must be {bound}, got {value}")
    return value


class PhysicalConstants(BaseModel):
    """Constant table. planck is derived from hbar unless given explicitly."""

    model_config = ConfigDict(frozen=True)

    hbar: float = Field(default=HBAR, gt=0)
    planck: float = Field(gt=0)
    atomic_mass_unit: float = Field(default=ATOMIC_MASS_UNIT, gt=0)

    @model_validator(mode="before")
    @classmethod
    def _derive_planck(cls, data):
        if isinstance(data, dict) and data.get("planck") is None:
            data = {**data, "planck": 2.0 * math.pi * data.get("hbar", HBAR)}
        return data

    @model_validator(mode="after")
    def _check_planck(self):
        expected = 2.0 * math.pi * self.hbar
        if abs(self.planck - expected) > 1e-12 * expected:
            raise ValueError(
                f"planck={self.planck} is inconsistent with 2*pi*hbar={expected}"
            )
        return self


DEFAULT_CONSTANTS = PhysicalConstants()


class Particle(BaseModel):
    """A massive particle moving along z with an optional velocity v_z."""

    model_config = ConfigDict(frozen=True)

    mass: float = Field(gt=0, allow_inf_nan=False)
    v_z: Optional[float] = Field(default=None, gt=0, allow_inf_nan=False)

    @classmethod
    def from_mass_u(
        cls,
        mass_u: float,
        v_z: Optional[float] = None,
        constants: PhysicalConstants = DEFAULT_CONSTANTS,
    ) -> "Particle":
        return cls(mass=mass_u * constants.atomic_mass_unit, v_z=v_z)

    @classmethod
    def c70(
        cls,
        v_z: Optional[float] = None,
        constants: PhysicalConstants = DEFAULT_CONSTANTS,
    ) -> "Particle":
        """Fullerene C70 (70 x 12.011 u)."""
        return cls.from_mass_u(C70_MASS_U, v_z, constants)

    def require_velocity(self, what: str = "this quantity") -> float:
        if self.v_z is None:
            raise MissingVelocityError(what)
        return self.v_z

    def k_z(self, constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
        """Longitudinal wave number m*v_z/hbar."""
        return self.mass * self.require_velocity("k_z") / constants.hbar


def timescale_tau(
    mass: float, b: float, constants: PhysicalConstants = DEFAULT_CONSTANTS
) -> float:
    """Packet timescale tau_b = m*b**2/hbar, the analog of the Rayleigh range."""
    _require_finite("mass", mass, allow_zero=False)
    _require_finite("b", b)
    return mass * b**2 / constants.hbar


def de_broglie_wavelength(
    particle: Particle, constants: PhysicalConstants = DEFAULT_CONSTANTS
) -> float:
    """lambda_P = h/(m*v_z)."""
    v_z = particle.require_velocity("the de Broglie wavelength")
    return constants.planck / (particle.mass * v_z)


def coherence_epsilon(b: float, delta_kx: float) -> float:
    """The partial-coherence factor 1 + b**2 * delta_kx**2."""
    _require_finite("b", b)
    _require_finite("delta_kx", delta_kx)
    return 1.0 + (b * delta_kx) ** 2


class PacketParams(BaseModel):
    """Initial Gaussian packet of width b in `dim` transverse dimensions.

    b is the 1/e half-width of the initial probability density (the amplitude
    falls as exp(-x**2 / 2b**2)), so sigma_xx(0) = b**2 / 2.
    """

    model_config = ConfigDict(frozen=True)

    b: float = Field(gt=0, allow_inf_nan=False)
    dim: int = Field(default=1, ge=1, le=2)
    tau_b: float = Field(gt=0, allow_inf_nan=False)

    @classmethod
    def for_particle(
        cls,
        b: float,
        particle: Particle,
        dim: int = 1,
        constants: PhysicalConstants = DEFAULT_CONSTANTS,
    ) -> "PacketParams":
        return cls(b=b, dim=dim, tau_b=timescale_tau(particle.mass, b, constants))


class CoherenceSpec(BaseModel):
    """Gaussian transverse-momentum spread delta_kx and its factor epsilon."""

    model_config = ConfigDict(frozen=True)

    delta_kx: float = Field(default=0.0, ge=0, allow_inf_nan=False)
    epsilon: float = Field(default=1.0, ge=1, allow_inf_nan=False)

    @classmethod
    def for_width(cls, b: float, delta_kx: float) -> "CoherenceSpec":
        epsilon = coherence_epsilon(b, delta_kx)
        # (b delta_kx)**2 below double precision is the coherent state
        if epsilon == 1.0:
            delta_kx = 0.0
        return cls(delta_kx=delta_kx, epsilon=epsilon)

    @model_validator(mode="after")
    def _coherent_limit(self):
        if (self.delta_kx == 0) != (self.epsilon == 1.0):
            raise ValueError(
                f"epsilon is 1 exactly when delta_kx is 0, got delta_kx={self.delta_kx}, "
                f"epsilon={self.epsilon}"
            )
        return self


class CovarianceMatrix(BaseModel):
    """Second moments of a one-dimensional state."""

    model_config = ConfigDict(frozen=True)

    sigma_xx: float = Field(gt=0)
    sigma_pp: float = Field(gt=0)
    sigma_xp: float

    @property
    def determinant(self) -> float:
        return self.sigma_xx * self.sigma_pp - self.sigma_xp**2

    def satisfies_uncertainty(
        self, constants: PhysicalConstants = DEFAULT_CONSTANTS, rtol: float = 1e-9
    ) -> bool:
        """Schrodinger-Robertson bound det >= hbar**2/4, up to rtol."""
        bound = constants.hbar**2 / 4.0
        return self.determinant >= bound * (1.0 - rtol)
