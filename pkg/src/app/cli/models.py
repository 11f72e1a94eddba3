"""
Run configuration for the command-line interface.

A run config is a flat key=value file with namespaced keys, for example

    # C70 fullerene run
    particle.v_z=188
    coherence.delta_kx=9.0e6
    experiment.t_s=6.65e-3

Keys are read with python-dotenv and validated into RunConfig; unknown keys
are rejected. Values given on the command line override the file, and the
file overrides the environment-backed defaults in src.config.
"""

import logging
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

import numpy as np
from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field

from src.app.core.coherence import DetectorSpec
from src.app.core.errors import DatasetParseError
from src.app.core.experiment import ExperimentConfig, VdwPolicy
from src.app.core.oracle import EnsembleSpec, OracleSettings
from src.app.core.wavepacket import Particle, PhysicalConstants
from src.config.constants import ATOMIC_MASS_UNIT, C70_MASS_U, HBAR
from src.config.defaults import (
    DELTA_KX,
    DETECTOR_FWHM,
    FIT_INIT,
    FIT_MAX_EVALUATIONS,
    ORACLE_GRID_POINTS,
    ORACLE_LADDER_STEPS,
    ORACLE_NODES,
    ORACLE_SEED,
    PACKET_WIDTH,
    TIME_OF_FLIGHT,
    VDW_FACTOR,
    VDW_THRESHOLD,
)

logger = logging.getLogger(__name__)


class RunConfig(BaseModel):
    """Every physical and numerical parameter a command may use (SI units)."""

    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    hbar: float = Field(default=HBAR, gt=0)
    amu: float = Field(default=ATOMIC_MASS_UNIT, gt=0)
    particle_mass_u: float = Field(default=C70_MASS_U, gt=0, alias="particle.mass_u")
    particle_v_z: Optional[float] = Field(default=None, gt=0, alias="particle.v_z")
    packet_b_m: float = Field(default=PACKET_WIDTH, gt=0, alias="packet.b_m")
    packet_dim: int = Field(default=1, ge=1, le=2, alias="packet.dim")
    coherence_delta_kx: float = Field(default=DELTA_KX, ge=0, alias="coherence.delta_kx")
    detector_fwhm_m: float = Field(default=DETECTOR_FWHM, ge=0, alias="detector.fwhm_m")
    detector_kernel: Literal["gaussian", "tophat"] = Field(
        default="gaussian", alias="detector.kernel"
    )
    experiment_t_s: float = Field(default=TIME_OF_FLIGHT, gt=0, alias="experiment.t_s")
    experiment_slit_factor: float = Field(default=1.0, gt=0, alias="experiment.slit_factor")
    experiment_vdw_policy: Literal["none", "factor_below_threshold", "per_point_flag"] = Field(
        default="per_point_flag", alias="experiment.vdw_policy"
    )
    experiment_vdw_factor: float = Field(
        default=VDW_FACTOR, gt=0, le=1, alias="experiment.vdw_factor"
    )
    experiment_vdw_threshold_m: float = Field(
        default=VDW_THRESHOLD, gt=0, alias="experiment.vdw_threshold_m"
    )
    experiment_deconvolve: bool = Field(default=True, alias="experiment.deconvolve")
    experiment_fit_init: float = Field(default=FIT_INIT, gt=0, alias="experiment.fit_init")
    experiment_fit_slit_factor: bool = Field(default=False, alias="experiment.fit_slit_factor")
    experiment_fit_max_evaluations: int = Field(
        default=FIT_MAX_EVALUATIONS, ge=1, alias="experiment.fit_max_evaluations"
    )
    experiment_theta_convention: Literal["sigma", "sqrt2-sigma"] = Field(
        default="sqrt2-sigma", alias="experiment.theta_convention"
    )
    sweep_t_max_tau: float = Field(default=50.0, gt=0, alias="sweep.t_max_tau")
    sweep_t_points: int = Field(default=201, ge=2, alias="sweep.t_points")
    curves_a_min_m: float = Field(default=5e-8, gt=0, alias="curves.a_min_m")
    curves_a_max_m: float = Field(default=3e-5, gt=0, alias="curves.a_max_m")
    curves_a_points: int = Field(default=200, ge=2, alias="curves.a_points")
    curves_log_x: bool = Field(default=True, alias="curves.log_x")
    oracle_grid_points: int = Field(default=ORACLE_GRID_POINTS, ge=16, alias="oracle.grid_points")
    oracle_nodes: int = Field(default=ORACLE_NODES, ge=8, alias="oracle.nodes")
    oracle_seed: int = Field(default=ORACLE_SEED, alias="oracle.seed")
    oracle_mode: Literal["hermite", "sampled"] = Field(default="hermite", alias="oracle.mode")
    oracle_ladder_steps: int = Field(default=ORACLE_LADDER_STEPS, ge=16, alias="oracle.ladder_steps")
    output_dir: str = Field(default="output", alias="output.dir")

    def metadata(self) -> Dict[str, Any]:
        """All parameters keyed by their config-file names, for output headers."""
        return self.model_dump(by_alias=True)

    def constants(self) -> PhysicalConstants:
        return PhysicalConstants(hbar=self.hbar, atomic_mass_unit=self.amu)

    def particle(self) -> Particle:
        return Particle.from_mass_u(self.particle_mass_u, self.particle_v_z, self.constants())

    def detector(self) -> DetectorSpec:
        return DetectorSpec(D=self.detector_fwhm_m, kernel=self.detector_kernel)

    def experiment(self) -> ExperimentConfig:
        return ExperimentConfig(
            particle=self.particle(),
            t=self.experiment_t_s,
            detector=self.detector(),
            slit_factor=self.experiment_slit_factor,
            vdw_policy=VdwPolicy(
                kind=self.experiment_vdw_policy,
                factor=self.experiment_vdw_factor,
                threshold=self.experiment_vdw_threshold_m,
            ),
            deconvolve=self.experiment_deconvolve,
            constants=self.constants(),
        )

    def oracle_settings(self) -> OracleSettings:
        return OracleSettings(
            b=self.packet_b_m,
            particle=self.particle(),
            delta_kx=self.coherence_delta_kx,
            t_flight=self.experiment_t_s,
            grid_points=self.oracle_grid_points,
            ensemble=EnsembleSpec(
                quadrature_nodes=self.oracle_nodes,
                seed=self.oracle_seed,
                mode=self.oracle_mode,
            ),
            ladder_steps=self.oracle_ladder_steps,
            constants=self.constants(),
        )

    def slit_widths(self) -> List[float]:
        """The slit-width sweep of the curves command."""
        lo, hi, n = self.curves_a_min_m, self.curves_a_max_m, self.curves_a_points
        if hi <= lo:
            raise ValueError(f"curves.a_max_m ({hi}) must exceed curves.a_min_m ({lo})")
        if self.curves_log_x:
            return np.geomspace(lo, hi, n).tolist()
        return np.linspace(lo, hi, n).tolist()


def read_config_file(path: Union[str, Path]) -> Dict[str, str]:
    """Raw key=value pairs of a run config file."""
    path = Path(path)
    if not path.is_file():
        raise DatasetParseError(f"config file {path} does not exist")
    values = dotenv_values(path, interpolate=False)
    for key, value in values.items():
        if value is None:
            raise DatasetParseError(f"config key {key!r} in {path} has no value")
    logger.debug(f"Read {len(values)} keys from {path}")
    return dict(values)


def load_run_config(
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> RunConfig:
    """Build the run config: defaults, then the config file, then CLI overrides.

    Raises:
        DatasetParseError: If the file is missing or a key has no value.
        pydantic.ValidationError: On unknown keys or out-of-range values.
    """
    values: Dict[str, Any] = {}
    if path is not None:
        values.update(read_config_file(path))
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value
    return RunConfig.model_validate(values)
