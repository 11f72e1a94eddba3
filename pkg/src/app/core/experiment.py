"""
Slit-width analysis of the fullerene diffraction experiment.

Maps slit widths to Gaussian slit parameters b (with the van der Waals
narrowing policy), predicts the detected FWHM, the x-p correlation and the
Gouy phase as functions of the slit width, and fits the transverse coherence
parameter delta_kx to measured widths.
"""

import logging
import math
from typing import List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.optimize import least_squares, minimize_scalar

from src.app.core.coherence import (
    LN2,
    DetectorSpec,
    MixedState,
    covariance_mixed,
    deconvolve_fwhm,
    fwhm,
    gouy_mixed,
    sigma_xp_from_fwhm,
)
from src.app.core.errors import DomainError, IllPosedFitError
from src.app.core.output import CurvePoint, FitResult
from src.app.core.wavepacket import (
    DEFAULT_CONSTANTS,
    Particle,
    PhysicalConstants,
    coherence_epsilon,
)
from src.config.defaults import (
    DETECTOR_FWHM,
    FIT_INIT,
    FIT_MAX_EVALUATIONS,
    TIME_OF_FLIGHT,
    VDW_FACTOR,
    VDW_THRESHOLD,
)

logger = logging.getLogger(__name__)

GRADIENT_TOLERANCE = 1e-6
ThetaConvention = Literal["sigma", "sqrt2-sigma"]


class VdwPolicy(BaseModel):
    """Which slits are narrowed by the molecule-wall attraction, and by how much."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["none", "factor_below_threshold", "per_point_flag"] = "per_point_flag"
    factor: float = Field(default=VDW_FACTOR, gt=0, le=1)
    threshold: float = Field(default=VDW_THRESHOLD, gt=0)


class DataPoint(BaseModel):
    """A measured beam width behind a slit of width slit_width (both in m)."""

    model_config = ConfigDict(frozen=True)

    slit_width: float = Field(gt=0, allow_inf_nan=False)
    measured_fwhm: float = Field(gt=0, allow_inf_nan=False)
    vdw_flag: bool = False
    weight: float = Field(default=1.0, ge=0, allow_inf_nan=False)


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    particle: Particle = Field(default_factory=Particle.c70)
    t: float = Field(default=TIME_OF_FLIGHT, gt=0)
    detector: DetectorSpec = DetectorSpec(D=DETECTOR_FWHM)
    slit_factor: float = Field(default=1.0, gt=0)
    vdw_policy: VdwPolicy = VdwPolicy()
    deconvolve: bool = True
    constants: PhysicalConstants = DEFAULT_CONSTANTS


def slit_to_b(
    a: float,
    cfg: ExperimentConfig,
    vdw_flag: bool = False,
    slit_factor: Optional[float] = None,
) -> float:
    """Gaussian slit parameter b for a slit of width a."""
    if not (math.isfinite(a) and a > 0):
        raise DomainError(f"slit width must be positive, got {a}")
    factor = cfg.slit_factor if slit_factor is None else slit_factor
    b = factor * a
    policy = cfg.vdw_policy
    if policy.kind == "factor_below_threshold" and a < policy.threshold:
        b *= policy.factor
    elif policy.kind == "per_point_flag" and vdw_flag:
        b *= policy.factor
    if not b > 0:
        raise DomainError(f"slit mapping produced non-positive b={b}")
    return b


def _state(b: float, delta_kx: float, cfg: ExperimentConfig) -> MixedState:
    return MixedState.create(b, delta_kx, cfg.particle, cfg.constants)


def _check_sweep(a_values: Sequence[float], vdw_flags) -> List[bool]:
    a = np.asarray(a_values, dtype=float)
    if a.size == 0 or np.any(a <= 0) or np.any(np.diff(a) < 0):
        raise DomainError("slit widths must be positive and sorted")
    if vdw_flags is None:
        return [False] * a.size
    if len(vdw_flags) != a.size:
        raise DomainError("one vdw flag per slit width is required")
    return list(vdw_flags)


def predict_fwhm_curve(
    a_values: Sequence[float],
    delta_kx: float,
    cfg: ExperimentConfig,
    vdw_flags: Optional[Sequence[bool]] = None,
) -> List[CurvePoint]:
    """
    Detected FWHM at the screen versus slit width.

    Args:
        a_values (Sequence[float]): Strictly increasing positive slit widths in m.
        delta_kx (float): Transverse momentum spread in 1/m.
        cfg (ExperimentConfig): Flight time, detector and slit mapping.
        vdw_flags (Sequence[bool], optional): Per-slit van der Waals flags.

    Returns:
        List[CurvePoint]: (a, b, FWHM) for each slit width.
    """
    points = []
    for a, flag in zip(a_values, _check_sweep(a_values, vdw_flags)):
        b = slit_to_b(a, cfg, flag)
        points.append(CurvePoint(a=a, b=b, value=fwhm(cfg.t, _state(b, delta_kx, cfg), cfg.detector)))
    return points


def sigma_xp_curve(
    a_values: Sequence[float],
    delta_kx: float,
    cfg: ExperimentConfig,
    vdw_flags: Optional[Sequence[bool]] = None,
) -> List[CurvePoint]:
    """x-p correlation (hbar/2)(t/tau_b) epsilon versus slit width."""
    points = []
    for a, flag in zip(a_values, _check_sweep(a_values, vdw_flags)):
        b = slit_to_b(a, cfg, flag)
        cov = covariance_mixed(cfg.t, _state(b, delta_kx, cfg))
        points.append(CurvePoint(a=a, b=b, value=cov.sigma_xp))
    return points


def gouy_curve(
    a_values: Sequence[float],
    delta_kx: float,
    cfg: ExperimentConfig,
    vdw_flags: Optional[Sequence[bool]] = None,
) -> List[CurvePoint]:
    """Gouy phase of the partially coherent state versus slit width."""
    points = []
    for a, flag in zip(a_values, _check_sweep(a_values, vdw_flags)):
        b = slit_to_b(a, cfg, flag)
        points.append(CurvePoint(a=a, b=b, value=float(gouy_mixed(cfg.t, _state(b, delta_kx, cfg)))))
    return points


def optimal_slit(
    delta_kx: float,
    cfg: ExperimentConfig,
    bounds: Tuple[float, float] = (1e-9, 1e-4),
) -> Tuple[float, float]:
    """
    Slit width minimizing the detected FWHM, and that minimum width.

    Args:
        delta_kx (float): Transverse momentum spread in 1/m.
        cfg (ExperimentConfig): Flight time, detector and slit mapping.
        bounds (Tuple[float, float]): Slit-width search interval in m.

    Returns:
        Tuple[float, float]: The optimal slit width and the detected FWHM there.
    """

    def width_at(log_a: float) -> float:
        a = math.exp(log_a)
        return fwhm(cfg.t, _state(slit_to_b(a, cfg), delta_kx, cfg), cfg.detector)

    result = minimize_scalar(
        width_at,
        bounds=(math.log(bounds[0]), math.log(bounds[1])),
        method="bounded",
        options={"xatol": 1e-10},
    )
    return math.exp(result.x), float(result.fun)


def _effective_widths(data: Sequence[DataPoint], cfg: ExperimentConfig) -> np.ndarray:
    widths = []
    for i, point in enumerate(data, start=1):
        width = point.measured_fwhm
        if cfg.deconvolve:
            try:
                width = deconvolve_fwhm(width, cfg.detector)
            except DomainError as e:
                raise IllPosedFitError(f"point {i}: {e}") from e
        b = slit_to_b(point.slit_width, cfg, point.vdw_flag)
        floor = 2.0 * math.sqrt(LN2) * b
        if width < floor * (1.0 - 1e-12):
            raise IllPosedFitError(
                f"point {i}: width below initial-state minimum "
                f"({width:.4e} m < {floor:.4e} m)"
            )
        widths.append(width)
    return np.asarray(widths)


def fit_delta_kx(
    data: Sequence[DataPoint],
    cfg: ExperimentConfig,
    init: float = FIT_INIT,
    fit_slit_factor: bool = False,
    max_evaluations: int = FIT_MAX_EVALUATIONS,
) -> FitResult:
    """Weighted least-squares fit of delta_kx (optionally with the slit factor).

    Bounded trust-region least squares over delta_kx >= 0; the standard error
    comes from the Jacobian at the optimum.

    Args:
        data (Sequence[DataPoint]): Measured widths, at least 3 at two or more slits.
        cfg (ExperimentConfig): Flight time, detector and slit mapping.
        init (float): Starting delta_kx in 1/m; also the parameter scale.
        fit_slit_factor (bool): Co-fit the slit-to-b factor, starting from cfg.slit_factor.
        max_evaluations (int): Residual evaluation budget.

    Returns:
        FitResult: Best-so-far parameters with converged=False when the
        optimizer stopped early.

    Raises:
        IllPosedFitError: Too few points, a single slit width, or a width
            below the detector or the initial packet.
        DomainError: If init is not positive.
    """
    if len(data) < 3:
        raise IllPosedFitError(f"ill-posed fit: need at least 3 points, got {len(data)}")
    if len({point.slit_width for point in data}) < 2:
        raise IllPosedFitError("ill-posed fit: all points share one slit width")
    if not init > 0:
        raise DomainError(f"initial delta_kx must be positive, got {init}")
    _effective_widths(data, cfg)

    measured = np.array([point.measured_fwhm for point in data])
    root_weights = np.sqrt([point.weight for point in data])
    scale = float(np.median(measured))

    def model(params: np.ndarray) -> np.ndarray:
        delta_kx = params[0] * init
        factor = params[1] if fit_slit_factor else cfg.slit_factor
        return np.array(
            [
                fwhm(
                    cfg.t,
                    _state(slit_to_b(p.slit_width, cfg, p.vdw_flag, factor), delta_kx, cfg),
                    cfg.detector,
                )
                for p in data
            ]
        )

    def residuals(params: np.ndarray) -> np.ndarray:
        return root_weights * (model(params) - measured) / scale

    x0 = [1.0, cfg.slit_factor] if fit_slit_factor else [1.0]
    lower = [0.0, 1e-6] if fit_slit_factor else [0.0]
    result = least_squares(
        residuals,
        x0,
        bounds=(lower, np.inf),
        method="trf",
        ftol=1e-12,
        xtol=1e-12,
        gtol=1e-12,
        max_nfev=max_evaluations,
    )

    n_params = len(x0)
    dof = len(data) - n_params
    variance = 2.0 * result.cost / dof if dof > 0 else 0.0
    covariance = variance * np.linalg.pinv(result.jac.T @ result.jac)
    stderr = np.sqrt(np.clip(np.diag(covariance), 0.0, None))
    gradient_norm = float(np.max(np.abs(result.grad)))
    converged = bool(result.status > 0 and result.optimality <= GRADIENT_TOLERANCE)
    if not converged:
        logger.warning(f"delta_kx fit did not converge: {result.message}")

    fitted = FitResult(
        delta_kx=float(result.x[0] * init),
        residual_rms=float(np.sqrt(np.mean((model(result.x) - measured) ** 2))),
        parameter_stderr=float(stderr[0] * init),
        n_iterations=int(result.nfev),
        converged=converged,
        gradient_norm=gradient_norm,
        slit_factor=float(result.x[1]) if fit_slit_factor else cfg.slit_factor,
        slit_factor_stderr=float(stderr[1]) if fit_slit_factor else None,
        n_points=len(data),
        message=str(result.message),
    )
    logger.info(
        f"Fitted delta_kx={fitted.delta_kx:.6e} 1/m "
        f"(stderr {fitted.parameter_stderr:.2e}, {fitted.n_iterations} evaluations)"
    )
    return fitted


def data_sigma_xp(
    data: Sequence[DataPoint], delta_kx: float, cfg: ExperimentConfig
) -> List[CurvePoint]:
    """sigma_xp inferred from each measured width through the saturated determinant."""
    widths = _effective_widths(data, cfg)
    points = []
    for point, width in zip(data, widths):
        b = slit_to_b(point.slit_width, cfg, point.vdw_flag)
        value = sigma_xp_from_fwhm(width, b, delta_kx, cfg.constants)
        points.append(CurvePoint(a=point.slit_width, b=b, value=value))
    return points


def data_gouy(
    data: Sequence[DataPoint], delta_kx: float, cfg: ExperimentConfig
) -> List[CurvePoint]:
    """Gouy phase inferred from each measured width via its sigma_xp."""
    hbar = cfg.constants.hbar
    points = []
    for point in data_sigma_xp(data, delta_kx, cfg):
        root_eps = math.sqrt(coherence_epsilon(point.b, delta_kx))
        mu = -math.atan(2.0 * point.value / (hbar * root_eps)) / (2.0 * root_eps)
        points.append(CurvePoint(a=point.a, b=point.b, value=mu))
    return points


def angular_divergence(
    delta_kx: float,
    particle: Particle,
    convention: ThetaConvention = "sqrt2-sigma",
    constants: PhysicalConstants = DEFAULT_CONSTANTS,
) -> float:
    """
    Beam divergence delta_kx/k_z, or delta_kx/(sqrt(2) k_z) for the g(k) width.

    Args:
        delta_kx (float): Transverse momentum spread in 1/m.
        particle (Particle): Must carry v_z.
        convention (str): "sigma" or "sqrt2-sigma".

    Returns:
        float: Divergence angle in rad.

    Raises:
        MissingVelocityError: If the particle has no v_z.
        DomainError: On an unknown convention.
    """
    k_z = particle.k_z(constants)
    if convention == "sigma":
        return delta_kx / k_z
    if convention == "sqrt2-sigma":
        return delta_kx / (math.sqrt(2.0) * k_z)
    raise DomainError(f"unknown theta convention {convention!r}")
