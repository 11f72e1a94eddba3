"""
Command handlers behind main.py.

Each handler takes a validated RunConfig, writes its files under
output.dir and returns what it produced. Exit-code mapping is left to
main.py.
"""

import logging
import math
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from src import __version__
from src.app.cli.models import RunConfig
from src.app.core.experiment import (
    DataPoint,
    angular_divergence,
    data_gouy,
    data_sigma_xp,
    fit_delta_kx,
    gouy_curve,
    optimal_slit,
    predict_fwhm_curve,
    sigma_xp_curve,
)
from src.app.core.gaussian import (
    PureEvolution,
    covariance_pure,
    gouy_pure,
    radius_R,
    width_B,
)
from src.app.core.output import FitResult, VerificationReport
from src.app.core.oracle import run_verification_suite
from src.app.core.wavepacket import de_broglie_wavelength, timescale_tau
from src.config.defaults import LOG_LEVEL
from src.utils.curve_files import CurveFile, read_dataset, write_table
from src.utils.svg_plot import write_svg

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s (%(filename)s:%(lineno)d): %(message)s"
LOG_DATEFMT = "%Y-%m-%d %H:%M:%S"

logger = logging.getLogger(__name__)


def configure_logging(verbose: bool = False) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else LOG_LEVEL.upper(),
        format=LOG_FORMAT,
        datefmt=LOG_DATEFMT,
    )


def _metadata(config: RunConfig, command: str) -> Dict[str, object]:
    return {"tool": "gouy", "version": __version__, "command": command, **config.metadata()}


def _out_dir(config: RunConfig) -> Path:
    return Path(config.output_dir)


def cmd_propagate(config: RunConfig) -> List[Path]:
    """Time sweep of the pure packet: width, curvature, Gouy phase, covariances."""
    particle = config.particle()
    constants = config.constants()
    ev = PureEvolution.create(config.packet_b_m, particle, config.packet_dim, constants)
    tau = ev.params.tau_b
    times = np.linspace(0.0, config.sweep_t_max_tau * tau, config.sweep_t_points)

    rows = []
    for t in times:
        cov = covariance_pure(float(t), ev)
        rows.append(
            (
                float(t),
                width_B(t, ev.params),
                radius_R(t, ev.params),
                gouy_pure(t, ev.params),
                cov.sigma_xx,
                cov.sigma_pp,
                cov.sigma_xp,
                cov.determinant,
            )
        )
    curve = CurveFile(
        metadata={**_metadata(config, "propagate"), "tau_b_s": tau},
        columns=("t", "B", "R", "mu_pure", "sigma_xx", "sigma_pp", "sigma_xp", "det"),
        rows=rows,
    )
    path = curve.write(_out_dir(config) / "propagate.csv")
    logger.info(f"Wrote {len(rows)} time steps (tau_b={tau:.4e} s) to {path}")
    return [path]


_CURVES = (
    ("width", "fwhm_m", "Detected width vs slit width", "FWHM (m)", predict_fwhm_curve),
    ("sigma_xp", "sigma_xp_Js", "x-p correlation vs slit width", "sigma_xp (J s)", sigma_xp_curve),
    ("gouy", "mu_rad", "Gouy phase vs slit width", "mu (rad)", gouy_curve),
)


def cmd_curves(config: RunConfig) -> List[Path]:
    """Width, sigma_xp and Gouy phase versus slit width, as CSV and SVG."""
    cfg = config.experiment()
    a_values = config.slit_widths()
    out = _out_dir(config)
    metadata = _metadata(config, "curves")
    written = []
    for name, column, title, y_label, curve_fn in _CURVES:
        points = curve_fn(a_values, config.coherence_delta_kx, cfg)
        curve = CurveFile(
            metadata=metadata,
            columns=("a_m", "b_m", column),
            rows=[(p.a, p.b, p.value) for p in points],
        )
        written.append(curve.write(out / f"{name}.csv"))
        written.append(
            write_svg(
                out / f"{name}.svg",
                [(p.a, p.value) for p in points],
                title,
                "slit width a (m)",
                y_label,
                log_x=config.curves_log_x,
            )
        )
    a_opt, w_min = optimal_slit(config.coherence_delta_kx, cfg)
    logger.info(f"Width minimum {w_min:.4e} m at slit width {a_opt:.4e} m")
    logger.info(f"Wrote {len(written)} curve files to {out}")
    return written


def _fit_report(
    config: RunConfig,
    data: Sequence[DataPoint],
    result: FitResult,
    theta: Optional[float],
    dataset: str,
) -> str:
    cfg = config.experiment()
    flagged = [f"{p.slit_width:g}" for p in data if p.vdw_flag]
    lines = [
        f"gouy {__version__} delta_kx fit",
        f"dataset: {dataset}",
        "",
        "Assumptions",
        f"  time of flight t        = {cfg.t!r} s",
        f"  particle mass           = {cfg.particle.mass!r} kg",
        f"  detector                = {cfg.detector.kernel}, FWHM {cfg.detector.D!r} m",
        f"  deconvolution           = {'on' if cfg.deconvolve else 'off'}",
        f"  slit mapping factor     = {cfg.slit_factor!r}"
        + (" (co-fitted)" if config.experiment_fit_slit_factor else ""),
        f"  vdW policy              = {cfg.vdw_policy.kind} "
        f"(factor {cfg.vdw_policy.factor!r}, threshold {cfg.vdw_policy.threshold!r} m)",
        f"  vdW-flagged slits       = {', '.join(flagged) if flagged else 'none'}",
        f"  initial delta_kx        = {config.experiment_fit_init!r} 1/m",
        "",
        "Result",
        f"  delta_kx                = {result.delta_kx:.6e} +- {result.parameter_stderr:.2e} 1/m",
    ]
    if config.experiment_fit_slit_factor:
        lines.append(
            f"  slit factor             = {result.slit_factor:.6f} +- {result.slit_factor_stderr:.2e}"
        )
    lines += [
        f"  residual rms            = {result.residual_rms:.4e} m",
        f"  points                  = {result.n_points}",
        f"  evaluations             = {result.n_iterations}",
        f"  converged               = {'yes' if result.converged else 'NO'}",
        f"  gradient norm           = {result.gradient_norm:.3e}",
        f"  optimizer message       = {result.message}",
    ]
    if theta is None:
        lines.append("  angular divergence      = not computed (particle.v_z not set)")
    else:
        lines.append(
            f"  angular divergence      = {theta * 1e6:.4f} urad "
            f"({config.experiment_theta_convention})"
        )
    return "\n".join(lines) + "\n"


def cmd_fit(config: RunConfig, dataset_path: str) -> FitResult:
    """
    Fit delta_kx to a measured width dataset and write the report files.

    Args:
        config (RunConfig): Resolved run configuration.
        dataset_path (str): CSV with slit_width_m,fwhm_m[,vdw_flag,weight].

    Returns:
        FitResult: The fit, also written to fit_report.txt, fit_result.csv
        and fit_points.csv in the output directory.
    """
    data = read_dataset(dataset_path)
    cfg = config.experiment()
    result = fit_delta_kx(
        data,
        cfg,
        init=config.experiment_fit_init,
        fit_slit_factor=config.experiment_fit_slit_factor,
        max_evaluations=config.experiment_fit_max_evaluations,
    )
    theta = None
    if cfg.particle.v_z is not None:
        theta = angular_divergence(
            result.delta_kx, cfg.particle, config.experiment_theta_convention, cfg.constants
        )

    out = _out_dir(config)
    metadata = {**_metadata(config, "fit"), "dataset": dataset_path}
    report_path = out / "fit_report.txt"
    report_path.parent.mkdir(parents=True, exist_ok=True)
    report_path.write_text(_fit_report(config, data, result, theta, dataset_path), encoding="utf-8")
    write_table(
        out / "fit_result.csv",
        metadata,
        (
            "delta_kx", "parameter_stderr", "slit_factor", "slit_factor_stderr",
            "residual_rms", "n_points", "n_iterations", "converged", "gradient_norm",
            "theta_rad", "theta_convention",
        ),
        [
            (
                result.delta_kx, result.parameter_stderr, result.slit_factor,
                result.slit_factor_stderr, result.residual_rms, result.n_points,
                result.n_iterations, result.converged, result.gradient_norm,
                theta, config.experiment_theta_convention,
            )
        ],
    )

    fitted_cfg = cfg.model_copy(update={"slit_factor": result.slit_factor})
    sigma_points = data_sigma_xp(data, result.delta_kx, fitted_cfg)
    gouy_points = data_gouy(data, result.delta_kx, fitted_cfg)
    rows = []
    for point, sigma, mu in zip(data, sigma_points, gouy_points):
        model = predict_fwhm_curve(
            [point.slit_width], result.delta_kx, fitted_cfg, [point.vdw_flag]
        )[0]
        rows.append(
            (point.slit_width, model.b, float(point.vdw_flag), point.measured_fwhm,
             model.value, sigma.value, mu.value)
        )
    CurveFile(
        metadata=metadata,
        columns=("a_m", "b_m", "vdw_flag", "fwhm_m", "model_fwhm_m", "sigma_xp_Js", "mu_rad"),
        rows=rows,
    ).write(out / "fit_points.csv")
    logger.info(f"Wrote fit report for {len(data)} points to {out}")
    return result


def _format_optional(value: Optional[float]) -> str:
    return "-" if value is None else f"{value:.3e}"


def cmd_oracle_verify(config: RunConfig) -> VerificationReport:
    """Run the numeric-oracle suite and write the pass/fail table."""
    report = run_verification_suite(config.oracle_settings())
    out = _out_dir(config)
    write_table(
        out / "oracle_report.csv",
        _metadata(config, "oracle-verify"),
        ("case", "quantity", "closed_form", "numeric", "deviation", "threshold", "passed", "error"),
        [
            (row.case, row.quantity, row.closed_form, row.numeric, row.deviation,
             row.threshold, row.passed, row.error)
            for row in report.rows
        ],
    )

    lines = [f"{'case':<22} {'quantity':<11} {'deviation':>10} {'threshold':>10}  result"]
    for row in report.rows:
        status = "PASS" if row.passed else "FAIL"
        lines.append(
            f"{row.case:<22} {row.quantity:<11} {_format_optional(row.deviation):>10} "
            f"{row.threshold:>10.1e}  {status}" + (f" ({row.error})" if row.error else "")
        )
    lines.append(
        f"\n{len(report.rows) - len(report.failures)}/{len(report.rows)} checks passed"
    )
    (out / "oracle_report.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.info(f"Wrote oracle report to {out}")
    return report


def cmd_constants(config: RunConfig) -> str:
    """Constant table plus the derived C70 quantities at the configured b and t."""
    constants = config.constants()
    particle = config.particle()
    hbar, mass, t = constants.hbar, particle.mass, config.experiment_t_s
    b_opt = math.sqrt(hbar * t / mass)
    lines = [
        f"hbar                 = {constants.hbar!r} J s",
        f"planck               = {constants.planck!r} J s",
        f"atomic mass unit     = {constants.atomic_mass_unit!r} kg",
        f"particle mass        = {mass!r} kg ({config.particle_mass_u!r} u)",
        f"tau_b at b={config.packet_b_m:g} m = {timescale_tau(mass, config.packet_b_m, constants)!r} s",
        f"collimation optimum  = b {b_opt!r} m, FWHM {2.0 * math.sqrt(2.0 * math.log(2.0)) * b_opt!r} m"
        f" (t={t!r} s)",
    ]
    if particle.v_z is not None:
        lines += [
            f"v_z                  = {particle.v_z!r} m/s",
            f"de Broglie lambda_P  = {de_broglie_wavelength(particle, constants)!r} m",
            f"k_z                  = {particle.k_z(constants)!r} 1/m",
        ]
    return "\n".join(lines) + "\n"
