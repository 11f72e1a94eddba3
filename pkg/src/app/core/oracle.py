"""
Numerical oracle: grid propagation and momentum-ensemble averaging.

Nothing here reuses the closed forms of the analytic modules. States are
sampled on a periodic grid and evolved with the exact free propagator
exp(-i hbar k**2 t / 2m) in momentum space; mixed states are averaged over
boosted copies psi(x, 0) exp(i k x) with Gauss-Hermite weights for g(k).
The closed forms are only consulted by the verification routines that
compare against them.
"""

import logging
import math
from typing import Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.integrate import simpson

from src.app.core.coherence import (
    IntensityProfile,
    MixedState,
    covariance_mixed,
    effective_width,
    gouy_mixed,
)
from src.app.core.errors import (
    DomainError,
    GridOverflowError,
    NormalizationError,
    PhaseUndefinedError,
)
from src.app.core.gaussian import (
    PureEvolution,
    covariance_pure,
    gouy_pure,
    radius_R,
    width_B,
)
from src.app.core.output import (
    ConjectureReport,
    ConjectureRow,
    VerificationReport,
    VerificationRow,
)
from src.app.core.wavepacket import (
    DEFAULT_CONSTANTS,
    CovarianceMatrix,
    Particle,
    PhysicalConstants,
)
from src.config.defaults import (
    ORACLE_GRID_POINTS,
    ORACLE_LADDER_STEPS,
    ORACLE_NODES,
    ORACLE_SEED,
)

logger = logging.getLogger(__name__)

# Relative edge density above which a propagated state has wrapped around
OVERFLOW_THRESHOLD = 1e-12
HALF_SPAN_WIDTHS = 8.0


class GridField(BaseModel):
    """A one-dimensional wavefunction on the periodic grid [x_min, x_max)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    x_min: float
    x_max: float
    values: np.ndarray

    @model_validator(mode="after")
    def _check_grid(self):
        n = self.values.size
        if self.values.ndim != 1 or n < 2 or n & (n - 1):
            raise ValueError(f"grid size must be a power of two, got {n}")
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")
        return self

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n)

    @property
    def k(self) -> np.ndarray:
        return 2.0 * math.pi * np.fft.fftfreq(self.n, d=self.dx)

    def norm(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2) * self.dx)

    def normalized(self) -> "GridField":
        return self.model_copy(update={"values": self.values / math.sqrt(self.norm())})

    @classmethod
    def gaussian(
        cls, b: float, half_span: float, n: int, kick: float = 0.0
    ) -> "GridField":
        """Initial packet exp(-x**2/2b**2) exp(i kick x), centred on a symmetric grid."""
        dx = 2.0 * half_span / n
        x = -half_span + dx * np.arange(n)
        values = np.exp(-(x**2) / (2.0 * b**2) + 1j * kick * x)
        return cls(x_min=-half_span, x_max=half_span, values=values).normalized()


class EnsembleSpec(BaseModel):
    """How the transverse-momentum average is sampled."""

    model_config = ConfigDict(frozen=True)

    quadrature_nodes: int = Field(default=ORACLE_NODES, ge=8)
    seed: int = ORACLE_SEED
    mode: Literal["hermite", "sampled"] = "hermite"


def _next_power_of_two(value: float) -> int:
    return 1 << max(8, math.ceil(math.log2(max(value, 2.0))))


def _check_overflow(values: np.ndarray) -> None:
    density = np.abs(values) ** 2
    edge = max(density[0], density[-1])
    if edge > OVERFLOW_THRESHOLD * density.max():
        raise GridOverflowError(
            f"grid overflow: edge density {edge / density.max():.3e} of peak"
        )


def propagate_free(
    field: GridField,
    t: float,
    mass: float,
    constants: PhysicalConstants = DEFAULT_CONSTANTS,
) -> GridField:
    """
    Evolve a free particle for time t with the exact momentum-space propagator.

    Args:
        field (GridField): Wavefunction at time zero.
        t (float): Evolution time in seconds; negative times run backwards.
        mass (float): Particle mass in kg.
        constants (PhysicalConstants): Source of hbar.

    Returns:
        GridField: The evolved field on the same grid (the input itself when t is 0).

    Raises:
        ValueError: If t is not finite.
        GridOverflowError: If the evolved density reaches the grid edges.
    """
    if not math.isfinite(t):
        raise DomainError(f"propagation time must be finite, got {t}")
    if t == 0:
        return field
    k = field.k
    phase = np.exp(-1j * constants.hbar * k**2 * t / (2.0 * mass))
    values = np.fft.ifft(phase * np.fft.fft(field.values))
    _check_overflow(values)
    return field.model_copy(update={"values": values})


def _raw_moments(field: GridField, hbar: float) -> Dict[str, float]:
    norm = field.norm()
    if abs(norm - 1.0) > 1e-9:
        raise NormalizationError(f"field norm is {norm:.12f}, expected 1")
    x, dx, k, psi = field.x, field.dx, field.k, field.values
    density = np.abs(psi) ** 2 * dx
    spectrum = np.fft.fft(psi)
    weights = np.abs(spectrum) ** 2
    weights /= weights.sum()
    p_psi = hbar * np.fft.ifft(k * spectrum)
    return {
        "x": float(np.sum(x * density)),
        "xx": float(np.sum(x**2 * density)),
        "p": hbar * float(np.sum(k * weights)),
        "pp": hbar**2 * float(np.sum(k**2 * weights)),
        # symmetrized <(xp + px)/2> = Re <psi| x p |psi>
        "xp": float(np.real(np.sum(np.conj(psi) * x * p_psi)) * dx),
    }


def _covariance_from_moments(m: Dict[str, float]) -> CovarianceMatrix:
    return CovarianceMatrix(
        sigma_xx=m["xx"] - m["x"] ** 2,
        sigma_pp=m["pp"] - m["p"] ** 2,
        sigma_xp=m["xp"] - m["x"] * m["p"],
    )


def numeric_moments(
    field: GridField, constants: PhysicalConstants = DEFAULT_CONSTANTS
) -> CovarianceMatrix:
    """Covariance matrix of a normalized grid field by direct quadrature."""
    return _covariance_from_moments(_raw_moments(field, constants.hbar))


def _axis_index(field: GridField) -> int:
    return int(np.argmin(np.abs(field.x)))


def numeric_gouy(field_t: GridField, reference: GridField) -> float:
    """On-axis phase of field_t relative to the t = 0 reference.

    Valid for zero-mean-momentum packets, whose on-axis phase is the Gouy phase.
    """
    j = _axis_index(field_t)
    peak = np.abs(field_t.values).max()
    if abs(field_t.values[j]) < 1e-12 * peak or reference.values[j] == 0:
        raise PhaseUndefinedError("on-axis amplitude vanishes; phase undefined")
    return float(np.angle(field_t.values[j] / reference.values[j]))


def gouy_trace(
    field0: GridField,
    times: Sequence[float],
    mass: float,
    constants: PhysicalConstants = DEFAULT_CONSTANTS,
) -> np.ndarray:
    """On-axis phase along an increasing time ladder, unwrapped step by step."""
    times = np.asarray(times, dtype=float)
    raw = np.array(
        [numeric_gouy(propagate_free(field0, t, mass, constants), field0) for t in times]
    )
    unwrapped = np.unwrap(raw)
    if unwrapped.size > 1 and np.max(np.abs(np.diff(unwrapped))) >= math.pi / 2:
        raise DomainError("time ladder too coarse: phase step exceeds pi/2")
    return unwrapped


def fit_wavefront_radius(
    field: GridField,
    mass: float,
    constants: PhysicalConstants = DEFAULT_CONSTANTS,
) -> float:
    """Curvature time R from the quadratic phase over the central +-1 width.

    The phase profile is m x**2 / (2 hbar R) + const; a flat wavefront
    returns +inf.
    """
    moments = _raw_moments(field, constants.hbar)
    cov = _covariance_from_moments(moments)
    width = math.sqrt(2.0 * cov.sigma_xx)
    u = (field.x - moments["x"]) / width
    window = np.abs(u) <= 1.0
    phase = np.unwrap(np.angle(field.values[window]))
    quadratic = np.polyfit(u[window], phase, 2)[0]
    if abs(quadratic) < 1e-10:
        return math.inf
    return mass * width**2 / (2.0 * constants.hbar * quadratic)


def ensemble_nodes(delta_kx: float, spec: EnsembleSpec) -> Tuple[np.ndarray, np.ndarray]:
    """Momentum kicks and weights realizing the average over g(k)."""
    if delta_kx == 0:
        return np.zeros(1), np.ones(1)
    if spec.mode == "hermite":
        nodes, weights = np.polynomial.hermite.hermgauss(spec.quadrature_nodes)
        return delta_kx * nodes, weights / math.sqrt(math.pi)
    rng = np.random.default_rng(spec.seed)
    kicks = rng.normal(0.0, delta_kx / math.sqrt(2.0), spec.quadrature_nodes)
    return kicks, np.full(spec.quadrature_nodes, 1.0 / spec.quadrature_nodes)


def grid_for(
    b: float,
    mass: float,
    t_final: float,
    k_max: float = 0.0,
    points: Optional[int] = None,
    constants: PhysicalConstants = DEFAULT_CONSTANTS,
) -> Tuple[float, int]:
    """Half span and point count for a packet of width b evolved up to t_final.

    The span covers 8 packet widths beyond the largest drift; when points is
    not given, the spacing resolves the boosted momentum spectrum.
    """
    spread = constants.hbar * abs(t_final) / (mass * b**2)
    width = b * math.sqrt(1.0 + spread**2)
    drift = constants.hbar * k_max * abs(t_final) / mass
    half_span = HALF_SPAN_WIDTHS * width + drift
    if points is None:
        dx = math.pi / (k_max + 10.0 / b)
        points = _next_power_of_two(2.0 * half_span / dx)
    return half_span, points


class _Ensemble:
    """Boosted copies of the initial packet sharing one grid."""

    def __init__(
        self,
        ms: MixedState,
        t_final: float,
        spec: EnsembleSpec,
        points: Optional[int] = None,
    ):
        self.ms = ms
        self.kicks, self.weights = ensemble_nodes(ms.coherence.delta_kx, spec)
        k_max = float(np.max(np.abs(self.kicks)))
        half_span, n = grid_for(
            ms.params.b, ms.particle.mass, t_final, k_max, points, ms.constants
        )
        logger.debug(
            f"Ensemble grid: {n} points over +-{half_span:.3e} m, {self.kicks.size} nodes"
        )
        self.fields = [
            GridField.gaussian(ms.params.b, half_span, n, kick) for kick in self.kicks
        ]

    def evolve(self, t: float) -> Tuple[CovarianceMatrix, IntensityProfile]:
        hbar = self.ms.constants.hbar
        totals = dict.fromkeys(("x", "xx", "p", "pp", "xp"), 0.0)
        density = np.zeros(self.fields[0].n)
        for field, weight in zip(self.fields, self.weights):
            evolved = propagate_free(field, t, self.ms.particle.mass, self.ms.constants)
            for key, value in _raw_moments(evolved, hbar).items():
                totals[key] += weight * value
            density += weight * np.abs(evolved.values) ** 2
        profile = IntensityProfile(t=t, grid=self.fields[0].x, values=density)
        return _covariance_from_moments(totals), profile


def ensemble_average(
    ms: MixedState,
    t: float,
    spec: EnsembleSpec = EnsembleSpec(),
    points: Optional[int] = None,
) -> Tuple[CovarianceMatrix, IntensityProfile]:
    """
    Covariance and intensity of the mixed state at t from the boosted ensemble.

    Each momentum node seeds a kicked copy of the initial packet; copies are
    propagated on one shared grid and their moments and densities averaged
    with the node weights.

    Args:
        ms (MixedState): The partially coherent state.
        t (float): Evolution time in seconds.
        spec (EnsembleSpec): Gauss-Hermite or seeded sampled nodes.
        points (int, optional): Grid size; sized from the spectrum when None.

    Returns:
        Tuple[CovarianceMatrix, IntensityProfile]: Averaged second moments and
        the averaged density on the grid.
    """
    return _Ensemble(ms, t, spec, points).evolve(t)


def verify_conjecture(
    ms: MixedState,
    t_max: float,
    steps: int = ORACLE_LADDER_STEPS,
    spec: EnsembleSpec = EnsembleSpec(),
    points: Optional[int] = None,
) -> ConjectureReport:
    """Integrate -(hbar/2m) dt / Bbar**2 with numerically evolved widths.

    The ladder is uniform in s = arctan(t/tau_b); Simpson sums on the full and
    the every-other-point ladder are Richardson-combined at every fourth point
    and compared with gouy_mixed.

    Args:
        ms (MixedState): The state whose width is evolved numerically.
        t_max (float): End of the ladder in seconds.
        steps (int): Ladder intervals, rounded up to a multiple of 4 (at least 16).
        spec (EnsembleSpec): Momentum nodes of the ensemble.
        points (int, optional): Grid size of the ensemble.

    Returns:
        ConjectureReport: Per-point numeric and closed-form phases with the
        largest deviations.
    """
    if steps < 16:
        raise DomainError(f"the time ladder needs at least 16 steps, got {steps}")
    steps += -steps % 4
    tau = ms.params.tau_b
    s = np.linspace(0.0, math.atan(t_max / tau), steps + 1)
    times = tau * np.tan(s)
    ensemble = _Ensemble(ms, t_max, spec, points)
    widths_sq = np.array([2.0 * ensemble.evolve(t)[0].sigma_xx for t in times])
    integrand = tau / np.cos(s) ** 2 / widths_sq
    scale = -ms.constants.hbar / (2.0 * ms.particle.mass)

    rows: List[ConjectureRow] = []
    for j in range(4, steps + 1, 4):
        fine = simpson(integrand[: j + 1], x=s[: j + 1])
        coarse = simpson(integrand[: j + 1 : 2], x=s[: j + 1 : 2])
        mu_numeric = scale * (fine + (fine - coarse) / 15.0)
        mu_closed = float(gouy_mixed(times[j], ms))
        rows.append(
            ConjectureRow(
                t=float(times[j]),
                mu_numeric=float(mu_numeric),
                mu_closed_form=mu_closed,
                rel_deviation=abs(mu_numeric - mu_closed) / abs(mu_closed),
            )
        )
    report = ConjectureReport(
        b=ms.params.b,
        delta_kx=ms.coherence.delta_kx,
        epsilon=ms.coherence.epsilon,
        t_max=t_max,
        steps=steps,
        max_rel_deviation=max(row.rel_deviation for row in rows),
        max_abs_deviation=max(abs(row.mu_numeric - row.mu_closed_form) for row in rows),
        rows=rows,
    )
    logger.debug(
        f"Conjecture check b={ms.params.b:.3e} dk={ms.coherence.delta_kx:.3e}: "
        f"max rel deviation {report.max_rel_deviation:.3e}"
    )
    return report


def sweep_conjecture(
    b: float,
    particle: Particle,
    t_max: float,
    products: Sequence[float] = (0.0, 0.5, 1.0, 2.0, 3.0),
    steps: int = ORACLE_LADDER_STEPS,
    spec: EnsembleSpec = EnsembleSpec(),
    constants: PhysicalConstants = DEFAULT_CONSTANTS,
) -> List[ConjectureReport]:
    """verify_conjecture over a range of b*delta_kx values."""
    return [
        verify_conjecture(
            MixedState.create(b, product / b, particle, constants), t_max, steps, spec
        )
        for product in products
    ]


class OracleSettings(BaseModel):
    """Parameters of the verification suite."""

    model_config = ConfigDict(frozen=True)

    b: float = Field(gt=0)
    particle: Particle
    delta_kx: float = Field(ge=0)
    t_flight: float = Field(gt=0)
    times_tau: Tuple[float, ...] = (0.5, 1.0, 5.0, 50.0)
    grid_points: int = ORACLE_GRID_POINTS
    ensemble: EnsembleSpec = EnsembleSpec()
    ladder_steps: int = ORACLE_LADDER_STEPS
    constants: PhysicalConstants = DEFAULT_CONSTANTS


def _relative(numeric: float, closed: float) -> float:
    if closed == 0:
        return abs(numeric)
    return abs(numeric - closed) / abs(closed)


def _row(case, quantity, closed, numeric, threshold, absolute=False) -> VerificationRow:
    deviation = abs(numeric - closed) if absolute else _relative(numeric, closed)
    return VerificationRow(
        case=case,
        quantity=quantity,
        closed_form=closed,
        numeric=numeric,
        deviation=deviation,
        threshold=threshold,
        passed=bool(deviation <= threshold),
    )


def _pure_rows(settings: OracleSettings) -> List[VerificationRow]:
    ev = PureEvolution.create(settings.b, settings.particle, 1, settings.constants)
    tau = ev.params.tau_b
    mass = settings.particle.mass
    half_span, n = grid_for(
        settings.b, mass, max(settings.times_tau) * tau, 0.0,
        settings.grid_points, settings.constants,
    )
    field0 = GridField.gaussian(settings.b, half_span, n)
    rows: List[VerificationRow] = []
    for factor in settings.times_tau:
        t = factor * tau
        case = f"pure t={factor:g}tau"
        try:
            field_t = propagate_free(field0, t, mass, settings.constants)
            cov = numeric_moments(field_t, settings.constants)
            exact = covariance_pure(t, ev)
            rows += [
                _row(case, "norm", 1.0, field_t.norm(), 1e-12, absolute=True),
                _row(case, "B", width_B(t, ev.params), math.sqrt(2.0 * cov.sigma_xx), 1e-6),
                _row(case, "mu", gouy_pure(t, ev.params, dim=1),
                     numeric_gouy(field_t, field0), 1e-6, absolute=True),
                _row(case, "R", radius_R(t, ev.params),
                     fit_wavefront_radius(field_t, mass, settings.constants), 1e-6),
                _row(case, "sigma_xx", exact.sigma_xx, cov.sigma_xx, 1e-8),
                _row(case, "sigma_pp", exact.sigma_pp, cov.sigma_pp, 1e-8),
                _row(case, "sigma_xp", exact.sigma_xp, cov.sigma_xp, 1e-8),
                _row(case, "det", exact.determinant, cov.determinant, 1e-8),
            ]
        except ValueError as e:
            logger.warning(f"Oracle case {case} failed: {e}")
            rows.append(
                VerificationRow(case=case, quantity="all", threshold=0.0,
                                passed=False, error=str(e))
            )
    return rows


def _mixed_rows(settings: OracleSettings, delta_kx: float) -> List[VerificationRow]:
    ms = MixedState.create(settings.b, delta_kx, settings.particle, settings.constants)
    t = settings.t_flight
    case = f"mixed dk={delta_kx:g}"
    try:
        cov, _ = ensemble_average(ms, t, settings.ensemble, settings.grid_points)
        exact = covariance_mixed(t, ms)
        rows = [
            _row(case, "sigma_xx", exact.sigma_xx, cov.sigma_xx, 1e-8),
            _row(case, "sigma_pp", exact.sigma_pp, cov.sigma_pp, 1e-8),
            _row(case, "sigma_xp", exact.sigma_xp, cov.sigma_xp, 1e-8),
            _row(case, "Bbar", effective_width(t, ms), math.sqrt(2.0 * cov.sigma_xx), 1e-8),
        ]
        report = verify_conjecture(
            ms, t, settings.ladder_steps, settings.ensemble, settings.grid_points
        )
        rows.append(
            VerificationRow(
                case=case,
                quantity="conjecture",
                closed_form=float(gouy_mixed(t, ms)),
                numeric=report.rows[-1].mu_numeric,
                deviation=report.max_rel_deviation,
                threshold=1e-5,
                passed=report.max_rel_deviation <= 1e-5,
            )
        )
        return rows
    except ValueError as e:
        logger.warning(f"Oracle case {case} failed: {e}")
        return [
            VerificationRow(case=case, quantity="all", threshold=0.0,
                            passed=False, error=str(e))
        ]


def run_verification_suite(settings: OracleSettings) -> VerificationReport:
    """
    Closed form vs numeric for B, R, mu, the covariances and the conjecture.

    Args:
        settings (OracleSettings): Packet, coherence and numerical settings.

    Returns:
        VerificationReport: One row per case and quantity; grid failures
        become failed rows carrying the error message.
    """
    rows = _pure_rows(settings)
    for delta_kx in sorted({0.0, settings.delta_kx}):
        rows += _mixed_rows(settings, delta_kx)
    report = VerificationReport(rows=rows)
    logger.info(
        f"Oracle suite: {len(rows) - len(report.failures)}/{len(rows)} checks passed"
    )
    return report
