"""
Structured result records emitted by the analysis and verification code.

These are plain pydantic models so they can be dumped to CSV rows, text
reports, or JSON without extra glue.
"""

from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field


class CurvePoint(BaseModel):
    """One (slit width, value) sample of a slit-width sweep."""

    model_config = ConfigDict(frozen=True)

    a: float
    b: float
    value: float


class FitResult(BaseModel):
    """Outcome of fitting delta_kx to measured widths."""

    model_config = ConfigDict(frozen=True)

    delta_kx: float = Field(ge=0)
    residual_rms: float
    parameter_stderr: float
    n_iterations: int
    converged: bool
    gradient_norm: float
    slit_factor: float = 1.0
    slit_factor_stderr: Optional[float] = None
    n_points: int = 0
    message: str = ""


class ConjectureRow(BaseModel):
    t: float
    mu_numeric: float
    mu_closed_form: float
    rel_deviation: float


class ConjectureReport(BaseModel):
    """Width-integral Gouy phase from numeric widths vs the closed form."""

    b: float
    delta_kx: float
    epsilon: float
    t_max: float
    steps: int
    max_rel_deviation: float
    max_abs_deviation: float
    rows: List[ConjectureRow] = Field(default_factory=list)


class VerificationRow(BaseModel):
    case: str
    quantity: str
    closed_form: Optional[float] = None
    numeric: Optional[float] = None
    deviation: Optional[float] = None
    threshold: float
    passed: bool
    error: Optional[str] = None


class VerificationReport(BaseModel):
    rows: List[VerificationRow] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)

    @property
    def failures(self) -> List[VerificationRow]:
        return [row for row in self.rows if not row.passed]
