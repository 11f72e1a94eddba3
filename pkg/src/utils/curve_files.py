"""
Flat-file formats: curve CSVs with '#' metadata headers, and the measured
width dataset consumed by the fit command.

Curve files look like

    # version=1.0.0
    # coherence.delta_kx=9000000.0
    a_m,b_m,fwhm_m
    1e-07,1e-07,1.645141641046763e-05

Floats are written with repr() so that reading a file back yields the exact
values that were written. No timestamps are recorded, so identical inputs
give byte-identical files.
"""

import csv
import logging
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from src.app.core.errors import DatasetParseError
from src.app.core.experiment import DataPoint

logger = logging.getLogger(__name__)

DATASET_COLUMNS = ("slit_width_m", "fwhm_m", "vdw_flag", "weight")
PathLike = Union[str, Path]


def format_value(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return " ".join(format_value(v) for v in value)
    return "" if value is None else str(value)


def write_table(
    path: PathLike,
    metadata: Dict[str, object],
    columns: Sequence[str],
    rows: Sequence[Sequence[object]],
) -> Path:
    """Write a CSV table preceded by "# key=value" metadata lines."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        for key, value in metadata.items():
            handle.write(f"# {key}={format_value(value)}\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows([format_value(v) for v in row] for row in rows)
    logger.debug(f"Wrote {len(rows)} rows to {path}")
    return path


class CurveFile(BaseModel):
    """Metadata header, column schema and numeric rows of one output table."""

    model_config = ConfigDict(frozen=True)

    metadata: Dict[str, str] = Field(default_factory=dict)
    columns: Tuple[str, ...]
    rows: List[Tuple[float, ...]] = Field(default_factory=list)

    @field_validator("metadata", mode="before")
    @classmethod
    def _stringify(cls, value):
        return {str(k): format_value(v) for k, v in dict(value).items()}

    @model_validator(mode="after")
    def _rows_match_columns(self):
        for i, row in enumerate(self.rows):
            if len(row) != len(self.columns):
                raise ValueError(
                    f"row {i} has {len(row)} values for {len(self.columns)} columns"
                )
        return self

    def column(self, name: str) -> List[float]:
        j = self.columns.index(name)
        return [row[j] for row in self.rows]

    def write(self, path: PathLike) -> Path:
        return write_table(
            path, self.metadata, self.columns, [[float(v) for v in row] for row in self.rows]
        )

    @classmethod
    def read(cls, path: PathLike) -> "CurveFile":
        metadata: Dict[str, str] = {}
        columns = None
        rows = []
        with Path(path).open(newline="", encoding="utf-8") as handle:
            for lineno, line in enumerate(handle, start=1):
                line = line.rstrip("\n")
                if line.startswith("#"):
                    key, sep, value = line[1:].strip().partition("=")
                    if not sep:
                        raise DatasetParseError(f"malformed metadata line {line!r}", lineno)
                    metadata[key] = value
                elif not line.strip():
                    continue
                elif columns is None:
                    columns = tuple(next(csv.reader([line])))
                else:
                    try:
                        rows.append(tuple(float(v) for v in next(csv.reader([line]))))
                    except ValueError as e:
                        raise DatasetParseError(str(e), lineno) from e
        if columns is None:
            raise DatasetParseError(f"{path} has no column header")
        return cls(metadata=metadata, columns=columns, rows=rows)


def _parse_flag(value: str, lineno: int) -> bool:
    value = value.strip()
    if value in ("", "0"):
        return False
    if value == "1":
        return True
    raise DatasetParseError(f"vdw_flag must be 0 or 1, got {value!r}", lineno)


def read_dataset(path: PathLike) -> List[DataPoint]:
    """Parse a slit-width / measured-FWHM CSV into data points.

    Columns slit_width_m and fwhm_m are required; vdw_flag (0/1) and
    weight are optional. Lines starting with '#' are comments.

    Raises:
        DatasetParseError: On a missing header, bad value or empty dataset;
            the message carries the 1-based line number.
    """
    path = Path(path)
    if not path.is_file():
        raise DatasetParseError(f"dataset {path} does not exist")
    header = None
    points: List[DataPoint] = []
    with path.open(newline="", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            fields = [f.strip() for f in next(csv.reader([stripped]))]
            if header is None:
                header = fields
                missing = [c for c in DATASET_COLUMNS[:2] if c not in header]
                unknown = [c for c in header if c not in DATASET_COLUMNS]
                if missing or unknown:
                    raise DatasetParseError(
                        f"header must name {', '.join(DATASET_COLUMNS)}; "
                        f"missing {missing}, unknown {unknown}",
                        lineno,
                    )
                continue
            if len(fields) != len(header):
                raise DatasetParseError(
                    f"expected {len(header)} values, got {len(fields)}", lineno
                )
            record = dict(zip(header, fields))
            try:
                points.append(
                    DataPoint(
                        slit_width=float(record["slit_width_m"]),
                        measured_fwhm=float(record["fwhm_m"]),
                        vdw_flag=_parse_flag(record.get("vdw_flag", "0"), lineno),
                        weight=float(record.get("weight") or 1.0),
                    )
                )
            except DatasetParseError:
                raise
            except ValidationError as e:
                errors = "; ".join(
                    f"{'.'.join(map(str, err['loc']))}: {err['msg']}" for err in e.errors()
                )
                raise DatasetParseError(errors, lineno) from e
            except ValueError as e:
                raise DatasetParseError(str(e), lineno) from e
    if not points:
        raise DatasetParseError(f"dataset {path} contains no data rows")
    logger.info(f"Read {len(points)} data points from {path}")
    return points


def write_dataset(
    path: PathLike, points: Sequence[DataPoint], comments: Sequence[str] = ()
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        for comment in comments:
            handle.write(f"# {comment}\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(DATASET_COLUMNS)
        for p in points:
            writer.writerow(
                [repr(p.slit_width), repr(p.measured_fwhm), format_value(p.vdw_flag), repr(p.weight)]
            )
    return path
