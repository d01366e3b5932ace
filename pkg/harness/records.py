"""
Run records, convergence slopes and their CSV form.
"""

import math
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
import structlog

logger = structlog.get_logger(__name__)

CSV_COLUMNS = ["method", "K", "h", "omega_max", "error_l2", "runtime_seconds", "slope_estimate"]
STATE_COLUMNS = ["x", "re_psi", "im_psi", "re_dpsi", "im_dpsi"]
FLOAT_FORMAT = "%.17g"


@dataclass(frozen=True)
class RunRecord:
    """One (method, K, omega) run scored against its reference."""

    method: str
    K: int
    h: float
    omega_max: float
    error_l2: float
    runtime_seconds: float
    slope_estimate: Optional[float] = None

    def __post_init__(self):
        if self.K < 1:
            raise RecordError(f"K must be positive, got {self.K}")
        if self.error_l2 < 0:
            raise RecordError(f"error_l2 must be nonnegative, got {self.error_l2}")
        if self.runtime_seconds < 0:
            raise RecordError(f"runtime_seconds must be nonnegative, got {self.runtime_seconds}")

    def sort_key(self) -> Tuple[str, int, float]:
        return self.method, self.K, self.omega_max


def fit_slope(hs: Sequence[float], errors: Sequence[float]) -> Optional[float]:
    """
    Least-squares slope of log(error) against log(h).

    Only finite, positive errors take part; fewer than two distinct h
    values give None.
    """
    h = np.asarray(hs, dtype=float)
    err = np.asarray(errors, dtype=float)
    valid = np.isfinite(err) & (err > 0) & np.isfinite(h) & (h > 0)
    if np.unique(h[valid]).size < 2:
        return None
    slope, _ = np.polyfit(np.log(h[valid]), np.log(err[valid]), 1)
    return float(slope)


def attach_slopes(records: Iterable[RunRecord]) -> List[RunRecord]:
    """Give every record the slope fitted over its (method, omega_max) group."""
    records = list(records)
    groups: Dict[Tuple[str, float], List[RunRecord]] = {}
    for record in records:
        groups.setdefault((record.method, record.omega_max), []).append(record)

    slopes = {
        key: fit_slope([r.h for r in group], [r.error_l2 for r in group])
        for key, group in groups.items()
    }
    for (method, omega), slope in slopes.items():
        logger.info("slope_fitted", method=method, omega_max=omega, slope=slope)
    return [replace(r, slope_estimate=slopes[(r.method, r.omega_max)]) for r in records]


def records_frame(records: Iterable[RunRecord]) -> pd.DataFrame:
    """Records as a DataFrame ordered by (method, K, omega_max)."""
    rows = [asdict(r) for r in sorted(records, key=RunRecord.sort_key)]
    return pd.DataFrame(rows, columns=CSV_COLUMNS)


def emit_csv(records: Iterable[RunRecord], out_path: Union[str, Path]) -> Path:
    """
    Write records with a header line; floats keep 17 significant digits and
    a missing slope is an empty field.

    Raises:
        RecordError: if the file cannot be written
    """
    frame = records_frame(records)
    frame["slope_estimate"] = [
        "" if slope is None or _is_nan(slope) else FLOAT_FORMAT % slope
        for slope in frame["slope_estimate"]
    ]
    return _write(frame, out_path, what="records")


def read_records(path: Union[str, Path]) -> List[RunRecord]:
    """Parse a file written by emit_csv."""
    frame = pd.read_csv(path, dtype={"method": str}, float_precision="round_trip")
    records = []
    for row in frame.itertuples(index=False):
        slope = None if _is_nan(row.slope_estimate) else float(row.slope_estimate)
        records.append(RunRecord(
            method=row.method,
            K=int(row.K),
            h=float(row.h),
            omega_max=float(row.omega_max),
            error_l2=float(row.error_l2),
            runtime_seconds=float(row.runtime_seconds),
            slope_estimate=slope,
        ))
    return records


def emit_state_csv(x: np.ndarray, psi: np.ndarray, dpsi: np.ndarray, out_path: Union[str, Path]) -> Path:
    """Write a state as rows x,re_psi,im_psi,re_dpsi,im_dpsi."""
    frame = pd.DataFrame({
        "x": np.asarray(x, dtype=float),
        "re_psi": np.real(psi),
        "im_psi": np.imag(psi),
        "re_dpsi": np.real(dpsi),
        "im_dpsi": np.imag(dpsi),
    }, columns=STATE_COLUMNS)
    return _write(frame, out_path, what="state")


def read_state_csv(path: Union[str, Path]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (x, psi, dpsi) from a file written by emit_state_csv."""
    frame = pd.read_csv(path, float_precision="round_trip")
    psi = frame["re_psi"].to_numpy() + 1j * frame["im_psi"].to_numpy()
    dpsi = frame["re_dpsi"].to_numpy() + 1j * frame["im_dpsi"].to_numpy()
    return frame["x"].to_numpy(), psi, dpsi


def _write(frame: pd.DataFrame, out_path: Union[str, Path], what: str) -> Path:
    path = Path(out_path)
    try:
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, na_rep="nan", lineterminator="\n")
    except OSError as e:
        raise RecordError(f"Cannot write {what} to {path}: {e}") from e
    logger.info("csv_written", path=str(path), what=what, rows=len(frame))
    return path


def _is_nan(value) -> bool:
    return isinstance(value, float) and math.isnan(value)


class RecordError(RuntimeError):
    """Exception raised for invalid records or unwritable output."""
    pass
