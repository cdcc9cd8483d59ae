"""
StockFlow · Depletion · CSV I/O
Endowment files:  cost_low,cost_high,density_low,density_high  (one row per bin)
Series files:     year,<column>[,<column>...]                   (uniform year step)

Row numbers in error messages are 1-based data rows (the header is row 0).
"""

import warnings
from pathlib import Path

import numpy as np
import pandas as pd

from depletion.distribution import CostDistribution, UncertainEndowment, from_bins
from depletion.kinetics import TimeSeries
from scripts.errors import ValidationError
from scripts.logger import get_logger

logger = get_logger("depletion.io")

ENDOWMENT_COLUMNS = ["cost_low", "cost_high", "density_low", "density_high"]


def read_csv_frame(path: str | Path) -> pd.DataFrame:
    """
    Read a CSV with every column as data. Empty files and rows with the wrong number
    of fields raise ValidationError naming the file.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"CSV not found: {path}")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", pd.errors.ParserWarning)
            return pd.read_csv(path, index_col=False)
    except pd.errors.EmptyDataError as e:
        raise ValidationError(f"{path.name}: file is empty") from e
    except (pd.errors.ParserError, pd.errors.ParserWarning) as e:
        raise ValidationError(f"{path.name}: malformed CSV ({str(e).strip()})") from e


def _numeric_frame(frame: pd.DataFrame, columns: list[str], source: str) -> pd.DataFrame:
    errors = []
    out = frame[columns].apply(pd.to_numeric, errors="coerce")
    for col in columns:
        for row in np.flatnonzero(out[col].isna().to_numpy()):
            errors.append(f"{source}: row {row + 1} column {col!r} is not a number ({frame[col].iloc[row]!r})")
    if errors:
        raise ValidationError(errors)
    return out


# ── Endowments ────────────────────────────────────────────────────────────────

def read_endowment_csv(path: str | Path) -> UncertainEndowment:
    """
    Load a low/high endowment. A single-estimate file repeats the density in both
    density columns.
    """
    frame = read_csv_frame(path)
    source = Path(path).name
    if list(frame.columns) != ENDOWMENT_COLUMNS:
        raise ValidationError(
            f"{source}: header must be {','.join(ENDOWMENT_COLUMNS)}, got {','.join(map(str, frame.columns))}"
        )
    if frame.empty:
        raise ValidationError(f"{source}: no bins")
    frame = _numeric_frame(frame, ENDOWMENT_COLUMNS, source)

    lows, highs = frame["cost_low"].to_numpy(), frame["cost_high"].to_numpy()
    gaps = np.flatnonzero(highs[:-1] != lows[1:])
    if gaps.size:
        row = gaps[0] + 1
        raise ValidationError(
            f"{source}: row {row} cost_high {highs[row - 1]} does not meet row {row + 1} cost_low {lows[row]}"
        )
    edges = np.append(lows, highs[-1])
    try:
        low = from_bins(edges, frame["density_low"].to_numpy())
        high = from_bins(edges, frame["density_high"].to_numpy())
        endowment = UncertainEndowment(low=low, high=high)
    except ValidationError as e:
        raise ValidationError([f"{source}: {msg}" for msg in e.errors]) from e

    logger.info(f"Loaded endowment {source}: {low.grid.n_bins} bins, {edges[0]:g}-{edges[-1]:g} $/GJ")
    return endowment


def write_endowment_csv(path: str | Path, endowment: UncertainEndowment | CostDistribution) -> Path:
    if isinstance(endowment, CostDistribution):
        endowment = UncertainEndowment.certain(endowment)
    edges = endowment.grid.edges
    frame = pd.DataFrame({
        "cost_low": edges[:-1],
        "cost_high": edges[1:],
        "density_low": endowment.low.density,
        "density_high": endowment.high.density,
    })
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False)
    return path


# ── Time Series ───────────────────────────────────────────────────────────────

def series_frame(series: dict[str, TimeSeries]) -> pd.DataFrame:
    """Side-by-side frame with a leading `year` column; all series share t0, dt and length."""
    if not series:
        raise ValidationError("no series to tabulate")
    first = next(iter(series.values()))
    for name, ts in series.items():
        if len(ts) != len(first) or ts.t0 != first.t0 or ts.dt != first.dt:
            raise ValidationError(f"series {name!r} is not aligned with {next(iter(series))!r}")
    columns = {"year": first.times}
    columns.update({name: ts.values for name, ts in series.items()})
    return pd.DataFrame(columns)


def write_series_csv(path: str | Path, frame: pd.DataFrame) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False)
    logger.info(f"  Wrote {path}")
    return path


def read_series_csv(path: str | Path) -> dict[str, TimeSeries]:
    """
    Read a `year,<column>...` file back into aligned series. Boolean columns are read
    as 0/1 values.

    Raises:
        ValidationError when the header has no `year` column, a value is not numeric,
        or years are not uniformly stepped.
    """
    frame = read_csv_frame(path)
    source = Path(path).name
    if "year" not in frame.columns or len(frame.columns) < 2:
        raise ValidationError(f"{source}: header must start with `year` followed by value columns")
    if frame.empty:
        raise ValidationError(f"{source}: no rows")
    frame = frame.apply(lambda col: col.astype(float) if col.dtype == bool else col)
    frame = _numeric_frame(frame, list(frame.columns), source)

    years = frame["year"].to_numpy()
    if years.size == 1:
        dt = 1.0
    else:
        steps = np.diff(years)
        dt = float(steps[0])
        uneven = np.flatnonzero(~np.isclose(steps, dt, rtol=1e-9, atol=1e-9) | (steps <= 0))
        if uneven.size:
            raise ValidationError(f"{source}: row {uneven[0] + 2} breaks the uniform year step {dt:g}")
    return {
        col: TimeSeries(float(years[0]), dt, frame[col].to_numpy())
        for col in frame.columns if col != "year"
    }
