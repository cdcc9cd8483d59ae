"""
StockFlow · Scenario · Assumption Paths
Price and demand paths on the scenario horizon, and the unit conversions applied
when they are ingested. Internal units are $/GJ for prices and EJ/y for flows.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from depletion.io import read_series_csv
from depletion.kinetics import TimeSeries
from scripts.errors import ValidationError

# 1 boe = 6.1178632 GJ, 1 Mtoe = 41.868 PJ
PRICE_UNITS = {"$/GJ": 1.0, "$/boe": 1.0 / 6.1178632}
FLOW_UNITS = {"EJ/y": 1.0, "Mtoe/y": 0.041868}
SHARE_SUM_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Horizon:
    """Steps of length dt from start; the last step ends at end."""

    start: float
    end: float
    dt: float

    def __post_init__(self):
        problems = []
        if not self.dt > 0:
            problems.append(f"dt must be > 0, got {self.dt}")
        elif not self.end > self.start:
            problems.append(f"end {self.end} must be after start {self.start}")
        else:
            steps = (self.end - self.start) / self.dt
            if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
                problems.append(f"dt {self.dt} does not divide the horizon {self.start}-{self.end}")
        if problems:
            raise ValidationError(problems)

    @property
    def n_steps(self) -> int:
        return int(round((self.end - self.start) / self.dt))

    @property
    def times(self) -> np.ndarray:
        return self.start + self.dt * np.arange(self.n_steps)

    def series(self, values) -> TimeSeries:
        return TimeSeries(float(self.start), float(self.dt), values)


# ── Path Builders ─────────────────────────────────────────────────────────────

def linear_path(start_value: float, slope: float, horizon: Horizon) -> TimeSeries:
    """value(t) = start + slope·(t - t0); slope may be negative."""
    return horizon.series(start_value + slope * (horizon.times - horizon.start))


def piecewise_path(breakpoints, horizon: Horizon) -> TimeSeries:
    """
    Linear interpolation through (year, value) breakpoints, held flat beyond the
    first and last breakpoint.
    """
    points = np.asarray(breakpoints, dtype=float)
    if points.ndim != 2 or points.shape[1] != 2 or points.shape[0] == 0:
        raise ValidationError("breakpoints must be a non-empty list of [year, value] pairs")
    if np.any(np.diff(points[:, 0]) <= 0):
        raise ValidationError("breakpoint years must be strictly increasing")
    return horizon.series(np.interp(horizon.times, points[:, 0], points[:, 1]))


def explicit_path(values, horizon: Horizon) -> TimeSeries:
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or values.size != horizon.n_steps:
        raise ValidationError(f"path has {values.size} values, horizon has {horizon.n_steps} steps")
    return horizon.series(values)


def read_path_csv(path: str | Path, horizon: Horizon, column: str | None = None) -> TimeSeries:
    """
    Read a `year,<column>` file and cut it to the horizon. The file's step must equal
    the horizon's dt and its years must cover every horizon step.
    """
    series = read_series_csv(path)
    name = Path(path).name
    if column is None:
        if len(series) != 1:
            raise ValidationError(f"{name}: several value columns {sorted(series)}, name one with `column`")
        column = next(iter(series))
    if column not in series:
        raise ValidationError(f"{name}: no column {column!r}, available {sorted(series)}")
    ts = series[column]
    if len(ts) > 1 and not np.isclose(ts.dt, horizon.dt, rtol=1e-9):
        raise ValidationError(f"{name}: year step {ts.dt:g} differs from horizon dt {horizon.dt:g}")
    offset = (horizon.start - ts.t0) / horizon.dt
    first = int(round(offset))
    if abs(offset - first) > 1e-9 or first < 0 or first + horizon.n_steps > len(ts):
        raise ValidationError(
            f"{name}: years {ts.t0:g}-{ts.times[-1]:g} do not cover the horizon "
            f"{horizon.start:g}-{horizon.end - horizon.dt:g}"
        )
    return horizon.series(ts.values[first:first + horizon.n_steps])


def fixed_share_demand(total: TimeSeries, shares: dict[str, float]) -> dict[str, TimeSeries]:
    """
    Split a total demand by fixed shares. Shares summing to 1 within 1e-9 are
    renormalised so the parts add back to the total.

    Raises:
        ValidationError for negative shares or shares not summing to 1.
    """
    if not shares:
        raise ValidationError("no shares given")
    negative = sorted(k for k, v in shares.items() if v < 0)
    if negative:
        raise ValidationError(f"negative shares for {negative}")
    s = sum(shares.values())
    if abs(s - 1.0) > SHARE_SUM_TOLERANCE:
        raise ValidationError(f"shares sum to {s:.12g}, expected 1")
    return {
        name: TimeSeries(total.t0, total.dt, total.values * (share / s))
        for name, share in shares.items()
    }


# ── Units ─────────────────────────────────────────────────────────────────────

def convert_price(ts: TimeSeries, unit: str) -> TimeSeries:
    if unit not in PRICE_UNITS:
        raise ValidationError(f"unknown price unit {unit!r}, expected one of {sorted(PRICE_UNITS)}")
    return TimeSeries(ts.t0, ts.dt, ts.values * PRICE_UNITS[unit])


def convert_flow(ts: TimeSeries, unit: str) -> TimeSeries:
    if unit not in FLOW_UNITS:
        raise ValidationError(f"unknown flow unit {unit!r}, expected one of {sorted(FLOW_UNITS)}")
    return TimeSeries(ts.t0, ts.dt, ts.values * FLOW_UNITS[unit])
