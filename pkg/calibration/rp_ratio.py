"""
StockFlow · Calibration · Reserve-to-Production Ratios
Estimates ν₀ from historical reserves and production. Ratios are only meaningful
at the aggregate level, so regions are combined as a ratio of sums, never as a mean
of per-region ratios.

CSV schema (long format): year,region,reserves,production
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from depletion.io import read_csv_frame
from depletion.kinetics import TimeSeries
from scripts.errors import ValidationError
from scripts.logger import get_logger

logger = get_logger("calibration.rp_ratio")

RP_COLUMNS = ["year", "region", "reserves", "production"]

# ν₀⁻¹ in years (mean, std) for the four stock resources. Gas uses the 56±6 y of the
# main text; the figure caption gives 54±6 y for the same data.
DEFAULT_NU0_INVERSE = {
    "oil":     (44.0, 10.0),
    "gas":     (56.0, 6.0),
    "coal":    (125.0, 50.0),
    "uranium": (16.0, 1.0),
}


# ── Types ─────────────────────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class RpSeries:
    """Per-year, per-region reserves and production in one frame (long format)."""

    frame: pd.DataFrame

    def __post_init__(self):
        missing = [c for c in RP_COLUMNS if c not in self.frame.columns]
        if missing:
            raise ValidationError(f"R/P series is missing columns {missing}")
        frame = self.frame[RP_COLUMNS].copy()
        frame["year"] = frame["year"].astype(int)
        frame["region"] = frame["region"].astype(str)
        dupes = frame.duplicated(["year", "region"])
        if dupes.any():
            row = frame[dupes].iloc[0]
            raise ValidationError(f"duplicate entry for year {row['year']} region {row['region']!r}")
        negative = frame[(frame["reserves"] < 0) | (frame["production"] < 0)]
        if not negative.empty:
            row = negative.iloc[0]
            raise ValidationError(f"negative quantity in year {row['year']} region {row['region']!r}")
        object.__setattr__(self, "frame", frame.sort_values(["year", "region"]).reset_index(drop=True))

    @property
    def regions(self) -> list[str]:
        return sorted(self.frame["region"].unique())

    @property
    def years(self) -> np.ndarray:
        return np.sort(self.frame["year"].unique())

    @classmethod
    def from_arrays(cls, years, reserves: dict[str, list], production: dict[str, list]) -> "RpSeries":
        """Build from wide per-region sequences sharing one year axis."""
        rows = []
        for region, values in reserves.items():
            if len(values) != len(years) or len(production[region]) != len(years):
                raise ValidationError(f"region {region!r} does not cover all {len(years)} years")
            for year, r, p in zip(years, values, production[region]):
                rows.append({"year": int(year), "region": region, "reserves": float(r), "production": float(p)})
        return cls(pd.DataFrame(rows, columns=RP_COLUMNS))


@dataclass(frozen=True)
class Nu0Estimate:
    inverse_mean: float            # years
    inverse_std: float             # years
    window: tuple[int, int]

    def __post_init__(self):
        if not self.inverse_mean > 0:
            raise ValidationError(f"R/P mean must be > 0, got {self.inverse_mean}")
        if self.inverse_std < 0:
            raise ValidationError(f"R/P std must be >= 0, got {self.inverse_std}")

    @property
    def nu0(self) -> float:
        return 1.0 / self.inverse_mean


# ── Ingestion ─────────────────────────────────────────────────────────────────

def read_rp_csv(path: str | Path, unit_factor: float = 1.0) -> RpSeries:
    """
    Load an R/P file. `unit_factor` converts both reserves and production into EJ.

    Raises:
        ValidationError with row numbers for schema violations.
    """
    path = Path(path)
    frame = read_csv_frame(path)
    if list(frame.columns) != RP_COLUMNS:
        raise ValidationError(
            f"{path.name}: header must be {','.join(RP_COLUMNS)}, got {','.join(map(str, frame.columns))}"
        )
    errors = []
    for col in ("year", "reserves", "production"):
        parsed = pd.to_numeric(frame[col], errors="coerce")
        for row in np.flatnonzero(parsed.isna().to_numpy()):
            errors.append(f"{path.name}: row {row + 1} column {col!r} is not a number ({frame[col].iloc[row]!r})")
        frame[col] = parsed
    if errors:
        raise ValidationError(errors)
    frame[["reserves", "production"]] *= unit_factor
    try:
        series = RpSeries(frame)
    except ValidationError as e:
        raise ValidationError([f"{path.name}: {msg}" for msg in e.errors]) from e
    logger.info(f"Loaded R/P data {path.name}: {len(series.years)} years, regions {series.regions}")
    return series


# ── Ratios & Estimates ────────────────────────────────────────────────────────

def _scoped(series: RpSeries, scope: list[str] | None) -> pd.DataFrame:
    if scope is None:
        return series.frame
    if not scope:
        raise ValidationError("region scope is empty")
    unknown = sorted(set(scope) - set(series.regions))
    if unknown:
        raise ValidationError(f"unknown regions {unknown}, available {series.regions}")
    return series.frame[series.frame["region"].isin(scope)]


def rp_ratio(series: RpSeries, scope: list[str] | None = None) -> TimeSeries:
    """
    Per-year Σ reserves / Σ production over the scoped regions (None = global).

    Raises:
        ValidationError naming the first year with zero production or a missing year.
    """
    totals = _scoped(series, scope).groupby("year")[["reserves", "production"]].sum()
    zero = totals.index[totals["production"] <= 0]
    if len(zero):
        raise ValidationError(f"production is zero in year {zero[0]}")
    years = totals.index.to_numpy()
    holes = np.flatnonzero(np.diff(years) != 1)
    if holes.size:
        raise ValidationError(f"R/P series skips from year {years[holes[0]]} to {years[holes[0] + 1]}")
    ratio = (totals["reserves"] / totals["production"]).to_numpy()
    return TimeSeries(float(years[0]), 1.0, ratio)


def mean_of_ratios(series: RpSeries, scope: list[str] | None = None) -> TimeSeries:
    """Average of per-region ratios; reported next to rp_ratio as a contrast only."""
    frame = _scoped(series, scope)
    per_region = frame.assign(ratio=frame["reserves"] / frame["production"])
    means = per_region.groupby("year")["ratio"].mean()
    return TimeSeries(float(means.index[0]), 1.0, means.to_numpy())


def estimate_nu0(ratios: TimeSeries, window: tuple[int, int] | None = None) -> Nu0Estimate:
    """
    Mean and sample standard deviation of R/P over an inclusive year window.

    Raises:
        ValidationError when the window holds no years.
    """
    years = ratios.times
    if window is None:
        window = (int(years[0]), int(years[-1])) if years.size else (0, -1)
    start, end = window
    mask = (years >= start) & (years <= end)
    picked = ratios.values[mask]
    if picked.size == 0:
        raise ValidationError(f"window {start}-{end} contains no years of the series")
    std = float(np.std(picked, ddof=1)) if picked.size > 1 else 0.0
    estimate = Nu0Estimate(inverse_mean=float(np.mean(picked)), inverse_std=std, window=(int(start), int(end)))
    logger.info(
        f"ν₀⁻¹ = {estimate.inverse_mean:.2f} ± {estimate.inverse_std:.2f} y "
        f"over {start}-{end} ({picked.size} years)"
    )
    return estimate


def exclude_category(series: RpSeries, adjustments: dict[int, float], region: str | None = None) -> RpSeries:
    """
    Subtract a reserve category (e.g. unconventional oil) year by year.

    `adjustments` maps year -> quantity removed from `region`'s reserves; `region` may
    be omitted for single-region series. Production is untouched.
    """
    regions = series.regions
    if region is None:
        if len(regions) != 1:
            raise ValidationError(f"region must be named for a series with regions {regions}")
        region = regions[0]
    elif region not in regions:
        raise ValidationError(f"unknown region {region!r}")

    frame = series.frame.copy()
    for year, amount in adjustments.items():
        rows = (frame["year"] == int(year)) & (frame["region"] == region)
        if not rows.any():
            raise ValidationError(f"no {region!r} entry for year {year}")
        if amount < 0:
            raise ValidationError(f"adjustment for year {year} is negative")
        available = float(frame.loc[rows, "reserves"].iloc[0])
        if amount > available:
            raise ValidationError(f"adjustment {amount:g} exceeds reserves {available:g} in year {year}")
        frame.loc[rows, "reserves"] = available - amount
    return RpSeries(frame)


def default_nu0(resource: str) -> Nu0Estimate:
    """Shipped ν₀⁻¹ for oil, gas, coal or uranium."""
    key = resource.lower()
    if key not in DEFAULT_NU0_INVERSE:
        raise ValidationError(f"no default ν₀ for {resource!r}, known: {sorted(DEFAULT_NU0_INVERSE)}")
    mean, std = DEFAULT_NU0_INVERSE[key]
    return Nu0Estimate(inverse_mean=mean, inverse_std=std, window=(0, 0))
