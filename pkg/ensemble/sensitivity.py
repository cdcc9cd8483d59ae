"""
StockFlow · Ensemble · ν₀ Sensitivity
One full run per ν₀ value on an otherwise identical scenario, plus a summary table:
peak time and peak flow for forward runs, mean and max price for reverse runs.
"""

from dataclasses import dataclass

import numpy as np
import pandas as pd

from depletion.distribution import CostDistribution
from depletion.inverse import InversionSettings
from depletion.kinetics import ExtractionProbability, TimeSeries
from ensemble.monte_carlo import Mode, simulate
from scripts.errors import ValidationError
from scripts.logger import get_logger

logger = get_logger("ensemble.sensitivity")


@dataclass(frozen=True, eq=False)
class SweepRun:
    nu0: float
    output: TimeSeries             # flows (forward) or prices (reverse)
    diverged: np.ndarray

    @property
    def nu0_inverse(self) -> float:
        return 1.0 / self.nu0

    @property
    def peak_time(self) -> float:
        return float(self.output.times[int(np.argmax(self.output.values))])

    @property
    def peak_value(self) -> float:
        return float(np.max(self.output.values))

    @property
    def mean_value(self) -> float:
        return float(np.mean(self.output.values))


def sensitivity_sweep(
    endowment: CostDistribution,
    nu0_values,
    f: ExtractionProbability,
    path: TimeSeries,
    mode: Mode = "forward",
    inversion: InversionSettings | None = None,
) -> list[SweepRun]:
    """
    Args:
        nu0_values: extraction rates (1/y), all > 0, in the order the runs are reported.
        path: price path (forward) or demand path (reverse).

    Raises:
        ValidationError for an empty list or a non-positive value.
    """
    values = [float(v) for v in nu0_values]
    if not values:
        raise ValidationError("sensitivity sweep needs at least one ν₀ value")
    bad = [v for v in values if not (v > 0 and np.isfinite(v))]
    if bad:
        raise ValidationError(f"ν₀ values must be > 0, got {bad}")

    runs = []
    for nu0 in values:
        output, diverged = simulate(endowment, nu0, f, path, mode, inversion)
        runs.append(SweepRun(nu0=nu0, output=TimeSeries(path.t0, path.dt, output), diverged=diverged))
        logger.info(f"  ν₀⁻¹ = {1.0 / nu0:g} y done")

    if mode == "reverse" and len(runs) > 1:
        base = runs[0].mean_value
        for run in runs[1:]:
            change = 100.0 * (run.mean_value - base) / base if base else float("nan")
            logger.info(
                f"Mean price at ν₀⁻¹ = {run.nu0_inverse:g} y is {change:+.1f}% "
                f"against ν₀⁻¹ = {runs[0].nu0_inverse:g} y"
            )
    return runs


def summarize(runs: list[SweepRun], mode: Mode = "forward") -> pd.DataFrame:
    """One row per ν₀ value."""
    rows = []
    for run in runs:
        row = {"nu0_inverse": run.nu0_inverse, "nu0": run.nu0}
        if mode == "forward":
            row.update(peak_year=run.peak_time, peak_flow=run.peak_value)
        else:
            row.update(
                mean_price=run.mean_value,
                max_price=run.peak_value,
                diverged_steps=int(np.count_nonzero(run.diverged)),
            )
        rows.append(row)
    return pd.DataFrame(rows)
