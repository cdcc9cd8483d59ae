"""
StockFlow · Ensemble · Monte Carlo Bands
Runs one simulation per sampled endowment and reduces them to per-step percentile
bands (2% / 50% / 98% by default, the 96% region plus the median).

Each run draws its interpolation fraction from its own SeedSequence child, indexed
by run number, so bands are identical for any thread count.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

from depletion.distribution import CostDistribution, UncertainEndowment, sample_endowment
from depletion.inverse import InversionSettings, run_reverse
from depletion.kinetics import ExtractionProbability, TimeSeries, initial_state, run_forward
from scripts.config import config
from scripts.errors import ValidationError
from scripts.logger import get_logger

logger = get_logger("ensemble.monte_carlo")

Mode = Literal["forward", "reverse"]
Sampler = Callable[[np.random.Generator], float]


# ── Samplers ──────────────────────────────────────────────────────────────────

def uniform_fraction(rng: np.random.Generator) -> float:
    return float(rng.uniform(0.0, 1.0))


def fixed_fraction(x: float) -> Sampler:
    if not 0.0 <= x <= 1.0:
        raise ValidationError(f"fixed fraction {x} outside [0, 1]")
    return lambda rng: float(x)


def beta_fraction(a: float, b: float) -> Sampler:
    if a <= 0 or b <= 0:
        raise ValidationError(f"beta parameters must be > 0, got ({a}, {b})")
    return lambda rng: float(rng.beta(a, b))


# ── Types ─────────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class EnsembleSpec:
    runs: int = config.ENSEMBLE_RUNS
    seed: int = 0
    mode: Mode = "forward"
    percentiles: tuple[float, ...] = (0.02, 0.50, 0.98)
    sampler: Sampler = uniform_fraction

    def __post_init__(self):
        problems = []
        if self.runs < 1:
            problems.append(f"runs must be >= 1, got {self.runs}")
        if self.mode not in ("forward", "reverse"):
            problems.append(f"mode must be forward or reverse, got {self.mode!r}")
        q = np.asarray(self.percentiles, dtype=float)
        if q.size == 0 or np.any((q <= 0) | (q >= 1)) or np.any(np.diff(q) <= 0):
            problems.append(f"percentiles must be strictly increasing inside (0, 1), got {list(self.percentiles)}")
        if problems:
            raise ValidationError(problems)


@dataclass(frozen=True, eq=False)
class EnsembleResult:
    """Per-percentile bands, the raw run matrix and the two endpoint runs."""

    bands: dict[float, TimeSeries]
    runs: np.ndarray                     # (runs, steps)
    fractions: np.ndarray                # sampled interpolation fraction per run
    low: TimeSeries                      # run on the low endowment (x = 0)
    high: TimeSeries                     # run on the high endowment (x = 1)
    divergence_fraction: np.ndarray | None = None   # reverse mode only


def percentile_label(q: float) -> str:
    """0.02 -> 'p02', 0.5 -> 'p50', 0.975 -> 'p97.5'."""
    pct = round(q * 100.0, 6)
    return f"p{int(pct):02d}" if pct == int(pct) else f"p{pct:g}"


# ── Simulation ────────────────────────────────────────────────────────────────

def simulate(
    distribution: CostDistribution,
    nu0: float,
    f: ExtractionProbability,
    path: TimeSeries,
    mode: Mode,
    inversion: InversionSettings | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """
    One deterministic run. Forward mode maps a price path to flows, reverse mode
    maps a demand path to prices.

    Returns:
        (output values, per-step divergence flags)
    """
    state = initial_state(distribution, nu0, path.t0)
    if mode == "forward":
        flows = run_forward(state, f, path).flows.values
        return flows, np.zeros(len(path), dtype=bool)
    result = run_reverse(state, f, path, inversion)
    return result.prices.values, result.diverged


def sample_fractions(spec: EnsembleSpec) -> np.ndarray:
    children = np.random.SeedSequence(spec.seed).spawn(spec.runs)
    return np.array([spec.sampler(np.random.default_rng(child)) for child in children])


def run_ensemble(
    endowment: UncertainEndowment,
    spec: EnsembleSpec,
    f: ExtractionProbability,
    nu0: float,
    path: TimeSeries,
    inversion: InversionSettings | None = None,
    threads: int | None = None,
) -> EnsembleResult:
    """
    Monte Carlo over the endowment's low/high range.

    Args:
        path: price path (forward mode) or demand path (reverse mode).
        threads: worker threads; results do not depend on it.
    """
    fractions = sample_fractions(spec)
    bad = np.flatnonzero((fractions < 0) | (fractions > 1))
    if bad.size:
        raise ValidationError(f"sampler produced fraction {fractions[bad[0]]} outside [0, 1] in run {bad[0]}")

    def one(x: float):
        return simulate(sample_endowment(endowment, float(x)), nu0, f, path, spec.mode, inversion)

    workers = max(1, threads or config.THREADS)
    logger.info(f"🎲 Ensemble: {spec.runs} {spec.mode} runs, {len(path)} steps, {workers} threads, seed {spec.seed}")
    with ThreadPoolExecutor(max_workers=workers) as pool:
        outcomes = list(pool.map(one, fractions))

    runs = np.array([values for values, _ in outcomes]).reshape(spec.runs, len(path))
    flags = np.array([diverged for _, diverged in outcomes]).reshape(spec.runs, len(path))
    quantiles = np.quantile(runs, list(spec.percentiles), axis=0) if len(path) else np.empty((len(spec.percentiles), 0))
    bands = {q: TimeSeries(path.t0, path.dt, quantiles[i]) for i, q in enumerate(spec.percentiles)}

    low_values, _ = simulate(endowment.low, nu0, f, path, spec.mode, inversion)
    high_values, _ = simulate(endowment.high, nu0, f, path, spec.mode, inversion)
    divergence = flags.mean(axis=0) if spec.mode == "reverse" else None
    if divergence is not None and divergence.any():
        logger.warning(f"⚠️ {np.count_nonzero(flags.any(axis=1))}/{spec.runs} runs diverged at some step")

    return EnsembleResult(
        bands=bands,
        runs=runs,
        fractions=fractions,
        low=TimeSeries(path.t0, path.dt, low_values),
        high=TimeSeries(path.t0, path.dt, high_values),
        divergence_fraction=divergence,
    )
