"""
StockFlow · Depletion · Kinetics
Reserve consumption dn/dt = -ν₀·n(C,t)·f(P(t)-C) and the flow integral F = ν₀∫n·f dC.

Each step applies the exact solution for a price held constant over the step,
nᵢ ← nᵢ·exp(-ν₀·fᵢ·dt), so densities stay positive for any dt and piecewise-constant
price paths reproduce the closed-form solutions to roundoff.
Flows are step averages (mass removed / dt), reported at the step start time.
"""

from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.special import expit
from scipy.stats import norm

from depletion.distribution import CostDistribution, CostGrid, total_quantity
from scripts.errors import DomainError, ValidationError
from scripts.logger import get_logger

logger = get_logger("depletion.kinetics")

ProbabilityKind = Literal["sharp", "logistic", "erf"]
PROBABILITY_KINDS = ("sharp", "logistic", "erf")
DEFAULT_WIDTH = 0.5  # $/GJ


# ── Types ─────────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class ExtractionProbability:
    """The step-like f(P-C) separating reserves from resources."""

    kind: ProbabilityKind = "logistic"
    width: float = DEFAULT_WIDTH

    def __post_init__(self):
        if self.kind not in PROBABILITY_KINDS:
            raise ValidationError(f"unknown probability kind {self.kind!r}, expected one of {PROBABILITY_KINDS}")
        if self.kind != "sharp" and not (self.width > 0 and np.isfinite(self.width)):
            raise ValidationError(f"{self.kind} probability needs width > 0, got {self.width}")

    @classmethod
    def from_uncertainties(cls, cost_width: float, price_width: float) -> "ExtractionProbability":
        """
        Normal cost uncertainty convolved with normal price uncertainty gives an
        erf-shaped f whose width is the root of the sum of squares.
        """
        return cls(kind="erf", width=float(np.hypot(cost_width, price_width)))

    @property
    def reach(self) -> float:
        """Cost distance below the price at which f is negligible."""
        return 0.0 if self.kind == "sharp" else 6.0 * self.width


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Uniformly stepped values; values[k] belongs to time t0 + k·dt."""

    t0: float
    dt: float
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 1:
            raise ValidationError("time series values must be one-dimensional")
        if not (self.dt > 0 and np.isfinite(self.dt)):
            raise ValidationError(f"time step must be > 0, got {self.dt}")
        bad = np.flatnonzero(~np.isfinite(values))
        if bad.size:
            raise ValidationError(f"time series value at step {bad[0]} is not finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.values.size)


@dataclass(frozen=True, eq=False)
class DepletionState:
    """n(C,t) plus the cumulative extraction ledger."""

    remaining: CostDistribution
    extracted: float
    time: float
    nu0: float
    initial_total: float = field(default=float("nan"))

    def __post_init__(self):
        if not (self.nu0 > 0 and np.isfinite(self.nu0)):
            raise ValidationError(f"nu0 must be > 0, got {self.nu0}")
        if np.isnan(self.initial_total):
            object.__setattr__(self, "initial_total", self.extracted + total_quantity(self.remaining))

    @property
    def grid(self) -> CostGrid:
        return self.remaining.grid

    @property
    def remaining_total(self) -> float:
        return total_quantity(self.remaining)

    def with_nu0(self, nu0: float) -> "DepletionState":
        return DepletionState(self.remaining, self.extracted, self.time, nu0, self.initial_total)


def initial_state(distribution: CostDistribution, nu0: float, t0: float = 0.0) -> DepletionState:
    return DepletionState(remaining=distribution, extracted=0.0, time=t0, nu0=nu0)


# ── Extraction Probability ────────────────────────────────────────────────────

def probability(f: ExtractionProbability, p: float, c):
    """f(p - c) for a scalar or array of costs c."""
    x = p - np.asarray(c, dtype=float)
    if f.kind == "sharp":
        out = np.where(x >= 0, 1.0, 0.0)
    elif f.kind == "logistic":
        out = expit(x / f.width)
    else:
        out = norm.cdf(x / f.width)
    return float(out) if np.ndim(out) == 0 else out


def bin_weights(f: ExtractionProbability, p: float, grid: CostGrid) -> np.ndarray:
    """
    Per-bin extraction fraction.

    Sharp f uses the exact bin average of the unit step, so a bin starting exactly at p
    gets 0 and a partially covered bin gets its covered fraction. Smooth kinds are
    evaluated at bin midpoints.
    """
    if f.kind == "sharp":
        return np.clip((p - grid.edges[:-1]) / grid.widths, 0.0, 1.0)
    return probability(f, p, grid.midpoints)


# ── Reserves & Flows ──────────────────────────────────────────────────────────

def reserves(s: DepletionState, f: ExtractionProbability, p: float) -> float:
    """Cost-distributed reserves ∫ n(C,t)·f(p-C) dC (EJ)."""
    return float(np.dot(s.remaining.quantities, bin_weights(f, p, s.grid)))


def instantaneous_flow(s: DepletionState, f: ExtractionProbability, p: float) -> float:
    """F = ν₀ × reserves (EJ/y)."""
    return s.nu0 * reserves(s, f, p)


def _depleted_density(s: DepletionState, f: ExtractionProbability, p: float, dt: float) -> np.ndarray:
    return s.remaining.density * np.exp(-s.nu0 * bin_weights(f, p, s.grid) * dt)


def _taken(s: DepletionState, f: ExtractionProbability, p: float, dt: float) -> float:
    # expm1 keeps small extractions exact next to a large stock
    fractions = -np.expm1(-s.nu0 * bin_weights(f, p, s.grid) * dt)
    return float(np.dot(s.remaining.quantities, fractions))


def step_average_flow(s: DepletionState, f: ExtractionProbability, p: float, dt: float) -> float:
    """Flow a step of length dt at price p would deliver, without building the new state."""
    return _taken(s, f, p, dt) / dt


def step(s: DepletionState, f: ExtractionProbability, p: float, dt: float) -> tuple[DepletionState, float]:
    """
    Advance the state by dt at constant price p.

    Returns:
        (new state, energy extracted during the step)
    """
    if not dt > 0:
        raise DomainError(f"time step must be > 0, got {dt}")
    remaining = CostDistribution(grid=s.grid, density=_depleted_density(s, f, p, dt))
    taken = _taken(s, f, p, dt)
    new_state = DepletionState(
        remaining=remaining,
        extracted=s.extracted + taken,
        time=s.time + dt,
        nu0=s.nu0,
        initial_total=s.initial_total,
    )
    return new_state, taken


@dataclass(frozen=True, eq=False)
class ForwardRun:
    flows: TimeSeries
    states: list[DepletionState]

    @property
    def final(self) -> DepletionState:
        return self.states[-1]


def run_forward(
    initial: DepletionState,
    f: ExtractionProbability,
    prices: TimeSeries,
    snapshot_every: int = 1,
) -> ForwardRun:
    """
    Forward problem: exogenous price path -> flow path.

    prices.values[k] is held during step k. flows.values[k] is the energy extracted
    during step k divided by dt. states holds the initial state, a snapshot after
    every `snapshot_every` steps, and always the final state.
    """
    if snapshot_every < 1:
        raise DomainError(f"snapshot_every must be >= 1, got {snapshot_every}")
    dt = prices.dt
    state = initial
    flows = np.empty(len(prices))
    states = [initial]
    for k, p in enumerate(prices.values):
        state, taken = step(state, f, float(p), dt)
        flows[k] = taken / dt
        if (k + 1) % snapshot_every == 0:
            states.append(state)
    if states[-1] is not state:
        states.append(state)

    logger.debug(
        f"Forward run: {len(prices)} steps, extracted {state.extracted:.4g} EJ "
        f"of {initial.initial_total:.4g} EJ"
    )
    return ForwardRun(flows=TimeSeries(prices.t0, dt, flows), states=states)


# ── Closed Forms ──────────────────────────────────────────────────────────────

def constant_price_flow(initial: DepletionState, p: float, times) -> np.ndarray:
    """F(t) = ν₀·R₀·exp(-ν₀(t - t_start)) for a sharp f and constant price p."""
    r0 = reserves(initial, ExtractionProbability(kind="sharp"), p)
    t = np.asarray(times, dtype=float) - initial.time
    return initial.nu0 * r0 * np.exp(-initial.nu0 * t)


def path_solution(
    initial: CostDistribution,
    f: ExtractionProbability,
    nu0: float,
    prices: TimeSeries,
) -> CostDistribution:
    """General solution n₀(C)·exp(-ν₀·Σₖ f(pₖ - C)·dt) for a stepwise price path."""
    exposure = np.zeros(initial.grid.n_bins)
    for p in prices.values:
        exposure += bin_weights(f, float(p), initial.grid)
    density = initial.density * np.exp(-nu0 * exposure * prices.dt)
    return CostDistribution(grid=initial.grid, density=density)
