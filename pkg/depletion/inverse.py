"""
StockFlow · Depletion · Reverse Problem
Finds, step by step, the price that unlocks just enough reserves to deliver an
exogenous demand. Flow is non-decreasing in price for a fixed state, so bisection
between a price that undershoots the demand and p_max brackets the answer. A
smooth f never reaches zero flow, so its lower end may sit below the grid.

When even the price ceiling cannot deliver the demand the step is flagged as
diverged: the maximum achievable flow is delivered, the shortfall recorded,
and the run carries on.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from depletion.kinetics import (
    DepletionState,
    ExtractionProbability,
    TimeSeries,
    instantaneous_flow,
    step,
    step_average_flow,
)
from scripts.errors import ConvergenceError, DomainError, ValidationError
from scripts.logger import get_logger

logger = get_logger("depletion.inverse")


@dataclass(frozen=True)
class InversionSettings:
    tolerance: float = 1e-6        # relative flow tolerance
    p_max: float | None = None     # None -> 10 × last grid edge
    max_iterations: int = 200

    def __post_init__(self):
        problems = []
        if not self.tolerance > 0:
            problems.append(f"tolerance must be > 0, got {self.tolerance}")
        if self.p_max is not None and not self.p_max > 0:
            problems.append(f"p_max must be > 0, got {self.p_max}")
        if self.max_iterations < 1:
            problems.append(f"max_iterations must be >= 1, got {self.max_iterations}")
        if problems:
            raise ValidationError(problems)

    def ceiling(self, s: DepletionState) -> float:
        return self.p_max if self.p_max is not None else 10.0 * float(s.grid.edges[-1])


@dataclass(frozen=True, eq=False)
class StepInversion:
    price: float
    state: DepletionState
    delivered: float
    diverged: bool = False
    shortfall: float = 0.0


@dataclass(frozen=True, eq=False)
class ReverseResult:
    prices: TimeSeries
    flows_delivered: TimeSeries
    unmet_demand: TimeSeries
    diverged: np.ndarray
    diverged_at: int | None
    final: DepletionState


def price_floor(s: DepletionState, f: ExtractionProbability) -> float:
    return float(s.grid.edges[0]) - f.reach


def _bisect(objective: Callable[[float], float], lo: float, hi: float, target: float,
            cfg: InversionSettings) -> float:
    """Bisect a non-decreasing objective for objective(p) = target within cfg.tolerance."""
    allowed = cfg.tolerance * target
    for _ in range(cfg.max_iterations):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            # bracket is down to adjacent floats; no closer price exists
            return mid
        gap = objective(mid) - target
        if abs(gap) <= allowed:
            return mid
        if gap < 0:
            lo = mid
        else:
            hi = mid
    raise ConvergenceError(
        f"bisection did not reach flow {target:.6g} within {cfg.max_iterations} iterations "
        f"(bracket [{lo:.6g}, {hi:.6g}])"
    )


def _lower_bracket(objective: Callable[[float], float], s: DepletionState, f: ExtractionProbability,
                   target: float, cfg: InversionSettings) -> float:
    """
    A price where the objective falls short of the target. Smooth kinds never reach
    zero flow, so the grid floor is walked down one reach at a time until it does.
    """
    floor = price_floor(s, f)
    for _ in range(cfg.max_iterations):
        if objective(floor) < target * (1.0 - cfg.tolerance):
            return floor
        floor -= f.reach
    raise ConvergenceError(f"no price down to {floor:.6g} delivers less than {target:.6g} EJ/y")


def invert_step(
    s: DepletionState,
    f: ExtractionProbability,
    demand: float,
    dt: float,
    cfg: InversionSettings | None = None,
) -> StepInversion:
    """
    Price whose step-average flow over dt equals the demand (EJ/y).

    Returns:
        StepInversion with the price, the advanced state and the delivered flow.
        A diverged outcome delivers the flow at the price ceiling. Its shortfall is
        measured against the extraction capacity at that ceiling, or against the
        delivered flow when the capacity alone would cover the demand.
        Zero demand under a smooth f still advances the state at the floor price.

    Raises:
        DomainError for negative demand or dt <= 0.
        ConvergenceError if bisection runs out of iterations.
    """
    cfg = cfg or InversionSettings()
    if demand < 0 or not np.isfinite(demand):
        raise DomainError(f"demand must be finite and >= 0, got {demand}")
    if not dt > 0:
        raise DomainError(f"time step must be > 0, got {dt}")

    floor = price_floor(s, f)
    if demand == 0:
        if f.kind != "sharp":
            # smooth f extracts at any price; advance at the floor so a forward replay matches
            new_state, taken = step(s, f, floor, dt)
            return StepInversion(price=floor, state=new_state, delivered=taken / dt)
        idle = DepletionState(s.remaining, s.extracted, s.time + dt, s.nu0, s.initial_total)
        return StepInversion(price=floor, state=idle, delivered=0.0)

    ceiling = cfg.ceiling(s)
    max_flow = step_average_flow(s, f, ceiling, dt)
    if max_flow < demand * (1.0 - cfg.tolerance):
        capacity = instantaneous_flow(s, f, ceiling)
        new_state, taken = step(s, f, ceiling, dt)
        delivered = taken / dt
        return StepInversion(
            price=ceiling,
            state=new_state,
            delivered=delivered,
            diverged=True,
            shortfall=demand - capacity if demand > capacity else demand - delivered,
        )

    flow_at = lambda p: step_average_flow(s, f, p, dt)
    price = _bisect(flow_at, _lower_bracket(flow_at, s, f, demand, cfg), ceiling, demand, cfg)
    new_state, taken = step(s, f, price, dt)
    return StepInversion(price=price, state=new_state, delivered=taken / dt)


def run_reverse(
    initial: DepletionState,
    f: ExtractionProbability,
    demand: TimeSeries,
    cfg: InversionSettings | None = None,
) -> ReverseResult:
    """
    Reverse problem: exogenous demand path -> marginal cost (price) path.

    Each step is inverted independently of earlier prices. Diverged steps are
    recorded, never fatal.
    """
    cfg = cfg or InversionSettings()
    negative = np.flatnonzero(demand.values < 0)
    if negative.size:
        raise ValidationError(f"demand at step {negative[0]} is negative")

    n = len(demand)
    prices, delivered, unmet = np.empty(n), np.empty(n), np.zeros(n)
    diverged = np.zeros(n, dtype=bool)
    state = initial
    for k, d in enumerate(demand.values):
        outcome = invert_step(state, f, float(d), demand.dt, cfg)
        state = outcome.state
        prices[k], delivered[k] = outcome.price, outcome.delivered
        if outcome.diverged:
            diverged[k], unmet[k] = True, outcome.shortfall

    hits = np.flatnonzero(diverged)
    diverged_at = int(hits[0]) if hits.size else None
    if diverged_at is not None:
        logger.warning(
            f"⚠️ Demand exceeds extraction capacity from step {diverged_at} "
            f"(t={demand.times[diverged_at]:g}); {hits.size}/{n} steps diverged"
        )
    return ReverseResult(
        prices=TimeSeries(demand.t0, demand.dt, prices),
        flows_delivered=TimeSeries(demand.t0, demand.dt, delivered),
        unmet_demand=TimeSeries(demand.t0, demand.dt, unmet),
        diverged=diverged,
        diverged_at=diverged_at,
        final=state,
    )


def price_for_flow(
    s: DepletionState,
    f: ExtractionProbability,
    flow: float,
    cfg: InversionSettings | None = None,
) -> float:
    """
    Price at which the instantaneous flow ν₀·reserves equals `flow`.

    Used to start a price path at the level that supplies current production.

    Raises:
        DomainError if the flow cannot be reached below the price ceiling.
    """
    cfg = cfg or InversionSettings()
    if flow < 0:
        raise DomainError(f"flow must be >= 0, got {flow}")
    ceiling = cfg.ceiling(s)
    if flow == 0:
        return price_floor(s, f)
    if instantaneous_flow(s, f, ceiling) < flow * (1.0 - cfg.tolerance):
        raise DomainError(
            f"flow {flow:.6g} EJ/y exceeds capacity {instantaneous_flow(s, f, ceiling):.6g} EJ/y "
            f"at the price ceiling {ceiling:g}"
        )
    flow_at = lambda p: instantaneous_flow(s, f, p)
    return _bisect(flow_at, _lower_bracket(flow_at, s, f, flow, cfg), ceiling, flow, cfg)
