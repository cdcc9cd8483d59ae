"""
StockFlow · Substitution · Coupled Runs
Total service demand split across technologies by their shares. Each step:
split demand -> reverse inversion per resource -> service costs -> share update.
Shares used during step k are those at the start of step k.
"""

from dataclasses import dataclass, field

import numpy as np

from depletion.inverse import InversionSettings, invert_step
from depletion.kinetics import DepletionState, ExtractionProbability, TimeSeries
from scripts.errors import ValidationError
from scripts.logger import get_logger
from substitution.shares import (
    DEFAULT_PREFERENCE_WIDTH,
    DEFAULT_TURNOVER,
    ShareState,
    Technology,
    service_cost,
    step_shares,
)

logger = get_logger("substitution.coupled")


@dataclass(frozen=True)
class CoupledSettings:
    turnover: float = DEFAULT_TURNOVER
    width: float = DEFAULT_PREFERENCE_WIDTH
    inversion: InversionSettings = field(default_factory=InversionSettings)


@dataclass(frozen=True, eq=False)
class CoupledResult:
    prices: dict[str, TimeSeries]            # marginal cost per resource
    shares: dict[str, TimeSeries]            # per technology, at step start
    service_costs: dict[str, TimeSeries]     # per technology
    resource_demand: dict[str, TimeSeries]
    delivered: dict[str, TimeSeries]
    unmet: dict[str, TimeSeries]
    diverged: dict[str, np.ndarray]
    final: dict[str, DepletionState]

    @property
    def any_diverged(self) -> bool:
        return any(flags.any() for flags in self.diverged.values())


def _check_inputs(states, technologies, initial_shares, f) -> list[str]:
    problems = []
    names = [t.name for t in technologies]
    if not technologies:
        problems.append("at least one technology is required")
    dupes = sorted({n for n in names if names.count(n) > 1})
    if dupes:
        problems.append(f"duplicate technology names {dupes}")
    for tech in technologies:
        if tech.resource is not None and tech.resource not in states:
            problems.append(f"technology {tech.name!r} links unknown resource {tech.resource!r}")
    if set(initial_shares) != set(names):
        problems.append(f"initial shares cover {sorted(initial_shares)}, technologies are {sorted(names)}")
    if isinstance(f, dict):
        missing = sorted(set(states) - set(f))
        if missing:
            problems.append(f"no extraction probability for resources {missing}")
    return problems


def run_coupled(
    states: dict[str, DepletionState],
    technologies: list[Technology],
    total_demand: TimeSeries,
    initial_shares: dict[str, float],
    f: ExtractionProbability | dict[str, ExtractionProbability],
    settings: CoupledSettings | None = None,
) -> CoupledResult:
    """
    Couple per-resource reverse inversions through technology shares.

    Args:
        states: initial depletion state per resource (carries ν₀).
        total_demand: service demand, EJ/y.
        initial_shares: technology name -> share, summing to 1.
        f: one extraction probability for every resource, or one per resource.

    Raises:
        ValidationError for unknown links, mismatched shares or negative demand.
    """
    settings = settings or CoupledSettings()
    problems = _check_inputs(states, technologies, initial_shares, f)
    negative = np.flatnonzero(total_demand.values < 0)
    if negative.size:
        problems.append(f"total demand at step {negative[0]} is negative")
    if problems:
        raise ValidationError(problems)

    share_state = ShareState([initial_shares[t.name] for t in technologies], settings.turnover)
    resources = list(states)
    n, dt = len(total_demand), total_demand.dt
    probabilities = f if isinstance(f, dict) else {r: f for r in resources}

    prices = {r: np.empty(n) for r in resources}
    demand = {r: np.zeros(n) for r in resources}
    delivered = {r: np.empty(n) for r in resources}
    unmet = {r: np.zeros(n) for r in resources}
    diverged = {r: np.zeros(n, dtype=bool) for r in resources}
    shares = np.empty((n, len(technologies)))
    costs = np.empty((n, len(technologies)))
    current = dict(states)

    logger.info(
        f"🔗 Coupled run: {len(technologies)} technologies on {resources}, {n} steps, "
        f"τ⁻¹ = {settings.turnover:g}/y"
    )
    for k, total in enumerate(total_demand.values):
        shares[k] = share_state.shares
        for i, tech in enumerate(technologies):
            if tech.resource is not None:
                demand[tech.resource][k] += shares[k, i] * total * tech.intensity

        for r in resources:
            outcome = invert_step(current[r], probabilities[r], float(demand[r][k]), dt, settings.inversion)
            current[r] = outcome.state
            prices[r][k], delivered[r][k] = outcome.price, outcome.delivered
            if outcome.diverged:
                diverged[r][k], unmet[r][k] = True, outcome.shortfall

        costs[k] = [
            service_cost(t, None if t.is_backstop else prices[t.resource][k]) for t in technologies
        ]
        share_state = step_shares(share_state, costs[k], dt, settings.width)

    for r in resources:
        hits = np.flatnonzero(diverged[r])
        if hits.size:
            logger.warning(f"⚠️ {r}: demand exceeds capacity from t={total_demand.times[hits[0]]:g}")

    def series(values):
        return TimeSeries(total_demand.t0, dt, values)

    return CoupledResult(
        prices={r: series(prices[r]) for r in resources},
        shares={t.name: series(shares[:, i]) for i, t in enumerate(technologies)},
        service_costs={t.name: series(costs[:, i]) for i, t in enumerate(technologies)},
        resource_demand={r: series(demand[r]) for r in resources},
        delivered={r: series(delivered[r]) for r in resources},
        unmet={r: series(unmet[r]) for r in resources},
        diverged=diverged,
        final=current,
    )
