"""
StockFlow · Substitution · Technology Shares
Pairwise-comparison share dynamics between competing technologies:

    dSᵢ/dt = Sᵢ · Σⱼ Sⱼ · τ⁻¹ · (σ((cⱼ - cᵢ)/w) - ½)

σ is the logistic preference for i over j. Subtracting ½ makes the pairwise terms
antisymmetric, so Σ Sᵢ stays 1, equal costs are an exact fixed point and a share
that reaches zero stays there.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from scripts.errors import ValidationError

SHARE_TOLERANCE = 1e-12
DEFAULT_TURNOVER = 0.1      # 1/y
DEFAULT_PREFERENCE_WIDTH = 1.0  # $/GJ of service
MAX_RELATIVE_CHANGE = 0.2   # per substep


@dataclass(frozen=True)
class Technology:
    """A way of delivering energy services; `resource=None` marks a backstop."""

    name: str
    resource: str | None = None
    intensity: float = 1.0        # EJ resource per EJ service
    offset: float = 0.0           # non-fuel cost, $/GJ service

    def __post_init__(self):
        problems = []
        if not self.name:
            problems.append("technology name is empty")
        if self.resource is not None and not (self.intensity > 0 and np.isfinite(self.intensity)):
            problems.append(f"technology {self.name!r}: intensity must be > 0, got {self.intensity}")
        if not np.isfinite(self.offset):
            problems.append(f"technology {self.name!r}: offset must be finite")
        if problems:
            raise ValidationError(problems)

    @property
    def is_backstop(self) -> bool:
        return self.resource is None


@dataclass(frozen=True, eq=False)
class ShareState:
    shares: np.ndarray
    turnover: float = DEFAULT_TURNOVER

    def __post_init__(self):
        shares = np.array(self.shares, dtype=float)
        if shares.ndim != 1 or shares.size == 0:
            raise ValidationError("shares must be a non-empty one-dimensional sequence")
        if np.any(shares < 0) or not np.all(np.isfinite(shares)):
            raise ValidationError(f"shares must be finite and >= 0, got {shares.tolist()}")
        if abs(shares.sum() - 1.0) > SHARE_TOLERANCE:
            raise ValidationError(f"shares must sum to 1, got {shares.sum():.15g}")
        if not (self.turnover >= 0 and np.isfinite(self.turnover)):
            raise ValidationError(f"turnover rate must be >= 0, got {self.turnover}")
        shares.setflags(write=False)
        object.__setattr__(self, "shares", shares)


def service_cost(tech: Technology, marginal_cost: float | None = None) -> float:
    """intensity × marginal cost + offset; a backstop costs its offset."""
    if tech.is_backstop:
        return float(tech.offset)
    if marginal_cost is None:
        raise ValidationError(f"technology {tech.name!r} needs the marginal cost of {tech.resource!r}")
    return tech.intensity * float(marginal_cost) + tech.offset


def preference_matrix(costs, width: float = DEFAULT_PREFERENCE_WIDTH) -> np.ndarray:
    """A[i, j] = σ((cⱼ - cᵢ)/w) - ½, antisymmetric."""
    c = np.asarray(costs, dtype=float)
    return expit((c[np.newaxis, :] - c[:, np.newaxis]) / width) - 0.5


def step_shares(
    state: ShareState,
    costs,
    dt: float,
    width: float = DEFAULT_PREFERENCE_WIDTH,
) -> ShareState:
    """
    Advance shares by dt with costs held fixed.

    The step is split into substeps small enough that no share changes by more than
    20% of itself, then clipped at zero and renormalised.
    """
    costs = np.asarray(costs, dtype=float)
    if costs.shape != state.shares.shape:
        raise ValidationError(f"expected {state.shares.size} costs, got {costs.size}")
    if not width > 0:
        raise ValidationError(f"preference width must be > 0, got {width}")
    if not dt > 0:
        raise ValidationError(f"time step must be > 0, got {dt}")

    rates = state.turnover * preference_matrix(costs, width)
    shares = state.shares.copy()
    growth = rates @ shares
    if not np.any(growth[shares > 0]):
        return state

    substeps = max(1, math.ceil(np.max(np.abs(growth)) * dt / MAX_RELATIVE_CHANGE))
    h = dt / substeps
    for _ in range(substeps):
        shares = np.clip(shares + h * shares * (rates @ shares), 0.0, None)
        shares /= shares.sum()
    return ShareState(shares=shares, turnover=state.turnover)
