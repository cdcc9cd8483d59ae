"""
StockFlow · Depletion · Cost Distributions
Cost-binned resource endowments n(C), cost-supply curves N(C) and their inverse C(N),
and the low/high uncertainty family sampled by the Monte Carlo ensemble.

Units: energy in EJ, cost in $/GJ, density in EJ per $/GJ.
Densities are piecewise constant on a user-supplied grid, so every integral is exact.
"""

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from scripts.errors import DomainError, ValidationError


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


# ── Types ─────────────────────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class CostGrid:
    """Contiguous cost bins [edges[i], edges[i+1]) in $/GJ."""

    edges: np.ndarray

    def __post_init__(self):
        edges = _frozen(self.edges)
        if edges.ndim != 1 or edges.size < 2:
            raise ValidationError("cost grid needs at least 2 edges")
        bad = np.flatnonzero(~np.isfinite(edges) | (edges < 0))
        if bad.size:
            raise ValidationError(f"cost edge {bad[0]} is negative or not finite ({edges[bad[0]]})")
        steps = np.flatnonzero(np.diff(edges) <= 0)
        if steps.size:
            i = steps[0] + 1
            raise ValidationError(f"cost edges not strictly increasing at index {i} ({edges[i - 1]} -> {edges[i]})")
        object.__setattr__(self, "edges", edges)

    @property
    def n_bins(self) -> int:
        return self.edges.size - 1

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    def same_as(self, other: "CostGrid") -> bool:
        return self is other or np.array_equal(self.edges, other.edges)


@dataclass(frozen=True, eq=False)
class CostDistribution:
    """Remaining (or initial) resource density per cost bin."""

    grid: CostGrid
    density: np.ndarray

    def __post_init__(self):
        density = _frozen(self.density)
        if density.shape != (self.grid.n_bins,):
            raise ValidationError(
                f"density length {density.size} does not match {self.grid.n_bins} bins"
            )
        bad = np.flatnonzero(~np.isfinite(density) | (density < 0))
        if bad.size:
            raise ValidationError(f"density at bin {bad[0]} is negative or not finite ({density[bad[0]]})")
        object.__setattr__(self, "density", density)

    @property
    def quantities(self) -> np.ndarray:
        """Energy held in each bin (EJ)."""
        return self.density * self.grid.widths


@dataclass(frozen=True, eq=False)
class UncertainEndowment:
    """Bounding low/high estimates of an endowment on a shared grid."""

    low: CostDistribution
    high: CostDistribution

    def __post_init__(self):
        if not self.low.grid.same_as(self.high.grid):
            raise ValidationError("low and high endowments must share the same cost grid")
        above = np.flatnonzero(self.low.density > self.high.density)
        if above.size:
            raise ValidationError(f"low density exceeds high density at bin {above[0]}")

    @property
    def grid(self) -> CostGrid:
        return self.low.grid

    @classmethod
    def certain(cls, distribution: CostDistribution) -> "UncertainEndowment":
        return cls(low=distribution, high=distribution)


@dataclass(frozen=True, eq=False)
class CostSupplyCurve:
    """Cumulative quantity N at each cost edge; read backwards it gives C(N)."""

    quantities: np.ndarray
    costs: np.ndarray


# ── Construction ──────────────────────────────────────────────────────────────

def from_bins(edges, densities) -> CostDistribution:
    """
    Build a validated distribution from bin edges ($/GJ) and per-bin densities.

    Raises:
        ValidationError naming the offending index.
    """
    densities = np.asarray(densities, dtype=float)
    grid = CostGrid(np.asarray(edges, dtype=float))
    if densities.ndim != 1 or densities.size != grid.n_bins:
        raise ValidationError(
            f"expected {grid.n_bins} densities for {grid.n_bins + 1} edges, got {densities.size}"
        )
    return CostDistribution(grid=grid, density=densities)


def humped_distribution(edges, humps: list[tuple[float, float, float]]) -> CostDistribution:
    """
    Sum of Gaussian humps, each given as (center, spread, quantity).

    Every hump is integrated exactly over every bin, so a hump lying well inside the
    grid contributes its full quantity to total_quantity.
    """
    grid = CostGrid(np.asarray(edges, dtype=float))
    mass = np.zeros(grid.n_bins)
    for center, spread, quantity in humps:
        if spread <= 0 or quantity < 0:
            raise ValidationError(f"hump ({center}, {spread}, {quantity}) needs spread > 0 and quantity >= 0")
        cdf = norm.cdf(grid.edges, loc=center, scale=spread)
        mass += quantity * np.diff(cdf)
    return CostDistribution(grid=grid, density=mass / grid.widths)


def scaled(d: CostDistribution, factor: float) -> CostDistribution:
    if factor < 0 or not np.isfinite(factor):
        raise DomainError(f"scale factor must be finite and >= 0, got {factor}")
    return CostDistribution(grid=d.grid, density=d.density * factor)


# ── Integrals ─────────────────────────────────────────────────────────────────

def _cumulative(d: CostDistribution) -> np.ndarray:
    return np.concatenate(([0.0], np.cumsum(d.quantities)))


def total_quantity(d: CostDistribution) -> float:
    """Total energy in the distribution (EJ)."""
    return float(_cumulative(d)[-1])


def cumulative_below(d: CostDistribution, c: float) -> float:
    """N(C): energy available at costs up to c, linear inside a partially covered bin."""
    return float(np.interp(c, d.grid.edges, _cumulative(d)))


def marginal_cost_at(d: CostDistribution, q: float) -> float:
    """
    C(N): cost of the marginal unit once q EJ have been taken in cost order.

    Raises:
        DomainError if q lies outside [0, total_quantity].
    """
    cum = _cumulative(d)
    if not (0.0 <= q <= cum[-1]):
        raise DomainError(f"quantity {q} outside [0, {cum[-1]}]")
    edges = d.grid.edges
    i = int(np.searchsorted(cum, q, side="left"))
    if i == 0:
        return float(edges[0])
    lo = i - 1
    frac = (q - cum[lo]) / (cum[i] - cum[lo])
    return float(edges[lo] + frac * (edges[i] - edges[lo]))


def cost_supply_curve(d: CostDistribution) -> CostSupplyCurve:
    return CostSupplyCurve(quantities=_frozen(_cumulative(d)), costs=d.grid.edges)


# ── Uncertainty Family ────────────────────────────────────────────────────────

def sample_endowment(u: UncertainEndowment, x: float) -> CostDistribution:
    """
    Member of the low/high family at interpolation fraction x.

    x=0 returns the low densities and x=1 the high densities bit for bit.
    """
    if not (0.0 <= x <= 1.0):
        raise DomainError(f"interpolation fraction {x} outside [0, 1]")
    density = (1.0 - x) * u.low.density + x * u.high.density
    return CostDistribution(grid=u.grid, density=density)
