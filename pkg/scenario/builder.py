"""
StockFlow · Scenario · Builder
Turns a YAML scenario file into a validated, immutable Scenario.

validate() walks the whole config and reports every problem at once, each prefixed
with a locator such as `resources.oil.nu0_inverse`. The validated Scenario carries a
`normalized` config (absolute file paths, resolved ν₀, paths expanded to explicit
values in internal units) that re-validates to the same Scenario.
"""

import copy
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Literal

import numpy as np
import yaml

from calibration.rp_ratio import default_nu0, estimate_nu0, read_rp_csv, rp_ratio
from depletion.distribution import (
    CostDistribution,
    UncertainEndowment,
    from_bins,
    humped_distribution,
    sample_endowment,
)
from depletion.inverse import InversionSettings, price_for_flow
from depletion.io import read_endowment_csv
from depletion.kinetics import ExtractionProbability, TimeSeries, initial_state
from ensemble.monte_carlo import EnsembleSpec, beta_fraction, fixed_fraction, uniform_fraction
from scenario.paths import (
    FLOW_UNITS,
    Horizon,
    PRICE_UNITS,
    convert_flow,
    convert_price,
    explicit_path,
    fixed_share_demand,
    linear_path,
    piecewise_path,
    read_path_csv,
)
from scripts.config import config
from scripts.errors import StockFlowError, ValidationError
from scripts.logger import get_logger
from substitution.coupled import CoupledSettings
from substitution.shares import DEFAULT_PREFERENCE_WIDTH, DEFAULT_TURNOVER, Technology

logger = get_logger("scenario.builder")

Mode = Literal["forward", "reverse", "coupled"]
MODES = ("forward", "reverse", "coupled")
PATH_FORMS = ("linear", "piecewise", "values", "csv", "start_flow")
DEFAULT_FRACTION = 0.5


# ── Types ─────────────────────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class ResourceSpec:
    name: str
    endowment: UncertainEndowment
    fraction: float                  # endowment used by single deterministic runs
    nu0: float
    nu0_source: str
    probability: ExtractionProbability
    path: TimeSeries | None = None   # price (forward) or demand (reverse)

    @property
    def distribution(self) -> CostDistribution:
        return sample_endowment(self.endowment, self.fraction)


@dataclass(frozen=True)
class SensitivitySpec:
    resource: str
    nu0_values: tuple[float, ...]


@dataclass(frozen=True, eq=False)
class Scenario:
    name: str
    mode: Mode
    horizon: Horizon
    resources: dict[str, ResourceSpec]
    inversion: InversionSettings
    seed: int
    snapshot_every: int | None = None   # None: final state only
    ensemble: EnsembleSpec | None = None
    sensitivity: SensitivitySpec | None = None
    technologies: list[Technology] = field(default_factory=list)
    initial_shares: dict[str, float] = field(default_factory=dict)
    total_demand: TimeSeries | None = None
    substitution: CoupledSettings | None = None
    normalized: dict = field(default_factory=dict)


class _Problems:
    """Collects located error messages instead of stopping at the first."""

    def __init__(self):
        self.items: list[str] = []

    def add(self, where: str, message: str):
        self.items.append(f"{where}: {message}")

    def attempt(self, where: str, fn: Callable, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ValidationError as e:
            for message in e.errors:
                self.add(where, message)
        except (StockFlowError, OSError, ValueError, TypeError) as e:
            self.add(where, str(e))
        return None


# ── Loading ───────────────────────────────────────────────────────────────────

def load_config(path: str | Path) -> dict:
    """
    Read a YAML scenario file.

    Raises:
        OSError if the file cannot be read.
        ValidationError if it is not valid YAML or not a mapping.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ValidationError(f"{path.name}: not valid YAML ({e})") from e
    if not isinstance(raw, dict):
        raise ValidationError(f"{path.name}: top level must be a mapping")
    return raw


def build_scenario(path: str | Path, overrides: dict | None = None) -> Scenario:
    """load_config + validate, with relative paths resolved against the file's folder."""
    raw = load_config(path)
    raw.update(overrides or {})
    return validate(raw, base_dir=Path(path).resolve().parent)


# ── Field Helpers ─────────────────────────────────────────────────────────────

def _number(node: dict, key: str, where: str, problems: _Problems, default=None,
            positive: bool = False, minimum: float | None = None):
    if key not in node or node[key] is None:
        if default is None:
            problems.add(f"{where}.{key}", "is required")
        return default
    value = node[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not np.isfinite(value):
        problems.add(f"{where}.{key}", f"must be a number, got {value!r}")
        return default
    if positive and not value > 0:
        problems.add(f"{where}.{key}", f"must be > 0, got {value}")
        return default
    if minimum is not None and value < minimum:
        problems.add(f"{where}.{key}", f"must be >= {minimum}, got {value}")
        return default
    return float(value)


def _mapping(node: Any, where: str, problems: _Problems) -> dict | None:
    if not isinstance(node, dict):
        problems.add(where, f"must be a mapping, got {type(node).__name__}")
        return None
    return node


def _resolve(base_dir: Path, name: str) -> Path:
    path = Path(name)
    return path if path.is_absolute() else (base_dir / path).resolve()


# ── Sections ──────────────────────────────────────────────────────────────────

def _horizon(raw: dict, problems: _Problems) -> Horizon | None:
    node = _mapping(raw.get("horizon"), "horizon", problems)
    if node is None:
        return None
    start = _number(node, "start", "horizon", problems)
    end = _number(node, "end", "horizon", problems)
    dt = _number(node, "dt", "horizon", problems, default=1.0, positive=True)
    if start is None or end is None:
        return None
    return problems.attempt("horizon", Horizon, start, end, dt)


def _inversion(raw: dict, problems: _Problems) -> InversionSettings:
    node = raw.get("inversion") or {}
    if _mapping(node, "inversion", problems) is None:
        return InversionSettings()
    p_max = node.get("p_max")
    settings = problems.attempt(
        "inversion",
        InversionSettings,
        tolerance=_number(node, "tolerance", "inversion", problems, default=1e-6, positive=True),
        p_max=None if p_max is None else _number(node, "p_max", "inversion", problems, default=None, positive=True),
        max_iterations=int(_number(node, "max_iterations", "inversion", problems, default=200, minimum=1)),
    )
    return settings or InversionSettings()


def _endowment(node: Any, where: str, base_dir: Path, problems: _Problems):
    """Returns (endowment, normalized node)."""
    node = _mapping(node, where, problems)
    if node is None:
        return None, None
    forms = [k for k in ("csv", "uniform", "humps") if k in node]
    if len(forms) != 1:
        problems.add(where, f"give exactly one of csv, uniform, humps (got {forms or 'none'})")
        return None, None
    form = forms[0]

    if form == "csv":
        path = _resolve(base_dir, str(node["csv"]))
        if not path.exists():
            problems.add(f"{where}.csv", f"file not found: {path}")
            return None, None
        return problems.attempt(f"{where}.csv", read_endowment_csv, path), {"csv": str(path)}

    spec = _mapping(node[form], f"{where}.{form}", problems)
    if spec is None:
        return None, None
    loc = f"{where}.{form}"
    low = _number(spec, "low", loc, problems)
    high = _number(spec, "high", loc, problems)
    bins = _number(spec, "bins", loc, problems, positive=True)
    if None in (low, high, bins):
        return None, None
    edges = np.linspace(low, high, int(bins) + 1)

    if form == "uniform":
        d_low = _number(spec, "density_low" if "density_low" in spec else "density", loc, problems, minimum=0.0)
        d_high = _number(spec, "density_high", loc, problems, minimum=0.0) if "density_high" in spec else d_low
        if d_low is None:
            return None, None
        endowment = problems.attempt(
            loc, lambda: UncertainEndowment(
                low=from_bins(edges, np.full(edges.size - 1, d_low)),
                high=from_bins(edges, np.full(edges.size - 1, d_high)),
            )
        )
    else:
        humps_low = spec.get("low_humps")
        humps_high = spec.get("high_humps", humps_low)
        if not isinstance(humps_low, list) or not humps_low:
            problems.add(f"{loc}.low_humps", "must be a list of [center, spread, quantity]")
            return None, None
        endowment = problems.attempt(
            loc, lambda: UncertainEndowment(
                low=humped_distribution(edges, [tuple(h) for h in humps_low]),
                high=humped_distribution(edges, [tuple(h) for h in humps_high]),
            )
        )
    return endowment, {form: copy.deepcopy(spec)}


def _nu0(node: dict, name: str, where: str, base_dir: Path, problems: _Problems):
    """Returns (ν₀, source description)."""
    given = [k for k in ("nu0", "nu0_inverse", "calibration") if k in node]
    if len(given) != 1:
        problems.add(where, f"give exactly one of nu0, nu0_inverse, calibration (got {given or 'none'})")
        return None, None
    key = given[0]
    if key == "nu0":
        value = _number(node, "nu0", where, problems, positive=True)
        return value, "nu0"
    if key == "nu0_inverse":
        value = _number(node, "nu0_inverse", where, problems, positive=True)
        return (None if value is None else 1.0 / value), "nu0_inverse"

    calibration = node["calibration"]
    loc = f"{where}.calibration"
    if calibration == "default" or (isinstance(calibration, dict) and "table" in calibration):
        table_key = name if calibration == "default" else str(calibration["table"])
        estimate = problems.attempt(loc, default_nu0, table_key)
        return (None if estimate is None else estimate.nu0), f"default table ({table_key})"
    spec = _mapping(calibration, loc, problems)
    if spec is None or "csv" not in spec:
        problems.add(loc, "must be `default`, {table: NAME} or {csv: PATH, window, scope}")
        return None, None
    path = _resolve(base_dir, str(spec["csv"]))
    window = spec.get("window")
    if window is not None and (not isinstance(window, list) or len(window) != 2):
        problems.add(f"{loc}.window", f"must be [first_year, last_year], got {window!r}")
        return None, None
    scope = spec.get("scope")
    unit_factor = _number(spec, "unit_factor", loc, problems, default=1.0, positive=True)

    def calibrate():
        ratios = rp_ratio(read_rp_csv(path, unit_factor), scope)
        return estimate_nu0(ratios, tuple(int(y) for y in window) if window else None)

    estimate = problems.attempt(loc, calibrate)
    return (None if estimate is None else estimate.nu0), f"calibration ({path.name})"


def _probability(node: Any, where: str, problems: _Problems) -> ExtractionProbability | None:
    if node is None:
        return ExtractionProbability()
    node = _mapping(node, where, problems)
    if node is None:
        return None
    if "cost_width" in node or "price_width" in node:
        cost = _number(node, "cost_width", where, problems, minimum=0.0)
        price = _number(node, "price_width", where, problems, minimum=0.0)
        if cost is None or price is None:
            return None
        return problems.attempt(where, ExtractionProbability.from_uncertainties, cost, price)
    return problems.attempt(
        where, ExtractionProbability,
        kind=node.get("kind", "logistic"),
        width=_number(node, "width", where, problems, default=0.5),
    )


def _path(node: Any, where: str, horizon: Horizon, kind: str, problems: _Problems, base_dir: Path,
          solve_start: Callable[[float], float] | None = None) -> TimeSeries | None:
    """Price (kind='price') or flow (kind='flow') path in internal units."""
    node = _mapping(node, where, problems)
    if node is None:
        return None
    units = PRICE_UNITS if kind == "price" else FLOW_UNITS
    unit = node.get("unit", next(iter(units)))
    if unit not in units:
        problems.add(f"{where}.unit", f"unknown unit {unit!r}, expected one of {sorted(units)}")
        return None
    forms = [k for k in PATH_FORMS if k in node]
    if len(forms) != 1:
        problems.add(where, f"give exactly one of {', '.join(PATH_FORMS)} (got {forms or 'none'})")
        return None
    form = forms[0]
    convert = convert_price if kind == "price" else convert_flow

    if form == "start_flow":
        if solve_start is None:
            problems.add(f"{where}.start_flow", "only price paths can start from a flow")
            return None
        flow = _number(node, "start_flow", where, problems, minimum=0.0)
        slope = _number(node, "slope", where, problems, default=0.0)
        flow_unit = node.get("flow_unit", "EJ/y")
        if flow is None or flow_unit not in FLOW_UNITS:
            if flow_unit not in FLOW_UNITS:
                problems.add(f"{where}.flow_unit", f"unknown unit {flow_unit!r}")
            return None
        start = problems.attempt(f"{where}.start_flow", solve_start, flow * FLOW_UNITS[flow_unit])
        if start is None:
            return None
        logger.info(f"  {where}: {flow:g} {flow_unit} is supplied at {start:.4g} $/GJ")
        return linear_path(start, slope * units[unit], horizon)

    if form == "linear":
        spec = _mapping(node["linear"], f"{where}.linear", problems)
        if spec is None:
            return None
        start = _number(spec, "start", f"{where}.linear", problems)
        slope = _number(spec, "slope", f"{where}.linear", problems, default=0.0)
        if start is None:
            return None
        ts = linear_path(start, slope, horizon)
    elif form == "piecewise":
        ts = problems.attempt(f"{where}.piecewise", piecewise_path, node["piecewise"], horizon)
    elif form == "values":
        ts = problems.attempt(f"{where}.values", explicit_path, node["values"], horizon)
    else:
        spec = node["csv"] if isinstance(node["csv"], dict) else {"path": node["csv"]}
        if "path" not in spec:
            problems.add(f"{where}.csv", "needs a path")
            return None
        ts = problems.attempt(f"{where}.csv", read_path_csv, _resolve(base_dir, str(spec["path"])),
                              horizon, spec.get("column"))
    return None if ts is None else convert(ts, unit)


def _explicit(ts: TimeSeries, unit: str) -> dict:
    return {"values": ts.values.tolist(), "unit": unit}


def _resource(name: str, node: Any, mode: str, horizon: Horizon | None, inversion: InversionSettings,
              base_dir: Path, problems: _Problems, norm: dict) -> ResourceSpec | None:
    where = f"resources.{name}"
    node = _mapping(node, where, problems)
    if node is None:
        return None
    endowment, endowment_norm = _endowment(node.get("endowment"), f"{where}.endowment", base_dir, problems)
    fraction = _number(node, "endowment_fraction", where, problems, default=DEFAULT_FRACTION, minimum=0.0)
    if fraction is not None and fraction > 1:
        problems.add(f"{where}.endowment_fraction", f"must be <= 1, got {fraction}")
        fraction = None
    nu0, source = _nu0(node, name, where, base_dir, problems)
    f = _probability(node.get("probability"), f"{where}.probability", problems)

    wanted = {"forward": "price", "reverse": "demand"}.get(mode)
    for key in ("price", "demand"):
        if key in node and key != wanted:
            problems.add(f"{where}.{key}", f"not used in {mode} mode")

    path = None
    if wanted and wanted in node and horizon is not None:
        solve_start = None
        if wanted == "price" and None not in (endowment, fraction, nu0, f):
            def solve_start(flow: float) -> float:
                state = initial_state(sample_endowment(endowment, fraction), nu0, horizon.start)
                return price_for_flow(state, f, flow, inversion)
        kind = "price" if wanted == "price" else "flow"
        path = _path(node[wanted], f"{where}.{wanted}", horizon, kind, problems, base_dir, solve_start)

    if None in (endowment, fraction, nu0, f):
        return None
    norm[name] = {
        "endowment": endowment_norm,
        "endowment_fraction": fraction,
        "nu0": nu0,
        "probability": {"kind": f.kind, "width": f.width},
    }
    if path is not None:
        norm[name][wanted] = _explicit(path, "$/GJ" if wanted == "price" else "EJ/y")
    return ResourceSpec(name=name, endowment=endowment, fraction=fraction, nu0=nu0, nu0_source=source,
                        probability=f, path=path)


def _ensemble(raw: dict, mode: str, seed: int, problems: _Problems):
    node = raw.get("ensemble")
    if node is None:
        return None, None
    node = _mapping(node, "ensemble", problems)
    if node is None:
        return None, None
    if mode == "coupled":
        problems.add("ensemble", "not available in coupled mode")
        return None, None
    runs = int(_number(node, "runs", "ensemble", problems, default=config.ENSEMBLE_RUNS, minimum=1))
    percentiles = node.get("percentiles", [0.02, 0.50, 0.98])
    if not isinstance(percentiles, list) or not all(isinstance(q, (int, float)) for q in percentiles):
        problems.add("ensemble.percentiles", f"must be a list of numbers, got {percentiles!r}")
        return None, None
    sampler_node = node.get("sampler", "uniform")
    sampler = None
    if sampler_node == "uniform":
        sampler = uniform_fraction
    elif isinstance(sampler_node, dict) and "fixed" in sampler_node:
        sampler = problems.attempt("ensemble.sampler", lambda: fixed_fraction(float(sampler_node["fixed"])))
    elif isinstance(sampler_node, dict) and "beta" in sampler_node and len(sampler_node["beta"]) == 2:
        sampler = problems.attempt("ensemble.sampler", lambda: beta_fraction(*(float(v) for v in sampler_node["beta"])))
    else:
        problems.add("ensemble.sampler", f"must be uniform, {{fixed: x}} or {{beta: [a, b]}}, got {sampler_node!r}")
    if sampler is None:
        return None, None
    spec = problems.attempt(
        "ensemble", EnsembleSpec,
        runs=runs, seed=seed, mode=mode, percentiles=tuple(float(q) for q in percentiles), sampler=sampler,
    )
    norm = {"runs": runs, "percentiles": [float(q) for q in percentiles], "sampler": copy.deepcopy(sampler_node)}
    return spec, norm


def _sensitivity(raw: dict, resources: dict, problems: _Problems):
    node = raw.get("sensitivity")
    if node is None:
        return None, None
    node = _mapping(node, "sensitivity", problems)
    if node is None:
        return None, None
    names = list(resources)
    resource = node.get("resource", names[0] if len(names) == 1 else None)
    if resource is None:
        problems.add("sensitivity.resource", f"name one of {names}")
        return None, None
    if resource not in resources:
        problems.add("sensitivity.resource", f"unknown resource {resource!r}")
    given = [k for k in ("nu0", "nu0_inverse") if k in node]
    if len(given) != 1 or not isinstance(node[given[0]], list) or not node[given[0]]:
        problems.add("sensitivity", "give a non-empty list under exactly one of nu0, nu0_inverse")
        return None, None
    values = []
    for i, v in enumerate(node[given[0]]):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
            problems.add(f"sensitivity.{given[0]}[{i}]", f"must be > 0, got {v!r}")
            continue
        values.append(float(v) if given[0] == "nu0" else 1.0 / float(v))
    if len(values) != len(node[given[0]]):
        return None, None
    return SensitivitySpec(resource=str(resource), nu0_values=tuple(values)), \
        {"resource": str(resource), "nu0": values}


def _coupled(raw: dict, horizon: Horizon | None, resources: dict, base_dir: Path, problems: _Problems,
             norm: dict):
    technologies, shares = [], {}
    nodes = raw.get("technologies")
    if not isinstance(nodes, list) or not nodes:
        problems.add("technologies", "coupled mode needs a non-empty list of technologies")
    else:
        norm_techs = []
        for i, node in enumerate(nodes):
            where = f"technologies[{i}]"
            if _mapping(node, where, problems) is None:
                continue
            resource = node.get("resource")
            if resource is not None and resource not in resources:
                problems.add(f"{where}.resource", f"unknown resource {resource!r}")
            share = _number(node, "share", where, problems, minimum=0.0)
            tech = problems.attempt(
                where, Technology,
                name=str(node.get("name", "")),
                resource=resource,
                intensity=_number(node, "intensity", where, problems, default=1.0),
                offset=_number(node, "offset", where, problems, default=0.0),
            )
            if tech is None or share is None:
                continue
            if tech.name in shares:
                problems.add(f"{where}.name", f"duplicate technology {tech.name!r}")
                continue
            technologies.append(tech)
            shares[tech.name] = share
            norm_techs.append({"name": tech.name, "resource": tech.resource, "intensity": tech.intensity,
                               "offset": tech.offset, "share": share})
        if shares and abs(sum(shares.values()) - 1.0) > 1e-12:
            problems.add("technologies", f"shares sum to {sum(shares.values()):.15g}, expected 1")
        norm["technologies"] = norm_techs

    demand = None
    if "demand" not in raw:
        problems.add("demand", "coupled mode needs a total demand path")
    elif horizon is not None:
        demand = _path(raw["demand"], "demand", horizon, "flow", problems, base_dir)
        if demand is not None:
            norm["demand"] = _explicit(demand, "EJ/y")

    node = raw.get("substitution") or {}
    settings = None
    if _mapping(node, "substitution", problems) is not None:
        turnover = _number(node, "turnover", "substitution", problems, default=DEFAULT_TURNOVER, minimum=0.0)
        width = _number(node, "width", "substitution", problems, default=DEFAULT_PREFERENCE_WIDTH, positive=True)
        settings = CoupledSettings(turnover=turnover, width=width)
        norm["substitution"] = {"turnover": turnover, "width": width}
    return technologies, shares, demand, settings


def _fixed_shares(raw: dict, horizon: Horizon | None, resources: dict, base_dir: Path, problems: _Problems):
    """Per-resource demand split from a total; returns {} when absent."""
    node = raw.get("fixed_shares")
    if node is None:
        return {}
    node = _mapping(node, "fixed_shares", problems)
    if node is None or horizon is None:
        return {}
    shares = _mapping(node.get("shares"), "fixed_shares.shares", problems)
    total = _path(node.get("total"), "fixed_shares.total", horizon, "flow", problems, base_dir)
    if shares is None or total is None:
        return {}
    unknown = sorted(set(shares) - set(resources))
    if unknown:
        problems.add("fixed_shares.shares", f"unknown resources {unknown}")
        return {}
    return problems.attempt("fixed_shares.shares", fixed_share_demand, total,
                            {k: float(v) for k, v in shares.items()}) or {}


# ── Validation ────────────────────────────────────────────────────────────────

def validate(raw: dict, base_dir: str | Path = ".") -> Scenario:
    """
    Check a parsed config and build the Scenario.

    Raises:
        ValidationError carrying every problem found, each with its locator.
    """
    base_dir = Path(base_dir)
    problems = _Problems()

    mode = raw.get("mode")
    if mode not in MODES:
        problems.add("mode", f"must be one of {MODES}, got {mode!r}")
    seed = raw.get("seed", config.SEED)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        problems.add("seed", f"must be a non-negative integer, got {seed!r}")
        seed = 0
    name = str(raw.get("name", "scenario"))
    horizon = _horizon(raw, problems)
    inversion = _inversion(raw, problems)
    output = _mapping(raw.get("output") or {}, "output", problems) or {}
    snapshot_every = None
    if output.get("snapshot_every") is not None:
        snapshot_every = int(_number(output, "snapshot_every", "output", problems, default=1, minimum=1))

    resources: dict[str, ResourceSpec] = {}
    norm_resources: dict[str, dict] = {}
    nodes = raw.get("resources")
    if not isinstance(nodes, dict) or not nodes:
        problems.add("resources", "at least one resource is required")
        nodes = {}
    for key, node in nodes.items():
        spec = _resource(str(key), node, mode, horizon, inversion, base_dir, problems, norm_resources)
        if spec is not None:
            resources[str(key)] = spec

    norm: dict = {
        "name": name,
        "mode": mode,
        "seed": seed,
        "horizon": None if horizon is None else {"start": horizon.start, "end": horizon.end, "dt": horizon.dt},
        "inversion": {"tolerance": inversion.tolerance, "p_max": inversion.p_max,
                      "max_iterations": inversion.max_iterations},
        "output": {"snapshot_every": snapshot_every},
        "resources": norm_resources,
    }

    if mode == "reverse":
        split = _fixed_shares(raw, horizon, nodes, base_dir, problems)
        for key, demand in split.items():
            if key in resources and resources[key].path is not None:
                problems.add(f"resources.{key}.demand", "given both here and through fixed_shares")
            elif key in resources:
                resources[key] = _with_path(resources[key], demand)
                norm_resources[key]["demand"] = _explicit(demand, "EJ/y")
    elif "fixed_shares" in raw:
        problems.add("fixed_shares", f"not used in {mode} mode")

    if mode in ("forward", "reverse"):
        wanted = "price" if mode == "forward" else "demand"
        for key in nodes:
            if str(key) in resources and resources[str(key)].path is None:
                problems.add(f"resources.{key}.{wanted}", f"{mode} mode needs a {wanted} path")
        for key in ("technologies", "demand", "substitution"):
            if key in raw:
                problems.add(key, f"not used in {mode} mode")

    technologies, shares, total_demand, substitution = [], {}, None, None
    if mode == "coupled":
        technologies, shares, total_demand, substitution = _coupled(raw, horizon, nodes, base_dir, problems, norm)
        if substitution is not None:
            substitution = CoupledSettings(substitution.turnover, substitution.width, inversion)

    ensemble, norm_ensemble = _ensemble(raw, mode, seed, problems) if mode in MODES else (None, None)
    if norm_ensemble is not None:
        norm["ensemble"] = norm_ensemble
    sensitivity, norm_sensitivity = _sensitivity(raw, nodes, problems) if nodes else (None, None)
    if norm_sensitivity is not None:
        norm["sensitivity"] = norm_sensitivity
        if mode == "coupled":
            problems.add("sensitivity", "not available in coupled mode")

    if problems.items:
        raise ValidationError(problems.items)

    logger.info(
        f"✅ Scenario {name!r} valid: {mode}, {horizon.n_steps} steps of {horizon.dt:g} y, "
        f"resources {list(resources)}"
    )
    return Scenario(
        name=name,
        mode=mode,
        horizon=horizon,
        resources=resources,
        inversion=inversion,
        seed=seed,
        snapshot_every=snapshot_every,
        ensemble=ensemble,
        sensitivity=sensitivity,
        technologies=technologies,
        initial_shares=shares,
        total_demand=total_demand,
        substitution=substitution,
        normalized=norm,
    )


def _with_path(spec: ResourceSpec, path: TimeSeries) -> ResourceSpec:
    return ResourceSpec(spec.name, spec.endowment, spec.fraction, spec.nu0, spec.nu0_source,
                        spec.probability, path)
