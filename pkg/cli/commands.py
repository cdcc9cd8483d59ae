"""
StockFlow · CLI · Commands
calibrate, run and sensitivity. Each command validates everything before it writes
anything, then fills one output directory.

Exit codes: 0 ok · 1 invalid input · 2 inversion did not converge · 3 file I/O
"""

from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

import pandas as pd

from calibration.rp_ratio import Nu0Estimate, estimate_nu0, mean_of_ratios, read_rp_csv, rp_ratio
from cli import outputs
from depletion.inverse import run_reverse
from depletion.io import series_frame
from depletion.kinetics import DepletionState, initial_state, run_forward
from ensemble.monte_carlo import EnsembleResult, run_ensemble
from ensemble.sensitivity import sensitivity_sweep, summarize
from scenario.builder import Scenario, SensitivitySpec, build_scenario
from scripts.config import config
from scripts.errors import ConvergenceError, DomainError, ValidationError
from scripts.logger import get_logger
from substitution.coupled import CoupledSettings, run_coupled

logger = get_logger("cli.commands")

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_RUNTIME = 2
EXIT_IO = 3


def exit_code_for(error: BaseException) -> int:
    if isinstance(error, (ValidationError, DomainError)):
        return EXIT_INVALID
    if isinstance(error, ConvergenceError):
        return EXIT_RUNTIME
    if isinstance(error, OSError):
        return EXIT_IO
    raise error


# ── calibrate ─────────────────────────────────────────────────────────────────

def cmd_calibrate(
    rp_csv: str | Path,
    out_dir: str | Path,
    window: tuple[int, int] | None = None,
    scope: list[str] | None = None,
    unit_factor: float = 1.0,
) -> Nu0Estimate:
    """Estimate ν₀ from an R/P file and write the per-year ratio series."""
    started = datetime.now(timezone.utc)
    series = read_rp_csv(rp_csv, unit_factor)
    ratios = rp_ratio(series, scope)
    estimate = estimate_nu0(ratios, window)

    out_dir = Path(out_dir)
    frame = series_frame({"rp_ratio": ratios, "mean_of_ratios": mean_of_ratios(series, scope)})
    files = outputs.write_frames(out_dir, {"rp_ratio": frame})
    outputs.write_manifest(
        out_dir, "calibrate", outputs.config_digest(rp_csv), None, started, files,
        nu0_inverse_mean=estimate.inverse_mean,
        nu0_inverse_std=estimate.inverse_std,
        window=list(estimate.window),
        scope=scope,
    )
    print(
        f"ν₀⁻¹ = {estimate.inverse_mean:.2f} ± {estimate.inverse_std:.2f} y "
        f"(ν₀ = {estimate.nu0:.5f}/y) over {estimate.window[0]}-{estimate.window[1]}"
    )
    return estimate


# ── run ───────────────────────────────────────────────────────────────────────

def _initial_states(scenario: Scenario) -> dict[str, DepletionState]:
    return {
        r: initial_state(spec.distribution, spec.nu0, scenario.horizon.start)
        for r, spec in scenario.resources.items()
    }


def _ensembles(scenario: Scenario, threads: int | None) -> dict[str, EnsembleResult]:
    if scenario.ensemble is None:
        return {}
    return {
        r: run_ensemble(spec.endowment, scenario.ensemble, spec.probability, spec.nu0, spec.path,
                        scenario.inversion, threads)
        for r, spec in scenario.resources.items()
    }


def simulate_scenario(scenario: Scenario, threads: int | None = None):
    """
    Run a validated scenario.

    Returns:
        (frames by output name, states to write by resource)
    """
    states = _initial_states(scenario)
    totals = {r: s.initial_total for r, s in states.items()}
    frames: dict[str, pd.DataFrame] = {}
    snapshots: dict[str, list[DepletionState]] = {}

    if scenario.mode == "forward":
        flows = {}
        for r, spec in scenario.resources.items():
            every = scenario.snapshot_every or max(1, len(spec.path))
            run = run_forward(states[r], spec.probability, spec.path, every)
            flows[r] = run.flows
            snapshots[r] = run.states[1:]
        frames["flows"] = series_frame(flows)
        frames["remaining"] = series_frame({r: outputs.remaining_series(totals[r], f) for r, f in flows.items()})

    elif scenario.mode == "reverse":
        prices, delivered, unmet, diverged = {}, {}, {}, {}
        for r, spec in scenario.resources.items():
            result = run_reverse(states[r], spec.probability, spec.path, scenario.inversion)
            prices[r], delivered[r], unmet[r] = result.prices, result.flows_delivered, result.unmet_demand
            diverged[r] = result.diverged
            snapshots[r] = [result.final]
        frames["prices"] = outputs.prices_frame(prices, diverged)
        frames["flows"] = series_frame(delivered)
        frames["unmet"] = series_frame(unmet)
        frames["remaining"] = series_frame({r: outputs.remaining_series(totals[r], f) for r, f in delivered.items()})

    else:
        settings = scenario.substitution or CoupledSettings(inversion=scenario.inversion)
        f = {r: spec.probability for r, spec in scenario.resources.items()}
        result = run_coupled(states, scenario.technologies, scenario.total_demand, scenario.initial_shares,
                             f, settings)
        frames["prices"] = outputs.prices_frame(result.prices, result.diverged)
        frames["flows"] = series_frame(result.delivered)
        frames["unmet"] = series_frame(result.unmet)
        frames["shares"] = series_frame(result.shares)
        frames["service_costs"] = series_frame(result.service_costs)
        frames["remaining"] = series_frame(
            {r: outputs.remaining_series(totals[r], f) for r, f in result.delivered.items()}
        )
        snapshots = {r: [s] for r, s in result.final.items()}

    bands = _ensembles(scenario, threads)
    if bands:
        frames["bands"] = outputs.bands_frame(bands)
    return frames, snapshots


def cmd_run(
    config_path: str | Path,
    out_dir: str | Path | None = None,
    seed: int | None = None,
    threads: int | None = None,
) -> Path:
    """Validate a scenario file, run it and write every output. Returns the output directory."""
    started = datetime.now(timezone.utc)
    scenario = build_scenario(config_path, {"seed": seed} if seed is not None else None)
    out_dir = Path(out_dir or Path(config.OUTPUT_DIR) / scenario.name)

    logger.info(f"▶️ Running {scenario.name!r} ({scenario.mode}) -> {out_dir}")
    frames, snapshots = simulate_scenario(scenario, threads)
    files = outputs.write_frames(out_dir, frames)
    files += outputs.write_states(out_dir, snapshots)
    files.append(outputs.write_plot_data(out_dir, scenario.name, scenario.mode, frames))
    outputs.write_manifest(out_dir, "run", outputs.config_digest(config_path), scenario.seed, started, files,
                           mode=scenario.mode)
    logger.info(f"✅ {scenario.name!r} done, {len(files)} files")
    return out_dir


# ── sensitivity ───────────────────────────────────────────────────────────────

def cmd_sensitivity(
    config_path: str | Path,
    out_dir: str | Path | None = None,
    nu0_inverse: list[float] | None = None,
    resource: str | None = None,
    seed: int | None = None,
) -> pd.DataFrame:
    """
    One run per ν₀ value for one resource of a forward or reverse scenario.

    ν₀⁻¹ values come from `nu0_inverse` or, failing that, the config's `sensitivity`
    block. Writes one CSV per value plus `sensitivity_summary.csv`.

    Raises:
        ValidationError for an empty value list, an unknown resource or a coupled scenario.
    """
    started = datetime.now(timezone.utc)
    scenario = build_scenario(config_path, {"seed": seed} if seed is not None else None)
    if scenario.mode == "coupled":
        raise ValidationError("sensitivity sweeps need a forward or reverse scenario")

    spec = scenario.sensitivity
    if nu0_inverse is not None:
        if not nu0_inverse:
            raise ValidationError("--nu0-inverse needs at least one value")
        bad = [v for v in nu0_inverse if not v > 0]
        if bad:
            raise ValidationError(f"ν₀⁻¹ values must be > 0, got {bad}")
        names = list(scenario.resources)
        default = spec.resource if spec else names[0]
        spec = SensitivitySpec(resource=resource or default, nu0_values=tuple(1.0 / v for v in nu0_inverse))
    elif spec is None:
        raise ValidationError("no ν₀ values: pass --nu0-inverse or add a `sensitivity` block")
    elif resource is not None:
        spec = replace(spec, resource=resource)
    if spec.resource not in scenario.resources:
        raise ValidationError(f"unknown resource {spec.resource!r}, scenario has {list(scenario.resources)}")

    target = scenario.resources[spec.resource]
    out_dir = Path(out_dir or Path(config.OUTPUT_DIR) / f"{scenario.name}_sensitivity")
    logger.info(f"▶️ ν₀ sweep on {spec.resource!r}: ν₀⁻¹ = {[round(1 / v, 6) for v in spec.nu0_values]}")

    runs = sensitivity_sweep(target.distribution, spec.nu0_values, target.probability, target.path,
                             scenario.mode, scenario.inversion)
    quantity = "flows" if scenario.mode == "forward" else "prices"
    frames = {}
    for run in runs:
        key = f"{quantity}_nu0inv_{run.nu0_inverse:g}"
        if scenario.mode == "forward":
            frames[key] = series_frame({spec.resource: run.output})
        else:
            frames[key] = outputs.prices_frame({spec.resource: run.output}, {spec.resource: run.diverged})
    summary = summarize(runs, scenario.mode)

    files = outputs.write_frames(out_dir, frames)
    files.append(outputs.write_series_csv(out_dir / "sensitivity_summary.csv", summary))
    files.append(outputs.write_plot_data(out_dir, scenario.name, scenario.mode, frames))
    outputs.write_manifest(out_dir, "sensitivity", outputs.config_digest(config_path), scenario.seed, started,
                           files, resource=spec.resource, nu0_inverse=[r.nu0_inverse for r in runs])
    print(summary.to_string(index=False))
    return summary
