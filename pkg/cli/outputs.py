"""
StockFlow · CLI · Output Files
Result CSVs (`year` first, then one column per resource per quantity), the
plot_data.json sidecar and the run manifest.

Every series CSV reads back through depletion.io.read_series_csv and every
endowment snapshot through depletion.io.read_endowment_csv.
"""

import hashlib
import json
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import pandas as pd

from depletion.io import series_frame, write_endowment_csv, write_series_csv
from depletion.kinetics import DepletionState, TimeSeries
from ensemble.monte_carlo import EnsembleResult, percentile_label
from scripts.logger import get_logger

logger = get_logger("cli.outputs")

VERSION = "1.0.0"


# ── Frames ────────────────────────────────────────────────────────────────────

def remaining_series(initial_total: float, flows: TimeSeries) -> TimeSeries:
    """Energy left at the start of each step, from the flows delivered before it."""
    taken_before = np.concatenate(([0.0], np.cumsum(flows.values * flows.dt)[:-1]))
    return TimeSeries(flows.t0, flows.dt, initial_total - taken_before)


def prices_frame(prices: dict[str, TimeSeries], diverged: dict[str, np.ndarray]) -> pd.DataFrame:
    """Prices per resource plus `diverged`, set where any resource diverged."""
    frame = series_frame(prices)
    flags = np.zeros(len(frame), dtype=bool)
    for r, d in diverged.items():
        flags |= d
    frame["diverged"] = flags
    return frame


def bands_frame(results: dict[str, EnsembleResult]) -> pd.DataFrame:
    columns: dict[str, TimeSeries] = {}
    for r, result in results.items():
        for q, band in result.bands.items():
            columns[f"{r}_{percentile_label(q)}"] = band
        columns[f"{r}_low"] = result.low
        columns[f"{r}_high"] = result.high
        if result.divergence_fraction is not None:
            columns[f"{r}_diverged_fraction"] = TimeSeries(result.low.t0, result.low.dt, result.divergence_fraction)
    return series_frame(columns)


# ── Writers ───────────────────────────────────────────────────────────────────

def write_frames(out_dir: Path, frames: dict[str, pd.DataFrame]) -> list[Path]:
    return [write_series_csv(out_dir / f"{name}.csv", frame) for name, frame in frames.items()]


def write_states(out_dir: Path, states: dict[str, list[DepletionState]]) -> list[Path]:
    """Remaining densities as endowment files, e.g. `state_oil_2100.csv`."""
    paths = []
    for r, snapshots in states.items():
        for s in snapshots:
            paths.append(write_endowment_csv(out_dir / f"state_{r}_{s.time:g}.csv", s.remaining))
    return paths


def write_plot_data(out_dir: Path, name: str, mode: str, frames: dict[str, pd.DataFrame]) -> Path:
    """Column-oriented copy of every result frame for external plotting."""
    payload = {
        "scenario": name,
        "mode": mode,
        "series": {
            key: {col: frame[col].astype(float).tolist() for col in frame.columns}
            for key, frame in frames.items()
        },
    }
    path = out_dir / "plot_data.json"
    path.write_text(json.dumps(payload, indent=1), encoding="utf-8")
    logger.info(f"  Wrote {path}")
    return path


def config_digest(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(out_dir: Path, command: str, digest: str | None, seed: int | None,
                   started: datetime, files: list[Path], **extra) -> Path:
    finished = datetime.now(timezone.utc)
    manifest = {
        "command": command,
        "version": VERSION,
        "config_sha256": digest,
        "seed": seed,
        "started": started.isoformat(),
        "finished": finished.isoformat(),
        "elapsed_seconds": round((finished - started).total_seconds(), 3),
        "files": sorted(p.name for p in files),
        **extra,
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True), encoding="utf-8")
    return path
