"""
StockFlow · Shared Configuration
Loads environment variables and exposes typed runtime settings across all modules.
Scenario-specific settings live in YAML files (see scenario/builder.py).
"""

import logging
import os
from dotenv import load_dotenv

load_dotenv()


def _int_env(name: str, default: int) -> int:
    raw = os.getenv(name, "")
    try:
        return int(raw) if raw else default
    except ValueError:
        return default


class Config:
    # ── Logging ───────────────────────────────────────────────────────────────
    LOG_LEVEL: str = os.getenv("STOCKFLOW_LOG_LEVEL", "INFO").upper()

    # ── Outputs ───────────────────────────────────────────────────────────────
    OUTPUT_DIR: str = os.getenv("STOCKFLOW_OUTPUT_DIR", "./outputs")

    # ── Ensemble ──────────────────────────────────────────────────────────────
    SEED: int = _int_env("STOCKFLOW_SEED", 0)
    THREADS: int = _int_env("STOCKFLOW_THREADS", os.cpu_count() or 1)
    ENSEMBLE_RUNS: int = _int_env("STOCKFLOW_ENSEMBLE_RUNS", 500)

    @classmethod
    def validate(cls) -> list[str]:
        """Returns list of problems with the runtime settings."""
        problems = []
        if not isinstance(logging.getLevelName(cls.LOG_LEVEL), int):
            problems.append(f"STOCKFLOW_LOG_LEVEL={cls.LOG_LEVEL!r} is not a logging level")
        for name in ("STOCKFLOW_SEED", "STOCKFLOW_THREADS", "STOCKFLOW_ENSEMBLE_RUNS"):
            raw = os.getenv(name, "")
            if raw and not raw.lstrip("-").isdigit():
                problems.append(f"{name}={raw!r} is not an integer, default used")
        if cls.THREADS < 1:
            problems.append("STOCKFLOW_THREADS must be >= 1")
        if cls.ENSEMBLE_RUNS < 1:
            problems.append("STOCKFLOW_ENSEMBLE_RUNS must be >= 1")
        return problems


config = Config()
