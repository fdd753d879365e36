import os
from pathlib import Path

from dotenv import load_dotenv

from oracle import OracleConfig

load_dotenv()


def _int_env(name, default):
    raw = os.getenv(name, str(default))
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"Unsupported {name}: {raw!r}")


def _float_env(name, default):
    raw = os.getenv(name, str(default))
    try:
        return float(raw)
    except ValueError:
        raise ValueError(f"Unsupported {name}: {raw!r}")


def parse_grid(text):
    """Parse a ``<p_steps>x<q_steps>`` grid size such as ``500x500``."""
    try:
        p_steps, q_steps = (int(part) for part in text.lower().split("x"))
    except ValueError:
        raise ValueError(f"grid must look like 500x500, got {text!r}")
    if p_steps < 2 or q_steps < 2:
        raise ValueError(f"grid needs at least 2 steps per axis, got {text!r}")
    return p_steps, q_steps


GRID = parse_grid(os.getenv("PRICING_GRID", "500x500"))
REFINE = _int_env("PRICING_REFINE", 2)
TOLERANCE = _float_env("PRICING_TOL", 1e-3)
WORKERS = _int_env("PRICING_WORKERS", 1)
LOG_LEVEL = os.getenv("PRICING_LOG_LEVEL", "WARNING").upper()
SCENARIO_DIR = Path(os.getenv("PRICING_SCENARIO_DIR") or Path(__file__).parent / "scenarios")

if LOG_LEVEL not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
    raise ValueError("Unsupported PRICING_LOG_LEVEL")
if REFINE < 0 or WORKERS < 1 or TOLERANCE <= 0:
    raise ValueError("PRICING_REFINE, PRICING_WORKERS and PRICING_TOL must be positive")


def default_oracle_config(**overrides):
    p_steps, q_steps = GRID
    values = dict(p_steps=p_steps, q_steps=q_steps, refinement_rounds=REFINE, tolerance_rel=TOLERANCE)
    values.update({k: v for k, v in overrides.items() if v is not None})
    return OracleConfig(**values)
