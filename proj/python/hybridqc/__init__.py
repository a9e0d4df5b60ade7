"""Python access to the hybrid spin-photon qubit simulator."""

import json

from . import _core
from ._core import IoError, NumericError, ValidationError, cpb_spectrum, scenario_text, scenarios, validate

__all__ = [
    "IoError",
    "NumericError",
    "ValidationError",
    "cpb_spectrum",
    "run",
    "scenario_text",
    "scenarios",
    "sweep",
    "validate",
]


def run(scenario, overrides=(), *, picture=None, integrator=None, tolerance=None, grid=None, trajectory=True):
    """Run a built-in scenario or config file; returns a dict.

    ``summary`` is the parsed run summary, ``matrix`` and ``ideal`` are the
    4x4 gate matrices, ``times`` and ``norm2`` the sampled trajectory.
    """
    r = _core.run(scenario, list(overrides), picture, integrator, tolerance, grid, trajectory)
    r["summary"] = json.loads(r.pop("summary_json"))
    return r


def sweep(scenario, path, values, overrides=()):
    rows = _core.sweep(scenario, path, [str(v) for v in values], list(overrides))
    for row in rows:
        text = row.pop("summary_json")
        row["summary"] = json.loads(text) if text else None
    return rows
