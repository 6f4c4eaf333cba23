"""Spot-price index analytics and VM migration policy simulation."""

import json

from ._spotindex import (
    Catalog,
    ConflictError,
    Error,
    GapError,
    IndexPoint,
    IndexSeries,
    InvariantError,
    OutOfRangeError,
    ParseError,
    PolicyError,
    PriceTrace,
    SimulationError,
    VmSpec,
    index_series,
    load_traces,
    on_demand_index,
    run_cli,
    synthesize,
    version,
)
from . import _spotindex

__version__ = version()


def simulate(job, traces, catalog, config=None):
    """Run one simulation. job and config are dicts shaped like the JSON files."""
    report = _spotindex.simulate_json(json.dumps(job), json.dumps(config or {}), traces, catalog)
    return json.loads(report)


__all__ = [
    "Catalog",
    "ConflictError",
    "Error",
    "GapError",
    "IndexPoint",
    "IndexSeries",
    "InvariantError",
    "OutOfRangeError",
    "ParseError",
    "PolicyError",
    "PriceTrace",
    "SimulationError",
    "VmSpec",
    "index_series",
    "load_traces",
    "on_demand_index",
    "run_cli",
    "simulate",
    "synthesize",
    "version",
]
