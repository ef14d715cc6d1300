"""Dialogue plans from FOND planning problems."""

import csv
import io
import json

from . import _dialoplan
from ._dialoplan import (
    BuildError,
    ConfigError,
    NoPlanError,
    ParseError,
    ResourceError,
    StructuralError,
    UnsolvableError,
)

__all__ = [
    "BuildError",
    "ConfigError",
    "NoPlanError",
    "ParseError",
    "ResourceError",
    "StructuralError",
    "fixture",
    "fixture_names",
    "run_script",
    "solve",
    "synth",
    "to_dot",
    "UnsolvableError",
    "validate",
]


def solve(domain, problem, max_expansions=1_000_000, time_limit_s=60.0):
    """Plan document as a dict, or None if the problem is unsolvable."""
    text = _dialoplan.solve(domain, problem, max_expansions, time_limit_s)
    return None if text is None else json.loads(text)


def validate(domain, problem, plan):
    """Violations as (property, witness) pairs; empty means valid."""
    return _dialoplan.validate(domain, problem, json.dumps(plan))


def to_dot(plan):
    return _dialoplan.to_dot(json.dumps(plan))


def fixture_names():
    return list(_dialoplan.fixture_names())


def fixture(name):
    """(domain, problem) PDDL text of a bundled fixture."""
    return _dialoplan.fixture_pddl(name)


def synth(instances, seed, threads=0, record_timing=True):
    """Rows of the experiment CSV as dicts."""
    text = _dialoplan.synth_csv(instances, seed, threads, record_timing)
    return list(csv.DictReader(io.StringIO(text)))


def run_script(script, weather="ok"):
    """Replays a script dict against the bundled fixtures."""
    return json.loads(_dialoplan.run_script(json.dumps(script), weather))
