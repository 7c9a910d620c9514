"""Bundled example problem files.

Four curated families whose triangulations are certified unimodular by the
validator: a 3-variable family over a spiked cube ("cube"), a plane cubic
with the hexagonal lift ("elliptic"), a genus-2 curve over a 3x2 rectangle
("genus2"), and a cube variant with coefficient magnitudes 2 and 3
("cube_weighted") that exercises the log-magnitude atoms.
"""

import json
from importlib import resources

from . import problems

NAMES = ("cube", "elliptic", "genus2", "cube_weighted")


def available():
    return list(NAMES)


def load(name):
    """The raw problem document for a bundled corpus entry."""
    if name not in NAMES:
        raise KeyError("unknown corpus entry %r; have %s" % (name, NAMES))
    ref = resources.files(__package__).joinpath("corpus/%s.json" % name)
    return json.loads(ref.read_text())


def instance(name):
    """Parsed ProblemInstance for a bundled corpus entry."""
    inst, _requests, _options, _warnings = problems.parse_problem(load(name))
    return inst


def full(name):
    """(instance, requests, options) for a bundled corpus entry."""
    inst, requests, options, _warnings = problems.parse_problem(load(name))
    return inst, requests, options
