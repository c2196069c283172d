"""Certainty closures of uncertain constraint problems."""

import json

from . import _core
from ._core import CapExceeded, Error, ModelError, ParseError, two_sided_z

__all__ = [
    "CapExceeded",
    "Error",
    "ModelError",
    "ParseError",
    "closure",
    "data_correct",
    "flow_bounds",
    "run",
    "two_sided_z",
]


def _text(doc):
    return doc if isinstance(doc, str) else json.dumps(doc)


def closure(model, kind="full", form="auto", max_realisations=1_000_000, max_cover=20):
    """Closure of a UCSP given as a dict or JSON text."""
    return json.loads(_core.closure(_text(model), kind, form, max_realisations, max_cover))


def flow_bounds(network, with_splitting=False, with_flow_conservation=False):
    return json.loads(_core.flow_bounds(_text(network), with_splitting, with_flow_conservation))


def data_correct(network, sigma2=10.0):
    return json.loads(_core.data_correct(_text(network), sigma2))


def run(*args):
    """Runs the command line; returns (exit code, stdout, stderr)."""
    return _core.run([str(a) for a in args])
