"""Eigenvalue bounds for Dirichlet and magnetic Laplacians on planar and product domains."""

import json as _json

from . import _spectrolab as _core
from ._spectrolab import *  # noqa: F401,F403
from ._spectrolab import SpectrolabError, __version__  # noqa: F401


def error_kind(exc):
    """Kind name from a SpectrolabError message, e.g. 'SpacingTooCoarse'."""
    return str(exc).split(":", 1)[0]


def _plan_text(plan):
    return plan if isinstance(plan, str) else _json.dumps(plan)


def normalize_plan(plan):
    """Plan dict with every default filled in."""
    return _json.loads(_core.normalize_plan(_plan_text(plan)))


def plan_hash(plan):
    return _core.plan_hash(_plan_text(plan))


def evaluate_domain(spec, field, plan=None):
    return _core.evaluate_domain(spec, field, _plan_text(plan or {}))


def run(plan, workers=0):
    """Run a sweep; returns the manifest as a dict."""
    return _json.loads(_core.run(_plan_text(plan), workers))


def domain_from_json(record):
    return _core.domain_from_json(_plan_text(record))
