"""Python bindings for the hypbound toolkit.

Step functions, measures and crossed-product elements may be passed either as
JSON text or as plain dicts in the same schema the command-line tool reads.
"""

import json as _json

from . import _core
from ._core import (
    CapacityError,
    DomainError,
    Error,
    ParseError,
    RadiusInsufficient,
    RefinementError,
    check_c16,
    double_integral,
    double_integral_exact,
    growth,
    hyperbolicity_delta,
    lp_verdict,
)

__all__ = [
    "CapacityError",
    "DomainError",
    "Error",
    "ParseError",
    "RadiusInsufficient",
    "RefinementError",
    "check_c16",
    "deviation_table",
    "double_integral",
    "double_integral_exact",
    "growth",
    "hyperbolicity_delta",
    "kcycle_values",
    "lp_verdict",
    "run",
    "twisted",
]


def _text(obj):
    return obj if isinstance(obj, str) else _json.dumps(obj)


def deviation_table(phi, radius, measure="", threads=1):
    """Deviation table as CSV text."""
    return _core.deviation_table(_text(phi), radius, _text(measure) if measure else "", threads)


def kcycle_values(phi, radius, depth, p=2.5):
    """Singular values of [lambda(phi), P] on a truncation."""
    return _core.kcycle_values(_text(phi), radius, depth, p)


def twisted(a, b, radius=4, p=2.5):
    return _core.twisted(_text(a), _text(b), radius, p)


def run(*args):
    """Runs a CLI subcommand. Returns (exit_code, report) with the JSON report
    parsed when the command printed one."""
    code, out, err = _core.run_cli([str(a) for a in args])
    if out.strip().startswith("{"):
        return code, _json.loads(out)
    return code, out or err
