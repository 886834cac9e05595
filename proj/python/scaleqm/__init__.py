"""Python front end of the scaleqm C++ library."""

from fractions import Fraction

from ._scaleqm import (
    ScaleQMError,
    bound_states,
    hypervirial_series,
    lint,
    nondim,
    run_cli,
    transmission,
)
from ._scaleqm import rs_series as _rs_series

__all__ = [
    "ScaleQMError",
    "bound_states",
    "hypervirial",
    "lint",
    "nondim",
    "rs",
    "run_cli",
    "transmission",
]


def _fractions(pairs):
    return [Fraction(int(p), int(q)) for p, q in pairs]


def rs(n, order, poly="4:1"):
    """Exact Rayleigh-Schrodinger coefficients of x^2/2 + lambda P(x)."""
    return _fractions(_rs_series(n, order, poly))


def hypervirial(n, order):
    """Exact quartic coefficients from the hypervirial recursion."""
    return _fractions(hypervirial_series(n, order))
