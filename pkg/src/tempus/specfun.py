"""Generalized hypergeometric series for complex parameters and arguments.

Only the (1,1) and (2,2) shapes are needed.  The series is summed term by
term with an extended-precision accumulator; when the largest term dwarfs
the result the lost digits are estimated and the call fails loudly instead
of returning garbage.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import mpmath
import numpy as np

from .errors import InvalidParam, NonConvergent

DEFAULT_RTOL = 1e-12
DEFAULT_MAX_TERMS = 10_000
# relative error we are willing to accept from cancellation between terms
DEFAULT_CANCELLATION_LIMIT = 1e-10
# working digits for the arbitrary-precision fallback
FALLBACK_DIGITS = 30

_EPS_EXT = float(np.finfo(np.longdouble).eps)


@dataclass(frozen=True)
class HypParams:
    numerator_params: tuple[complex, ...]
    denominator_params: tuple[complex, ...]
    argument: complex = 0j

    def __post_init__(self):
        shape = (len(self.numerator_params), len(self.denominator_params))
        if shape not in {(1, 1), (2, 2)}:
            raise InvalidParam(f"unsupported series shape {shape}")
        for b in self.denominator_params:
            _check_denominator(b)


@dataclass
class SeriesResult:
    value: np.ndarray
    terms: int
    error_estimate: np.ndarray = field(repr=False)


def _check_denominator(b: complex) -> None:
    b = complex(b)
    if b.imag == 0 and b.real <= 0 and b.real == round(b.real):
        raise InvalidParam(f"denominator parameter {b} is a non-positive integer")


def hyp_series(
    a: Sequence[complex],
    b: Sequence[complex],
    z,
    rtol: float = DEFAULT_RTOL,
    max_terms: int = DEFAULT_MAX_TERMS,
    cancellation_limit: float = DEFAULT_CANCELLATION_LIMIT,
    fallback: bool = False,
) -> SeriesResult:
    """Sum pFq(a; b; z) directly, vectorized over ``z``.

    Stops once every term is below ``rtol`` times its partial sum and the
    term ratio has turned over.  Raises NonConvergent when the cap is hit or
    when cancellation leaves fewer correct digits than ``cancellation_limit``
    allows.  With ``fallback`` the offending points are recomputed in
    arbitrary precision instead of raising.
    """
    for bj in b:
        _check_denominator(bj)
    z_arr = np.asarray(z, dtype=np.clongdouble)
    scalar = z_arr.ndim == 0
    z_arr = np.atleast_1d(z_arr)
    a_ext = [np.clongdouble(complex(x)) for x in a]
    b_ext = [np.clongdouble(complex(x)) for x in b]

    term = np.ones_like(z_arr)
    total = np.ones_like(z_arr)
    biggest = np.ones(z_arr.shape, dtype=np.longdouble)
    done = np.zeros(z_arr.shape, dtype=bool)
    m = 0
    while not done.all():
        if m >= max_terms:
            raise NonConvergent(f"series did not converge within {max_terms} terms")
        ratio = np.clongdouble(1)
        for aj in a_ext:
            ratio = ratio * (aj + m)
        for bj in b_ext:
            ratio = ratio / (bj + m)
        step = ratio * z_arr / (m + 1)
        term = np.where(done, 0, term * step)
        total = total + term
        m += 1
        mag = np.abs(term)
        biggest = np.maximum(biggest, mag)
        small = mag <= rtol * np.abs(total)
        turning = np.abs(step) < 1
        done |= (small & turning) | (mag == 0)

    err = _EPS_EXT * biggest * np.sqrt(m) / np.maximum(np.abs(total), np.finfo(float).tiny)
    value = total.astype(np.complex128)
    err = err.astype(float)
    bad = err > cancellation_limit
    if bad.any():
        if not fallback:
            worst = complex(z_arr[np.argmax(err)])
            raise NonConvergent(
                f"cancellation in the series at z={worst:.6g} leaves relative error "
                f"{float(err.max()):.2e} > {cancellation_limit:.1e}"
            )
        for i in np.flatnonzero(bad):
            value[i] = _mp_series(a, b, complex(z_arr[i]))
            err[i] = 10.0 ** (-FALLBACK_DIGITS + 5)
    if scalar:
        value, err = value[0], err[0]
    return SeriesResult(value=value, terms=m, error_estimate=err)


def _mp_series(a, b, z: complex) -> complex:
    with mpmath.workdps(FALLBACK_DIGITS):
        return complex(mpmath.hyper([complex(x) for x in a], [complex(x) for x in b], z))


def hyp_1f1(a: complex, b: complex, z, *, kummer: str = "auto", **kw):
    """Confluent hypergeometric function 1F1(a; b; z).

    ``kummer`` selects Kummer's transformation e^z 1F1(b-a; b; -z):
    "auto" applies it where Re(z) < 0, "never" and "always" force a route.
    Array ``z`` is accepted and evaluated elementwise.
    """
    z_arr = np.asarray(z, dtype=complex)
    if kummer == "never":
        flip = np.zeros(z_arr.shape, dtype=bool)
    elif kummer == "always":
        flip = np.ones(z_arr.shape, dtype=bool)
    elif kummer == "auto":
        flip = z_arr.real < 0
    else:
        raise InvalidParam(f"unknown kummer mode {kummer!r}")
    _check_denominator(b)
    if not flip.any():
        return hyp_series([a], [b], z_arr, **kw).value
    if flip.all():
        return np.exp(z_arr) * hyp_series([b - a], [b], -z_arr, **kw).value
    out = np.empty(z_arr.shape, dtype=complex)
    out[~flip] = hyp_series([a], [b], z_arr[~flip], **kw).value
    out[flip] = np.exp(z_arr[flip]) * hyp_series([b - a], [b], -z_arr[flip], **kw).value
    return out


def hyp_2f2(a1: complex, a2: complex, b1: complex, b2: complex, z, **kw):
    """2F2(a1, a2; b1, b2; z) by direct summation."""
    return hyp_series([a1, a2], [b1, b2], z, **kw).value


def evaluate(params: HypParams, **kw):
    if len(params.numerator_params) == 1:
        (a,), (b,) = params.numerator_params, params.denominator_params
        return hyp_1f1(a, b, params.argument, **kw)
    a1, a2 = params.numerator_params
    b1, b2 = params.denominator_params
    return hyp_2f2(a1, a2, b1, b2, params.argument, **kw)
