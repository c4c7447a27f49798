import cmath
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tempus.errors import InvalidParam, NonConvergent
from tempus.specfun import HypParams, evaluate, hyp_1f1, hyp_2f2, hyp_series


def brute_series(a, b, z, terms=200):
    """Plain partial sum in 50-digit arithmetic."""
    with mp.workdps(50):
        total, term = mp.mpc(1), mp.mpc(1)
        for m in range(terms):
            for x in a:
                term *= mp.mpc(x) + m
            for x in b:
                term /= mp.mpc(x) + m
            term *= mp.mpc(z) / (m + 1)
            total += term
        return complex(total)


def test_head_of_series_is_one():
    assert hyp_1f1(0.75 + 0.25j, 0.5, 0) == 1
    assert hyp_2f2(1.5, 0.75, 0.5, 2.5, 0) == 1


def test_exponential_identity():
    assert hyp_1f1(1, 1, 1) == pytest.approx(math.e, rel=1e-12)
    assert hyp_2f2(1, 2.5, 1, 2.5, 1) == pytest.approx(math.e, rel=1e-12)


def test_1f1_against_brute_force():
    a = (3 + 5j) / 4
    ref = brute_series([a], [0.5], -2j)
    assert abs(hyp_1f1(a, 0.5, -2j) - ref) < 1e-13 * abs(ref)


def test_2f2_against_brute_force():
    ref = brute_series([1.5, 0.75], [0.5, 2.5], -5j)
    assert abs(hyp_2f2(1.5, 0.75, 0.5, 2.5, -5j) - ref) < 1e-12 * abs(ref)


@pytest.mark.parametrize("s", [0.0, 5.0, 15.0])
@pytest.mark.parametrize("r", [-12.0, -3.0, 0.7, 8.0, 15.0])
def test_characteristic_arguments_against_brute_force(s, r):
    for a, b in (((3 + 1j * s) / 4, 0.5), ((3 + 1j * s) / 4, 1.5), ((5 + 1j * s) / 4, 2.5)):
        ref = brute_series([a], [b], -1j * r)
        assert abs(hyp_1f1(a, b, -1j * r) - ref) < 1e-11 * abs(ref)


def test_vectorized_matches_scalar():
    z = np.array([-3j, 1 + 2j, 0.5, -4 + 1j])
    vec = hyp_1f1(0.3 + 1j, 1.5, z)
    for zi, vi in zip(z, vec):
        assert vi == pytest.approx(hyp_1f1(0.3 + 1j, 1.5, zi), rel=1e-15)


def test_kummer_relation_random_grid():
    rng = np.random.default_rng(7)
    for _ in range(100):
        a = complex(rng.uniform(-2, 2), rng.uniform(-4, 4))
        b = complex(rng.uniform(0.3, 3), rng.uniform(-1, 1))
        z = cmath.rect(rng.uniform(0, 20), rng.uniform(-math.pi, math.pi))
        # each side summed on its own; points losing digits go to the fallback
        kw = dict(kummer="never", cancellation_limit=1e-12, fallback=True)
        lhs = hyp_1f1(a, b, z, **kw)
        rhs = cmath.exp(z) * hyp_1f1(b - a, b, -z, **kw)
        assert abs(lhs - rhs) <= 10 * 1e-12 * abs(lhs)


def test_derivative_recurrence_random_grid():
    rng = np.random.default_rng(11)
    for _ in range(100):
        a = complex(rng.uniform(-2, 2), rng.uniform(-3, 3))
        b = complex(rng.uniform(0.5, 3), 0)
        z = cmath.rect(rng.uniform(0.1, 10), rng.uniform(-math.pi, math.pi))
        h = 1e-5 * max(1.0, abs(z))
        fd = (hyp_1f1(a, b, z + h) - hyp_1f1(a, b, z - h)) / (2 * h)
        exact = a / b * hyp_1f1(a + 1, b + 1, z)
        assert abs(fd - exact) <= 1e-6 * max(abs(exact), 1e-8)


def test_term_count_within_cap():
    for r in (1, 10, 20):
        res = hyp_series([(3 + 15j) / 4], [0.5], -1j * r)
        assert 0 < res.terms <= 10_000


def test_nonpositive_integer_denominator_rejected():
    with pytest.raises(InvalidParam):
        hyp_1f1(1, -2, 0.5)
    with pytest.raises(InvalidParam):
        HypParams((1,), (0,), 1)
    with pytest.raises(InvalidParam):
        HypParams((1, 2, 3), (1,), 1)


def test_term_cap_raises():
    with pytest.raises(NonConvergent):
        hyp_1f1(1.0, 1.0, 30.0, max_terms=5)


def test_cancellation_detected_and_fallback():
    z = -40j
    with pytest.raises(NonConvergent):
        hyp_1f1(0.75 + 3.75j, 0.5, z)
    val = hyp_1f1(0.75 + 3.75j, 0.5, z, fallback=True)
    with mp.workdps(30):
        ref = complex(mp.hyp1f1(0.75 + 3.75j, 0.5, z))
    assert abs(val - ref) < 1e-12 * abs(ref)


def test_evaluate_dispatches_on_shape():
    assert evaluate(HypParams((1,), (1,), 1)) == pytest.approx(math.e, rel=1e-14)
    assert evaluate(HypParams((1, 2), (1, 2), 1)) == pytest.approx(math.e, rel=1e-14)


@settings(max_examples=50, deadline=None)
@given(
    st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False),
    st.floats(0.25, 4),
)
def test_value_at_zero_is_exactly_one(a, b):
    assert hyp_1f1(a, b, 0) == 1
