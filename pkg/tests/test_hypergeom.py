import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from netmimo.errors import DomainError
from netmimo.hypergeom import hyp2f1, hyp2f1m1, incomplete_beta

mp.mp.dps = 40

# Reference values from mpmath.hyp2f1 at 40 digits.
HYP_3 = 7.667775340068224098823609752781700267126
HYP_07 = 131.6049988518571115600133035496078997829


def test_zero_argument_is_one():
    for a, b in [(3.0, -2 / 3.76), (0.2, -1 / 3.76), (5.0, 0.5)]:
        assert hyp2f1(a, b, 1 + b, 0.0) == 1.0


def test_log_two():
    assert hyp2f1(1.0, 1.0, 2.0, -1.0) == pytest.approx(math.log(2), rel=1e-13)


def test_frozen_reference_values():
    assert hyp2f1(3.0, -2 / 3.76, 1 - 2 / 3.76, -5.0) == pytest.approx(HYP_3, rel=1e-12)
    assert hyp2f1(0.7, -1 / 3.76, 1 - 1 / 3.76, -1e8) == pytest.approx(HYP_07, rel=1e-12)


@pytest.mark.parametrize("a, b, c, z", [(1, -0.5, 0.7, -1.0), (1, -1.5, -0.5, -1.0), (1, 0.5, 1.5, 0.1)])
def test_unsupported_patterns_raise(a, b, c, z):
    with pytest.raises(DomainError):
        hyp2f1(a, b, c, z)


@settings(max_examples=150, deadline=None)
@given(
    a=st.floats(1e-4, 20.0),
    b=st.sampled_from([-2 / 3.76, -1 / 3.76, -2 / 2.5, -1 / 6.0]),
    log_y=st.floats(-20.0, 18.0),
)
def test_minus_one_matches_mpmath(a, b, log_y):
    y = 10.0**log_y
    ref = mp.hyp2f1(a, b, 1 + b, -mp.mpf(y)) - 1
    got = float(hyp2f1m1(a, b, y))
    assert got == pytest.approx(float(ref), rel=1e-10, abs=1e-300)


def test_vectorised_matches_scalar():
    y = np.logspace(-6, 12, 25)
    vec = hyp2f1m1(2.5, -2 / 3.76, y)
    assert np.array_equal(vec, [float(hyp2f1m1(2.5, -2 / 3.76, v)) for v in y])


@settings(max_examples=100, deadline=None)
@given(x=st.floats(0.0, 0.999999), p=st.floats(0.05, 5.0), q=st.floats(0.05, 5.0))
def test_incomplete_beta_matches_mpmath(x, p, q):
    ref = float(mp.betainc(p, q, 0, x))
    assert incomplete_beta(x, p, q) == pytest.approx(ref, rel=1e-10, abs=1e-300)


def test_incomplete_beta_complement_argument():
    y = 9.89e15
    V, Vc = y / (1 + y), 1 / (1 + y)
    p, q = 1 - 0.26596, 0.000249 + 0.26596
    ref = float(mp.betainc(p, q, 0, mp.mpf(y) / (1 + mp.mpf(y))))
    assert incomplete_beta(V, p, q, xc=Vc) == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("x", [5e-324, 1e-310, 1e-200, 3e-11, 2e-10])
@pytest.mark.parametrize("p,q", [(0.5, 0.75), (4.9, 0.05), (0.05, 4.9)])
def test_incomplete_beta_tiny_x(x, p, q):
    ref = float(mp.betainc(p, q, 0, x))
    assert incomplete_beta(x, p, q) == pytest.approx(ref, rel=1e-12, abs=0.0)
