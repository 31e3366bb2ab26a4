import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparsweep.special import SWITCH_POINTS, bessel_jy, hankel1_0, hankel1_1

mpmath.mp.dps = 30


def ref(x):
    x = mpmath.mpf(x)
    return tuple(float(f(n, x)) for f, n in ((mpmath.besselj, 0), (mpmath.bessely, 0),
                                             (mpmath.besselj, 1), (mpmath.bessely, 1)))


POINTS = np.concatenate([np.geomspace(1e-6, 1.0, 15), np.linspace(1.0, 30.0, 59),
                         np.geomspace(30.0, 1e6, 20)])


@pytest.mark.parametrize("x", POINTS)
def test_against_mpmath(backend, x):
    got = bessel_jy(float(x))
    want = ref(x)
    # absolute accuracy near zeros, relative to the envelope sqrt(2/(pi x)) at large x
    scale = max(1.0, math.sqrt(2.0 / (math.pi * x))) if x < 1 else math.sqrt(2.0 / (math.pi * x))
    for g, w in zip(got, want):
        if abs(w) > 1e3:
            assert abs(g - w) <= 1e-13 * abs(w)
        else:
            assert abs(g - w) <= 5e-14 * max(scale, abs(w))


def test_known_value():
    # -(i/4) H0(1) from the definition, digits from an arbitrary-precision evaluation
    g = -0.25j * hankel1_0(1.0)
    assert abs(g - (0.0220642410 - 0.1912994217j)) < 1e-9


@given(st.floats(min_value=1e-3, max_value=1e5))
@settings(max_examples=300, deadline=None)
def test_wronskian(x):
    j0, y0, j1, y1 = bessel_jy(x)
    w = j1 * y0 - j0 * y1
    assert abs(w - 2.0 / (math.pi * x)) <= 1e-13 * max(1.0, 2.0 / (math.pi * x))


@pytest.mark.parametrize("s", SWITCH_POINTS)
def test_continuity_at_switch_points(s):
    lo = bessel_jy(np.nextafter(s, 0.0))
    hi = bessel_jy(np.nextafter(s, np.inf))
    for a, b in zip(lo, hi):
        assert abs(a - b) < 1e-14


def test_array_and_scalar_agree():
    x = np.array([0.5, 7.9, 8.1, 24.0, 26.0, 500.0])
    arr = hankel1_1(x)
    for xi, hi in zip(x, arr):
        assert hankel1_1(float(xi)) == hi


def test_small_argument_limits():
    x = 1e-8
    j0, y0, j1, y1 = bessel_jy(x)
    assert j0 == pytest.approx(1.0, abs=1e-15)
    assert y0 == pytest.approx((2 / math.pi) * (math.log(x / 2) + np.euler_gamma), rel=1e-12)
    assert y1 == pytest.approx(-2 / (math.pi * x), rel=1e-12)


@pytest.mark.parametrize("bad", [0.0, -1.0, float("nan"), float("inf")])
def test_rejects_invalid(bad):
    with pytest.raises(ValueError):
        bessel_jy(bad)
