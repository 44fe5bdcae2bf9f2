import math

import pytest
from hypothesis import given, strategies as st

from towline.core import (
    elementary,
    omega,
    s_fn,
    s_inverse,
    s_orbit,
    orbit_to_band,
)

positive_floats = st.floats(min_value=1e-6, max_value=1e6)


def test_elementary_at_three():
    e = elementary(3.0)
    assert e.omega == pytest.approx(5.0, abs=1e-14)
    assert e.c == pytest.approx(4.0, abs=1e-14)
    assert e.d == pytest.approx(4.0 / 3.0, abs=1e-14)
    assert e.s == pytest.approx(1.0 / 3.0, abs=1e-14)


def test_elementary_at_one():
    e = elementary(1.0)
    assert e.omega == pytest.approx(3.0, abs=1e-14)
    assert e.c == pytest.approx(2.25, abs=1e-14)
    assert e.d == pytest.approx(1.125, abs=1e-14)
    assert e.s == pytest.approx(0.1, abs=1e-14)
    assert e.beta == pytest.approx(0.5, abs=1e-14)


def test_elementary_at_ten():
    e = elementary(10.0)
    assert e.omega == pytest.approx(9.0, abs=1e-13)
    assert e.s == pytest.approx(1.0, abs=1e-13)


def test_reciprocal_pairs():
    e = elementary(0.58)
    assert e.gamma == pytest.approx(1.0 / e.c, rel=1e-15)
    assert e.delta == pytest.approx(1.0 / e.d, rel=1e-15)


def test_domain_error():
    for bad in (0.0, -1.0):
        with pytest.raises(ValueError):
            elementary(bad)
        with pytest.raises(ValueError):
            omega(bad)


def test_orbit_identity_and_known_steps():
    assert s_orbit(0.77, 0) == 0.77
    assert s_orbit(1.0 / 3.0, -1) == pytest.approx(3.0, rel=1e-13)
    # 1/s(1/0.1) = 1/s(10) and s(10) = 1
    assert s_orbit(0.1, -1) == pytest.approx(1.0, rel=1e-13)


def test_s_inverse_known_values():
    assert s_inverse(1.0 / 3.0) == pytest.approx(3.0, rel=1e-13)
    assert s_inverse(0.1) == pytest.approx(1.0, rel=1e-13)


@given(positive_floats)
def test_s_contracts(x):
    assert s_fn(x) < x


@given(positive_floats)
def test_s_inverse_round_trip(x):
    y = s_fn(x)
    assert s_inverse(y) == pytest.approx(x, rel=1e-12)
    assert s_fn(s_inverse(x)) == pytest.approx(x, rel=1e-12)


@given(st.floats(min_value=1e-3, max_value=1e6), st.floats(min_value=1.01, max_value=4.0))
def test_monotonicity(x, factor):
    e1 = elementary(x)
    e2 = elementary(x * factor)
    assert e2.s > e1.s
    assert e2.c > e1.c
    assert e2.d > e1.d


@given(st.floats(min_value=1e-4, max_value=1e4), st.integers(min_value=-3, max_value=5))
def test_orbit_composition(x, k):
    # s_{k+1} = s o s_k
    try:
        direct = s_orbit(x, k + 1)
    except OverflowError:
        return
    stepped = s_fn(s_orbit(x, k)) if k + 1 > k else None
    assert direct == pytest.approx(s_fn(s_orbit(x, k)), rel=1e-10)


def test_orbit_to_band_partitions():
    for x in (1e-5, 0.2, 0.5, 1.0, 2.9999, 3.0, 47.0, 46538.0):
        y, k = orbit_to_band(x)
        assert 1.0 / 3.0 <= y < 3.0
        assert s_orbit(x, k) == pytest.approx(y, rel=1e-12)


def test_backward_orbit_overflow_reported():
    with pytest.raises(OverflowError):
        s_orbit(3.0, -40)
