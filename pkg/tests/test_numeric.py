from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st
from mpmath import mp, mpc, mpf

from lattice_ortho.numeric import (
    PRECISION_ENV,
    check_precision,
    close,
    cubic_roots,
    default_precision,
    digits_for,
    is_zero,
    low_degree_roots,
    nearest_int,
    nonpositive_int,
    precision,
    to_complex,
)


@pytest.mark.parametrize(
    "text, re, im",
    [
        ("1", 1, 0),
        ("0.5", "0.5", 0),
        ("1/3", (1, 3), 0),
        ("i", 0, 1),
        ("-i", 0, -1),
        ("2i", 0, 2),
        ("1+2i", 1, 2),
        ("1-i", 1, -1),
        ("1/2+1/3i", (1, 2), (1, 3)),
        ("1.5e+2-3e-1j", 150, "-0.3"),
    ],
)
def test_to_complex_strings(text, re, im):
    def real(v):
        return mpf(v[0]) / v[1] if isinstance(v, tuple) else mpf(v)

    assert to_complex(text) == mpc(real(re), real(im))


def test_decimal_string_keeps_full_precision():
    assert to_complex("0.3") != to_complex(0.3)
    assert abs(to_complex("0.3") * 10 - 3) < mpf(2) ** -250


def test_precision_context_restores():
    before = mp.prec
    with precision(512):
        assert mp.prec == 512
    assert mp.prec == before


def test_precision_bounds(monkeypatch):
    with pytest.raises(ValueError):
        check_precision(32)
    with pytest.raises(ValueError):
        check_precision(8192)
    monkeypatch.setenv(PRECISION_ENV, "128")
    assert default_precision() == 128
    monkeypatch.delenv(PRECISION_ENV)
    assert default_precision() == 256


def test_digit_policy():
    assert digits_for(256) == 80
    assert digits_for(64) == 22


def test_zero_and_close():
    tiny = mpf(2) ** -300
    assert is_zero(tiny)
    assert not is_zero(mpf(2) ** -100)
    assert close(1, 1 + mpf(2) ** -200)
    assert not close(1, 1 + mpf(2) ** -100)


def test_integer_detection():
    assert nearest_int(mpc(3) + mpf(2) ** -250) == 3
    assert nearest_int(mpc("3.1")) is None
    assert nonpositive_int(mpc(-4)) == -4
    assert nonpositive_int(mpc(2)) is None
    assert nonpositive_int(mpc(-2, 1)) is None


@settings(max_examples=60, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=50, allow_nan=False, allow_infinity=False),
                min_size=3, max_size=3))
def test_cubic_roots_reproduce_polynomial(roots):
    r = [mpc(z) for z in roots]
    b = -(r[0] + r[1] + r[2])
    c = r[0] * r[1] + r[0] * r[2] + r[1] * r[2]
    d = -r[0] * r[1] * r[2]
    scale = 1 + max(abs(z) for z in r) ** 3
    for s in cubic_roots(b, c, d):
        assert abs(s**3 + b * s**2 + c * s + d) <= mpf(2) ** -180 * scale


def test_repeated_roots_exact():
    assert all(s == 1 for s in cubic_roots(mpc(-3), mpc(3), mpc(-1)))
    assert sorted(x.real for x in low_degree_roots([mpc(-6), mpc(1), mpc(1)])) == [-3, 2]
    assert low_degree_roots([mpc(4), mpc(2)]) == [-2]
