from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st
from mpmath import mpc, mpf

from lattice_ortho.errors import InvalidFamilyError
from lattice_ortho.lattice import (
    Case,
    FamilyParams,
    QuadraticSeq,
    classify,
    g_eval,
    g_reduced_coeffs,
    termination_index,
    validate,
)
from conftest import preset

small = st.fractions(min_value=-5, max_value=5, max_denominator=7).map(
    lambda f: mpc(mpf(f.numerator) / f.denominator)
)


def test_quadratic_seq_examples():
    assert QuadraticSeq(0, 1, 0)(5) == 5
    assert QuadraticSeq(1, 2, 1)(3) == 16
    assert QuadraticSeq(0, 0, 0)(7) == 0


@settings(max_examples=50, deadline=None)
@given(small, small, small, st.integers(0, 50))
def test_third_difference_recurrence(c0, c1, c2, k):
    s = QuadraticSeq(c0, c1, c2)
    assert abs(s(k + 3) - (3 * (s(k + 2) - s(k + 1)) + s(k))) <= mpf(2) ** -200 * (1 + abs(s(k + 3)))


def test_g_examples(charlier1):
    assert g_eval(charlier1, 0) == 0
    assert g_eval(charlier1, 3) == -3
    p = FamilyParams(a1=2, a2=1, b0=3, b1=1, b2=0, d1=0, d2=0)
    assert g_eval(p, 1) == p.x_at(0) * p.h_at(1)


@settings(max_examples=50, deadline=None)
@given(small, small, small, small, small, small, small, st.integers(1, 30))
def test_g_factorizes_as_k_times_cubic(a1, a2, b0, b1, b2, d1, d2, k):
    if (a1 == 0 and a2 == 0) or (b1 == 0 and b2 == 0):
        return
    p = FamilyParams(a1, a2, b0, b1, b2, d1, d2)
    G = g_reduced_coeffs(p)
    value = k * sum(c * k**i for i, c in enumerate(G))
    assert abs(value - g_eval(p, k)) <= mpf(2) ** -200 * (1 + abs(value))


@settings(max_examples=80, deadline=None)
@given(small, small, small, small, small, small, small)
def test_classify_total(a1, a2, b0, b1, b2, d1, d2):
    if (a1 == 0 and a2 == 0) or (b1 == 0 and b2 == 0):
        with pytest.raises(InvalidFamilyError):
            FamilyParams(a1, a2, b0, b1, b2, d1, d2)
        return
    case = classify(FamilyParams(a1, a2, b0, b1, b2, d1, d2))
    expected = {(True, True): Case.CASE1, (True, False): Case.CASE2,
                (False, True): Case.CASE3, (False, False): Case.CASE4}[(a2 != 0, b2 != 0)]
    assert case is expected


def test_parse_and_case_names():
    p = FamilyParams.parse("a1=1,a2=0,b0=0,b1=1,b2=0,d1=0,d2=-1")
    assert p.case is Case.CASE4 and str(p.case) == "Case4"
    with pytest.raises(InvalidFamilyError):
        FamilyParams.parse("a1=1,a2=0")


def test_gauge_scaling_only_touches_a_and_d():
    p = preset("wilson", a="1/2", b="1/3", c="1/4", d="1/5")
    q = p.scaled(2)
    assert (q.b0, q.b1, q.b2) == (p.b0, p.b1, p.b2)
    assert q.a2 == 2 * p.a2 and q.d1 == 2 * p.d1


def test_validate_charlier(charlier1):
    report = validate(charlier1, 10)
    assert report.case_id is Case.CASE4
    assert report.h_distinct_ok and report.x_distinct_ok
    assert report.g_nonzero_up_to == 10
    assert report.terminating_at is None
    assert report.alpha_nonzero_up_to == 10
    assert report.ok


def test_validate_hahn_terminates():
    report = validate(preset("hahn", alpha=0, beta=0, N=5), 10)
    assert report.terminating_at == 6
    assert report.g_nonzero_up_to == 5
    assert report.alpha_nonzero_up_to == 5
    assert report.ok


def test_validate_eigenvalue_collision():
    p = FamilyParams(a1=-3, a2=1, b0=0, b1=1, b2=0, d1=0, d2=0)
    report = validate(p, 5)
    assert not report.h_distinct_ok
    assert p.h_at(1) == p.h_at(2) == -2
    assert not report.ok


def test_collision_beyond_horizon_is_flagged():
    p = FamilyParams(a1=-41, a2=1, b0=0, b1=1, b2=0, d1=1, d2=0)
    report = validate(p, 5)
    assert report.h_distinct_ok
    assert any("beyond horizon" in m for m in report.messages)


def test_termination_beyond_horizon():
    p = preset("krawtchouk", p="1/3", N=40)
    assert termination_index(p) == 41
    assert validate(p, 5).terminating_at == 41


@pytest.mark.parametrize("name, args, size", [
    ("hahn", dict(alpha=0, beta=0, N=2), 3),
    ("hahn", dict(alpha="1/2", beta=2, N=7), 8),
    ("krawtchouk", dict(p="0.3", N=10), 11),
    ("charlier", dict(a=1), None),
    ("meixner", dict(c="1/3", beta=2), None),
    ("wilson", dict(a="3/4", b="3/4", c="3/4", d="3/4"), None),
])
def test_termination_index(name, args, size):
    assert termination_index(preset(name, **args)) == size
