from __future__ import annotations

import random

import pytest
from mpmath import mp, mpc, mpf

from lattice_ortho.connection import connection_row, tables
from lattice_ortho.recurrence import (
    alpha,
    beta,
    coefficients,
    norm_K,
    u_eval,
    u_newton_coeffs,
    u_values,
)
from conftest import preset

FAMILIES = [
    ("charlier", dict(a="3/2")),
    ("meixner", dict(c="1/3", beta=2)),
    ("krawtchouk", dict(p="0.3", N=10)),
    ("wilson", dict(a="1/2", b="1/3", c="1/4", d="1/5")),
    ("continuous-dual-hahn", dict(a="1/4", b="1/3", c="1/2")),
    ("continuous-hahn", dict(a="1/2", b="3/2", c="1/3", d="1/4")),
    ("hahn", dict(alpha="1/2", beta="1/3", N=30)),
]


def tol(scale=1):
    return mpf(2) ** (-mp.prec // 2 - 40) * scale


def test_beta_examples(charlier1):
    p = charlier1
    assert beta(p, 0) == p.x_at(0) + p.g_at(1) / (p.h_at(0) - p.h_at(1))
    assert beta(p, 0) == 1
    assert beta(p, 2) == 3


def test_alpha_examples(charlier1, hahn002):
    assert alpha(charlier1, 1) == 1
    assert alpha(charlier1, 3) == 3
    assert alpha(hahn002, 3) == 0


def test_charlier_classical_coefficients():
    p = preset("charlier", a="5/2")
    for n in range(12):
        assert abs(beta(p, n) - (n + mpf(5) / 2)) <= tol(n + 3)
        if n:
            assert abs(alpha(p, n) - n * mpf(5) / 2) <= tol(n + 3)


def test_u_examples(charlier1):
    assert u_eval(charlier1, 0, 7) == 1
    assert u_eval(charlier1, 1, beta(charlier1, 0)) == 0
    # beta_0 = 1, beta_1 = 2, alpha_1 = 1: (0 - 2)(0 - 1) - 1 = 1, matching the Newton row [1, -2, 1]
    assert u_eval(charlier1, 2, 0) == 1
    assert u_newton_coeffs(charlier1, 2)(0) == 1


def test_newton_coefficients_examples(charlier1):
    assert u_newton_coeffs(charlier1, 0).coeffs == (1,)
    assert list(u_newton_coeffs(charlier1, 2).coeffs) == [1, -2, 1]
    p = preset("wilson", a="1/2", b="1/3", c="1/4", d="1/5")
    c1 = u_newton_coeffs(p, 1).coeffs
    assert c1[1] == 1 and c1[0] == p.g_at(1) / (p.h_at(1) - p.h_at(0))


def test_norm_examples(charlier1, hahn002):
    assert norm_K(charlier1, 0) == 1
    assert norm_K(charlier1, 3) == 6
    assert norm_K(hahn002, 3) == 0
    rc = coefficients(hahn002, 3)
    assert rc.finite_size == 3
    assert rc.norms()[3] == 0


@pytest.mark.parametrize("name, args", FAMILIES)
def test_recurrence_matches_newton_expansion(name, args):
    p = preset(name, **args)
    rng = random.Random(7)
    top = 15 if name not in ("krawtchouk",) else 10
    for _ in range(20):
        t = mpc(rng.uniform(-20, 20), rng.uniform(-20, 20))
        values = u_values(p, top, t)
        for n in range(top + 1):
            newton = u_newton_coeffs(p, n)
            assert abs(newton(t) - values[n]) <= tol(1 + abs(values[n]) * 1e3)
            assert newton.coeffs[-1] == 1


@pytest.mark.parametrize("name, args", FAMILIES)
def test_eigen_relation(name, args):
    # D v_k = h_k v_k + g_k v_{k-1}, applied to the Newton coefficients of u_n
    p = preset(name, **args)
    tab = tables(p)
    for n in range(11):
        c = connection_row(p, n)
        for k in range(n + 1):
            image = c[k] * p.h_at(k) + (c[k + 1] * tab.g(k + 1) if k < n else 0)
            assert abs(image - p.h_at(n) * c[k]) <= tol(1 + abs(p.h_at(n) * c[k]))


@pytest.mark.parametrize("name, args", FAMILIES)
def test_alpha_nonzero(name, args):
    p = preset(name, **args)
    size = tables(p).first_zero_g
    for n in range(1, 11):
        if size is not None and n >= size:
            break
        assert alpha(p, n) != 0
