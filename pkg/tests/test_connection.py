from __future__ import annotations

import threading

import pytest
from mpmath import mp, mpc, mpf

from lattice_ortho.connection import (
    MomentSeq,
    NewtonPoly,
    connection_coeff,
    connection_row,
    inverse_coeff,
    moment,
    moments,
    tables,
    v_eval,
    v_prime_at_node,
)
from lattice_ortho.errors import NodeCollisionError
from lattice_ortho.lattice import FamilyParams
from conftest import preset

IDENTITY = FamilyParams(a1=1, a2=0, b0=0, b1=1, b2=0, d1=0, d2=-1)  # x_k = k

FAMILIES = [
    ("charlier", dict(a=1)),
    ("meixner", dict(c="1/3", beta=2)),
    ("wilson", dict(a="1/2", b="1/3", c="1/4", d="1/5")),
    ("continuous-dual-hahn", dict(a="1/4", b="1/3", c="1/2")),
    ("continuous-hahn", dict(a="1/2", b="3/2", c="1/3", d="1/4")),
    ("hahn", dict(alpha="1/2", beta="1/3", N=30)),
]


def tol(scale=1):
    return mpf(2) ** (-mp.prec // 2 - 40) * scale


def test_v_eval_examples():
    assert v_eval(IDENTITY, 0, 17) == 1
    assert v_eval(IDENTITY, 3, 5) == 60
    assert v_eval(IDENTITY, 2, IDENTITY.x_at(1)) == 0


def test_v_prime_examples():
    assert v_prime_at_node(IDENTITY, 2, 1) == -1
    assert v_prime_at_node(IDENTITY, 0, 0) == 1
    assert v_prime_at_node(IDENTITY, 3, 0) == -6


def test_v_prime_matches_product():
    p = preset("wilson", a="1/2", b="1/3", c="1/4", d="1/5")
    for k in range(6):
        for j in range(k, 12):
            expected = mpc(1)
            for i in range(j + 1):
                if i != k:
                    expected *= p.x_at(k) - p.x_at(i)
            assert abs(v_prime_at_node(p, j, k) - expected) <= tol(abs(expected))


def test_node_collision():
    p = FamilyParams(a1=1, a2=0, b0=0, b1=-3, b2=1, d1=0, d2=0)  # x_1 == x_2
    with pytest.raises(NodeCollisionError):
        v_prime_at_node(p, 3, 1)


def test_connection_examples(charlier1):
    assert connection_coeff(charlier1, 4, 4) == 1
    assert connection_coeff(charlier1, 2, 1) == -2
    assert connection_coeff(charlier1, 2, 0) == 1
    assert connection_row(charlier1, 2) == [1, -2, 1]


def test_inverse_examples(charlier1):
    assert inverse_coeff(charlier1, 3, 3) == 1
    assert inverse_coeff(charlier1, 2, 0) == 1
    p = preset("wilson", a="1/2", b="1/3", c="1/4", d="1/5")
    assert inverse_coeff(p, 1, 0) == p.g_at(1) / (p.h_at(0) - p.h_at(1))


def test_moment_examples(charlier1, hahn002):
    assert moment(charlier1, 0) == 1
    assert all(m == 1 for m in moments(charlier1, 15))
    assert moment(hahn002, 3) == 0
    assert moment(hahn002, 7) == 0


@pytest.mark.parametrize("name, args", FAMILIES)
def test_moment_ratio(name, args):
    p = preset(name, **args)
    ms = moments(p, 20)
    for k in range(19):
        if ms[k] == 0:
            assert ms[k + 1] == 0
            continue
        ratio = p.g_at(k + 1) / (p.h_at(0) - p.h_at(k + 1))
        assert abs(ms[k + 1] - ms[k] * ratio) <= tol(abs(ms[k + 1]))


@pytest.mark.parametrize("name, args", FAMILIES)
def test_moment_annihilation(name, args):
    p = preset(name, **args)
    for n in range(1, 26):
        row = connection_row(p, n)
        terms = [c * moment(p, k) for k, c in enumerate(row)]
        total = mp.fsum(terms)
        assert abs(total) <= tol(max(abs(t) for t in terms))


@pytest.mark.parametrize("name, args", FAMILIES)
def test_connection_inverse_identity(name, args):
    p = preset(name, **args)
    N = 15
    C = [[connection_coeff(p, n, k) if k <= n else mpc(0) for k in range(N)] for n in range(N)]
    H = [[inverse_coeff(p, n, k) if k <= n else mpc(0) for k in range(N)] for n in range(N)]
    for i in range(N):
        for j in range(N):
            terms = [C[i][l] * H[l][j] for l in range(N)]
            value = mp.fsum(terms)
            expected = 1 if i == j else 0
            assert abs(value - expected) <= tol(max(abs(t) for t in terms) + 1)


@pytest.mark.parametrize("name, args", FAMILIES)
def test_row_matches_single_coefficients(name, args):
    p = preset(name, **args)
    row = connection_row(p, 9)
    for k in range(10):
        assert abs(row[k] - connection_coeff(p, 9, k)) <= tol(abs(row[k]))


def test_newton_poly_annihilates_nodes():
    p = preset("charlier", a=1)
    poly = NewtonPoly((mpc(0), mpc(0), mpc(1)), p)  # v_2
    assert poly.degree == 2
    assert poly(p.x_at(0)) == 0 and poly(p.x_at(1)) == 0
    assert poly(5) == v_eval(p, 2, 5)


def test_moment_sequence_view(charlier1):
    seq = MomentSeq(charlier1, 5)
    assert len(seq) == 5
    assert list(seq) == [1] * 5
    assert seq[1:3] == [1, 1]
    with pytest.raises(IndexError):
        seq[5]


def test_tables_are_per_precision(charlier1):
    t256 = tables(charlier1)
    with mp.workprec(512):
        assert tables(charlier1) is not t256
    assert tables(charlier1) is t256


def test_concurrent_moment_reads():
    p = preset("meixner", c="1/3", beta="5/2")
    expected = [moment(preset("meixner", c="1/3", beta="5/2").scaled(1), k) for k in range(200)]
    fresh = FamilyParams(p.a1, p.a2, p.b0 + 0, p.b1, p.b2, p.d1, p.d2)
    out: list[list[mpc]] = []

    def work():
        mp.prec = 256
        out.append([tables(fresh).moment(k) for k in range(199, -1, -1)][::-1])

    threads = [threading.Thread(target=work) for _ in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    for seq in out:
        assert all(abs(a - b) <= tol(abs(b)) for a, b in zip(seq, expected))
