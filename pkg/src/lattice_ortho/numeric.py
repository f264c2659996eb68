"""Multiprecision helpers shared by every module.

All numerics run on :class:`mpmath.mpc` values at the current ``mp.prec``.
Callers pick the working precision with :func:`precision`.
"""
from __future__ import annotations

import os
from contextlib import contextmanager
from typing import Iterator, Union

from mpmath import mp, mpc, mpf, mpmathify, sqrt

Number = Union[int, float, str, mpf, mpc, complex]

DEFAULT_PRECISION = 256
MIN_PRECISION = 64
MAX_PRECISION = 4096
PRECISION_ENV = "LATTICE_ORTHO_PRECISION"


def default_precision() -> int:
    raw = os.environ.get(PRECISION_ENV)
    if raw is None:
        return DEFAULT_PRECISION
    bits = int(raw)
    check_precision(bits)
    return bits


def check_precision(bits: int) -> int:
    if not MIN_PRECISION <= bits <= MAX_PRECISION:
        raise ValueError(
            f"precision must be within [{MIN_PRECISION}, {MAX_PRECISION}] bits, got {bits}"
        )
    return bits


@contextmanager
def precision(bits: int) -> Iterator[int]:
    """Run the enclosed block at ``bits`` of working precision."""
    saved = mp.prec
    mp.prec = bits
    try:
        yield bits
    finally:
        mp.prec = saved


def parse_fraction(text: str) -> mpf:
    num, den = text.split("/", 1)
    return mpf(num.strip()) / mpf(den.strip())


def to_complex(value: Number) -> mpc:
    """Convert a number or a decimal / ``"a+bi"`` / ``"p/q"`` string to ``mpc``.

    Strings are parsed at the current precision, so ``"0.3"`` keeps every bit.
    """
    if isinstance(value, mpc):
        return value
    if isinstance(value, str):
        return _parse_complex(value)
    return mpc(mpmathify(value))


def _parse_real(text: str) -> mpf:
    if "/" in text:
        return parse_fraction(text)
    if text in ("", "+"):
        return mpf(1)
    if text == "-":
        return mpf(-1)
    return mpf(text)


def _parse_complex(value: str) -> mpc:
    text = value.strip().replace(" ", "")
    if not text:
        raise ValueError("empty number")
    try:
        if text[-1] not in "ij":
            return mpc(_parse_real(text))
        body = text[:-1]
        split = None
        for pos in range(len(body) - 1, 0, -1):
            if body[pos] in "+-" and body[pos - 1] not in "eE":
                split = pos
                break
        if split is None:
            return mpc(0, _parse_real(body))
        return mpc(_parse_real(body[:split]), _parse_real(body[split:]))
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"cannot parse complex number from {value!r}") from exc


def eps() -> mpf:
    return mpf(2) ** (-mp.prec)


def rel_tol() -> mpf:
    return mpf(2) ** (-(mp.prec // 2))


def abs_floor() -> mpf:
    return mpf(2) ** (-mp.prec + 8)


def is_zero(x: Number, scale: Number = 1) -> bool:
    """True when ``|x|`` is below the absolute floor, measured against ``scale``."""
    return abs(to_complex(x)) <= abs_floor() * max(mpf(1), abs(to_complex(scale)))


def close(a: Number, b: Number, rtol: mpf | None = None, atol: mpf | None = None) -> bool:
    a, b = to_complex(a), to_complex(b)
    rtol = rel_tol() if rtol is None else rtol
    atol = abs_floor() if atol is None else atol
    return abs(a - b) <= max(atol, rtol * max(abs(a), abs(b)))


def nearest_int(x: mpc) -> int | None:
    """Return ``n`` when ``x`` equals the integer ``n`` to working precision."""
    x = to_complex(x)
    n = int(mp.nint(x.real))
    if abs(x - n) <= abs_floor() * max(1, abs(n)) * 16:
        return n
    return None


def nonpositive_int(x: mpc) -> int | None:
    n = nearest_int(x)
    if n is not None and n <= 0:
        return n
    return None


def digits_for(bits: int) -> int:
    """Decimal digits that round-trip ``bits`` of binary precision."""
    return -(-bits * 302 // 1000) + 2


def cubic_roots(b: mpc, c: mpc, d: mpc) -> list[mpc]:
    """Roots of s^3 + b s^2 + c s + d by Cardano's formula (repeated roots allowed)."""
    shift = b / 3
    P = c - b * b / 3
    Q = 2 * b**3 / 27 - b * c / 3 + d
    R = sqrt(Q * Q / 4 + P**3 / 27)
    # larger of the two radicands keeps u away from cancellation
    A = -Q / 2 + R if abs(-Q / 2 + R) >= abs(-Q / 2 - R) else -Q / 2 - R
    if A == 0:
        return [-shift] * 3
    u = A ** (mpf(1) / 3)
    omega = mpc(-0.5, sqrt(mpf(3)) / 2)
    roots = []
    for j in range(3):
        uj = u * omega**j
        roots.append(uj - P / (3 * uj) - shift)
    return roots


def low_degree_roots(coeffs: list[mpc]) -> list[mpc]:
    """Roots of a polynomial of degree <= 3, coefficients constant term first."""
    coeffs = list(coeffs)
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    deg = len(coeffs) - 1
    if deg < 1:
        return []
    if deg > 3:
        raise ValueError("degree above 3")
    lead = coeffs[-1]
    monic = [c / lead for c in coeffs[:-1]]
    if deg == 1:
        return [-monic[0]]
    if deg == 2:
        c, b = monic
        disc = sqrt(b * b - 4 * c)
        big = (-b - disc) / 2 if abs(-b - disc) >= abs(-b + disc) else (-b + disc) / 2
        if big == 0:
            return [mpc(0), mpc(0)]
        return [big, c / big]
    d, c, b = monic
    return cubic_roots(b, c, d)
