"""Quadratic lattice sequences x_k, h_k, e_k, g_k and family validation.

A family is fixed by seven numbers. Nodes, eigenvalues and the auxiliary
sequence are quadratic in the index::

    x_k = b0 + b1 k + b2 k^2
    h_k =      a1 k + a2 k^2        (h_0 = 0)
    e_k =      d1 k + d2 k^2        (e_0 = 0)
    g_k = x_{k-1} (h_k - h_0) + e_k,   g_0 = 0
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, fields
from typing import Mapping

from mpmath import mp, mpc, mpf, workprec

from .errors import InvalidFamilyError
from .numeric import Number, is_zero, low_degree_roots, nearest_int, to_complex

PARAM_NAMES = ("a1", "a2", "b0", "b1", "b2", "d1", "d2")


class Case(enum.IntEnum):
    CASE1 = 1  # a2 != 0, b2 != 0
    CASE2 = 2  # a2 != 0, b2 == 0
    CASE3 = 3  # a2 == 0, b2 != 0
    CASE4 = 4  # a2 == 0, b2 == 0

    def __str__(self) -> str:
        return f"Case{self.value}"


@dataclass(frozen=True)
class QuadraticSeq:
    c0: mpc
    c1: mpc
    c2: mpc

    def __post_init__(self) -> None:
        for f in fields(self):
            object.__setattr__(self, f.name, to_complex(getattr(self, f.name)))

    def __call__(self, k: int) -> mpc:
        return self.c0 + self.c1 * k + self.c2 * k * k


def seq_eval(seq: QuadraticSeq, k: int) -> mpc:
    return seq(k)


@dataclass(frozen=True)
class FamilyParams:
    """The seven lattice parameters of one polynomial family.

    ``a0`` and ``d0`` are fixed to zero. Values are converted to ``mpc`` at the
    precision active when the instance is built.
    """

    a1: mpc
    a2: mpc
    b0: mpc
    b1: mpc
    b2: mpc
    d1: mpc
    d2: mpc

    def __post_init__(self) -> None:
        for name in PARAM_NAMES:
            object.__setattr__(self, name, to_complex(getattr(self, name)))
        if self.a1 == 0 and self.a2 == 0:
            raise InvalidFamilyError("a1 and a2 are both zero; h_k is constant")
        if self.b1 == 0 and self.b2 == 0:
            raise InvalidFamilyError("b1 and b2 are both zero; the nodes x_k coincide")

    @classmethod
    def from_mapping(cls, values: Mapping[str, Number]) -> "FamilyParams":
        missing = [n for n in PARAM_NAMES if n not in values]
        extra = [n for n in values if n not in PARAM_NAMES]
        if missing or extra:
            raise InvalidFamilyError(
                f"raw parameters need exactly {', '.join(PARAM_NAMES)}; "
                f"missing={missing} unexpected={extra}"
            )
        return cls(**{n: to_complex(values[n]) for n in PARAM_NAMES})

    @classmethod
    def parse(cls, text: str) -> "FamilyParams":
        """Parse ``"a1=1,a2=0,b0=0,b1=1,b2=0,d1=0,d2=-1"``."""
        values: dict[str, str] = {}
        for item in text.split(","):
            if not item.strip():
                continue
            key, sep, val = item.partition("=")
            if not sep:
                raise InvalidFamilyError(f"expected name=value, got {item!r}")
            values[key.strip()] = val.strip()
        return cls.from_mapping(values)

    def as_dict(self) -> dict[str, mpc]:
        return {n: getattr(self, n) for n in PARAM_NAMES}

    def scaled(self, lam: Number) -> "FamilyParams":
        """Joint scaling of (a1, a2, d1, d2); observables do not change."""
        lam = to_complex(lam)
        return FamilyParams(
            self.a1 * lam, self.a2 * lam, self.b0, self.b1, self.b2,
            self.d1 * lam, self.d2 * lam,
        )

    @property
    def x(self) -> QuadraticSeq:
        return QuadraticSeq(self.b0, self.b1, self.b2)

    @property
    def h(self) -> QuadraticSeq:
        return QuadraticSeq(0, self.a1, self.a2)

    @property
    def e(self) -> QuadraticSeq:
        return QuadraticSeq(0, self.d1, self.d2)

    @property
    def case(self) -> Case:
        return classify(self)

    def x_at(self, k: int) -> mpc:
        return self.b0 + self.b1 * k + self.b2 * k * k

    def h_at(self, k: int) -> mpc:
        return self.a1 * k + self.a2 * k * k

    def g_at(self, k: int) -> mpc:
        return g_eval(self, k)


def g_eval(params: FamilyParams, k: int) -> mpc:
    if k == 0:
        return mpc(0)
    return params.x_at(k - 1) * params.h_at(k) + params.d1 * k + params.d2 * k * k


def g_reduced_coeffs(params: FamilyParams) -> list[mpc]:
    """Coefficients (constant first) of the cubic G with g_k = k G(k)."""
    p = params
    B2 = p.b2
    B1 = p.b1 - 2 * p.b2
    B0 = p.b0 - p.b1 + p.b2
    return [
        B0 * p.a1 + p.d1,
        B0 * p.a2 + B1 * p.a1 + p.d2,
        B1 * p.a2 + B2 * p.a1,
        B2 * p.a2,
    ]


def _scale(*values: mpc) -> mpf:
    return max([mpf(1)] + [abs(v) for v in values])


def classify(params: FamilyParams) -> Case:
    a2_zero = is_zero(params.a2, _scale(params.a1))
    b2_zero = is_zero(params.b2, _scale(params.b1, params.b0))
    if not a2_zero:
        return Case.CASE2 if b2_zero else Case.CASE1
    return Case.CASE4 if b2_zero else Case.CASE3


def _positive_integer_collision(c1: mpc, c2: mpc) -> int | None:
    """Smallest n >= 1 with c1 + c2 n == 0, i.e. s_k == s_j whenever k + j == n."""
    if is_zero(c2, _scale(c1)):
        return None
    n = nearest_int(-c1 / c2)
    if n is not None and n >= 1:
        return n
    return None


def termination_index(params: FamilyParams) -> int | None:
    """Smallest k >= 1 with g_k == 0, found from the roots of g_k / k."""
    coeffs = g_reduced_coeffs(params)
    scale = _scale(*coeffs)
    while coeffs and is_zero(coeffs[-1], scale):
        coeffs.pop()
    if not coeffs:
        return 1
    if len(coeffs) == 1:
        return None
    with workprec(mp.prec + 64):
        roots = low_degree_roots(coeffs)
    found = []
    for root in roots:
        n = nearest_int(root)
        if n is not None and n >= 1 and is_zero(g_eval(params, n), _g_scale(params, n)):
            found.append(n)
    return min(found) if found else None


def _g_scale(params: FamilyParams, k: int) -> mpf:
    return _scale(
        params.x_at(k - 1) * params.h_at(k), params.d1 * k, params.d2 * k * k
    )


@dataclass
class ValidationReport:
    case_id: Case
    h_distinct_ok: bool
    x_distinct_ok: bool
    g_nonzero_up_to: int
    terminating_at: int | None
    alpha_nonzero_up_to: int
    horizon: int
    messages: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.h_distinct_ok and self.x_distinct_ok and self.alpha_nonzero_up_to >= min(
            self.horizon, (self.terminating_at or self.horizon + 1) - 1
        )

    @property
    def finite_size(self) -> int | None:
        """Number of nodes of a terminating family (N + 1), else None."""
        return self.terminating_at

    def as_dict(self) -> dict:
        return {
            "case": str(self.case_id),
            "h_distinct_ok": self.h_distinct_ok,
            "x_distinct_ok": self.x_distinct_ok,
            "g_nonzero_up_to": self.g_nonzero_up_to,
            "terminating_at": self.terminating_at,
            "alpha_nonzero_up_to": self.alpha_nonzero_up_to,
            "horizon": self.horizon,
            "ok": self.ok,
            "messages": list(self.messages),
        }


def _distinct(name: str, c1: mpc, c2: mpc, horizon: int, messages: list[str]) -> bool:
    ok = True
    # s_k - s_j = (k - j)(c1 + c2 (k + j)); only k + j matters
    scale = _scale(c1, c2 * 2 * horizon)
    for total in range(1, 2 * horizon):
        if is_zero(c1 + c2 * total, scale):
            k = total // 2 + 1
            messages.append(f"{name}_{k} == {name}_{total - k} (collision at index sum {total})")
            ok = False
            break
    n = _positive_integer_collision(c1, c2)
    if n is not None and n >= 2 * horizon:
        k = n // 2 + 1
        messages.append(
            f"{name}_{k} == {name}_{n - k}: collision beyond horizon {horizon}"
        )
    return ok


def validate(params: FamilyParams, horizon: int = 20) -> ValidationReport:
    """Check distinctness, termination and quasi-definiteness up to ``horizon``.

    Never raises for a well-formed ``FamilyParams``; failures go to ``messages``.
    """
    from .recurrence import alpha_with_scale

    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    messages: list[str] = []
    case = classify(params)
    h_ok = _distinct("h", params.a1, params.a2, horizon, messages)
    x_ok = _distinct("x", params.b1, params.b2, horizon, messages)

    sweep_zero = None
    for k in range(1, horizon + 1):
        if is_zero(g_eval(params, k), _g_scale(params, k)):
            sweep_zero = k
            break
    term = termination_index(params)
    if sweep_zero is not None and (term is None or sweep_zero < term):
        term = sweep_zero
    g_up_to = horizon if term is None or term > horizon else term - 1
    if term is not None:
        messages.append(f"g_{term} == 0: finite family with {term} nodes (N = {term - 1})")

    alpha_up_to = 0
    for n in range(1, horizon + 1):
        try:
            value, scale = alpha_with_scale(params, n)
        except ZeroDivisionError:
            messages.append(f"alpha_{n} undefined: eigenvalue collision")
            break
        if is_zero(value, scale):
            if term is not None and n == term:
                messages.append(f"alpha_{n} == 0 closes the finite family")
            else:
                messages.append(f"alpha_{n} == 0: functional is not quasi-definite")
            break
        alpha_up_to = n
    return ValidationReport(
        case_id=case,
        h_distinct_ok=h_ok,
        x_distinct_ok=x_ok,
        g_nonzero_up_to=g_up_to,
        terminating_at=term,
        alpha_nonzero_up_to=alpha_up_to,
        horizon=horizon,
        messages=messages,
    )
