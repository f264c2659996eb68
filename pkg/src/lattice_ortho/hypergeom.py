"""Generalized hypergeometric series with convergence-aware summation.

A :class:`HypSeries` stands for::

    prefactor * t**prefactor_power * sum_k prod(upper)_k / prod(lower)_k * (scale t)**k / k!

Summation is term-recursive. Terminating series are summed exactly, series
with a geometric ratio are summed until the tail bound drops below working
precision, and unit-argument series are handled by a direct tail bound when
that suffices and by a cross-validated Levin u-transform otherwise.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

from mpmath import gamma, inf, levin, mp, mpc, mpf, rgamma, workprec

from .errors import SeriesDefinitionError
from .numeric import Number, nonpositive_int, to_complex


class SeriesStatus(enum.Enum):
    TERMINATED = "Terminated"
    CONVERGED_BY_TAIL = "ConvergedByTail"
    ACCELERATED_CONVERGED = "AcceleratedConverged"
    FAILED_TO_CONVERGE = "FailedToConverge"

    def __str__(self) -> str:
        return self.value

    @property
    def ok(self) -> bool:
        return self is not SeriesStatus.FAILED_TO_CONVERGE


@dataclass(frozen=True)
class SummationOptions:
    tolerance: float = 1e-30
    max_terms: int = 20000
    levin_max_order: int = 200
    max_precision: int = 2048
    # Gauss / Thomae rewrites of unit-argument 2F1 and 3F2 before summing
    transformations: bool = True


@dataclass(frozen=True)
class SeriesValue:
    value: mpc
    terms_used: int
    tail_estimate: mpf
    status: SeriesStatus
    precision: int = 0
    message: str = ""


def shifted_factorial(a: Number, k: int) -> mpc:
    """(a)_k = a (a+1) ... (a+k-1), with (a)_0 = 1."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    a = to_complex(a)
    value = mpc(1)
    for i in range(k):
        value *= a + i
    return value


def _prod(values: Sequence[mpc]) -> mpc:
    out = mpc(1)
    for v in values:
        out *= v
    return out


@dataclass(frozen=True)
class HypSeries:
    upper: tuple[mpc, ...]
    lower: tuple[mpc, ...]
    scale: mpc = field(default_factory=lambda: mpc(1))
    prefactor: mpc = field(default_factory=lambda: mpc(1))
    prefactor_power: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "upper", tuple(to_complex(a) for a in self.upper))
        object.__setattr__(self, "lower", tuple(to_complex(b) for b in self.lower))
        object.__setattr__(self, "scale", to_complex(self.scale))
        object.__setattr__(self, "prefactor", to_complex(self.prefactor))

    @property
    def termination_degree(self) -> int | None:
        degrees = [-n for a in self.upper if (n := nonpositive_int(a)) is not None]
        if self.scale == 0:
            degrees.append(0)
        return min(degrees) if degrees else None

    @property
    def terminating(self) -> bool:
        return self.termination_degree is not None

    def parametric_excess(self) -> mpc:
        return sum(self.lower, mpc(0)) - sum(self.upper, mpc(0))

    def term_ratio(self, n: int, t: mpc = mpc(1)) -> mpc:
        """c_{n+1} / c_n of the inner series at argument t."""
        num = _prod([a + n for a in self.upper])
        den = _prod([b + n for b in self.lower]) * (n + 1)
        return num / den * self.scale * t

    def check_defined(self) -> None:
        degree = self.termination_degree
        for b in self.lower:
            m = nonpositive_int(b)
            if m is None:
                continue
            # (b)_k vanishes for k > -b; terms up to the degree must avoid it
            if degree is None or degree > -m:
                raise SeriesDefinitionError(
                    f"lower parameter {m} is a nonpositive integer reached before termination"
                )

    def inner_coefficients(self, count: int) -> list[mpc]:
        """Taylor coefficients c_0..c_{count-1} of the bare sum (no prefactor)."""
        out: list[mpc] = []
        c = mpc(1)
        for n in range(count):
            out.append(c)
            if c != 0:
                c = c * self.term_ratio(n)
        return out

    def taylor(self, count: int) -> list[mpc]:
        """Coefficients of t^0 .. t^{count-1} of the full function."""
        p = self.prefactor_power
        inner = self.inner_coefficients(max(count - p, 0))
        return [mpc(0)] * min(p, count) + [self.prefactor * c for c in inner]

    def with_prefactor(self, factor: Number, power: int = 0) -> "HypSeries":
        return replace(
            self,
            prefactor=self.prefactor * to_complex(factor),
            prefactor_power=self.prefactor_power + power,
        )


def parametric_excess(s: HypSeries) -> mpc:
    return s.parametric_excess()


def derivative_series(s: HypSeries, k: int) -> HypSeries:
    """k-th t-derivative of a series with no t-power prefactor, as a new series."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k == 0:
        return s
    if s.prefactor_power != 0:
        raise ValueError("derivative_series needs prefactor_power == 0")
    den = _prod([shifted_factorial(b, k) for b in s.lower])
    if den == 0:
        raise SeriesDefinitionError("lower parameter collides with a nonpositive integer")
    num = _prod([shifted_factorial(a, k) for a in s.upper])
    return HypSeries(
        tuple(a + k for a in s.upper),
        tuple(b + k for b in s.lower),
        s.scale,
        s.prefactor * num / den * s.scale**k,
        0,
    )


def _failed(message: str, terms: int = 0) -> SeriesValue:
    return SeriesValue(mpc(mp.nan, mp.nan), terms, mpf(inf), SeriesStatus.FAILED_TO_CONVERGE,
                       mp.prec, message)


def _bits(x: mpf) -> float:
    return float(mp.log(x, 2)) if x > 0 else -math.inf


def sum_series(
    first: Callable[[], mpc],
    ratio: Callable[[int], mpc],
    *,
    opts: SummationOptions,
    count: int | None = None,
    limit: mpf | None = None,
    excess: mpc | None = None,
) -> SeriesValue:
    """Sum t_0 + t_1 + ... given t_0 and the ratios t_{n+1} / t_n.

    ``count`` is the number of nonzero terms of a terminating series. For an
    infinite series ``limit`` is |lim t_{n+1}/t_n| and ``excess`` the decay
    exponent offset (terms ~ n^(-1-excess)) used when ``limit == 1``. The
    callables are evaluated at whatever precision is active, so the same
    series can be re-summed after escalation.
    """
    target_prec = mp.prec
    if count is not None:
        return _sum_finite(first, ratio, count, target_prec, opts)
    if limit is None or limit == inf or limit > 1:
        return _failed("terms do not decay: |argument| exceeds the radius of convergence")
    if limit < 1:
        value = _sum_geometric(first, ratio, limit, target_prec, opts)
        if value.status.ok:
            return value
        # very slow geometric decay: fall through to acceleration
    if excess is not None and limit == 1 and excess.real <= 0:
        return _failed(f"parametric excess {mp.nstr(excess, 8)} has nonpositive real part")
    return _sum_unit(first, ratio, excess, target_prec, opts)


def _sum_finite(first, ratio, count, target_prec, opts) -> SeriesValue:
    guard = 64
    while True:
        with workprec(target_prec + guard):
            t = first()
            terms = [t]
            for n in range(count - 1):
                if t == 0:
                    break
                t = t * ratio(n)
                terms.append(t)
            total = mp.fsum(terms)
            biggest = max(abs(x) for x in terms)
        lost = _bits(biggest) - _bits(abs(total)) if total != 0 else 0
        if lost < guard - 16 or target_prec + guard >= opts.max_precision:
            with workprec(target_prec):
                return SeriesValue(+total, count, mpf(0), SeriesStatus.TERMINATED, target_prec + guard)
        guard = min(int(lost) + 64, opts.max_precision - target_prec)


def _sum_geometric(first, ratio, limit, target_prec, opts) -> SeriesValue:
    guard = 64
    while True:
        with workprec(target_prec + guard):
            t = first()
            terms = [t]
            running = t
            tail = mpf(inf)
            rel = mpf(2) ** (-target_prec - 8)
            floor = mpf(2) ** (-target_prec) * abs(t)
            n = 0
            while n < opts.max_terms:
                r = ratio(n)
                t = t * r
                terms.append(t)
                running += t
                n += 1
                if t == 0:
                    tail = mpf(0)
                    break
                rho = max(abs(r), mpf(limit))
                if n >= 4 and rho < 1:
                    tail = abs(t) * rho / (1 - rho)
                    if tail <= rel * max(abs(running), floor):
                        break
            else:
                return _failed("geometric series exceeded max_terms", n)
            total = mp.fsum(terms)
            biggest = max(abs(x) for x in terms)
        lost = _bits(biggest) - _bits(abs(total)) if total != 0 else 0
        if lost < guard - 16 or target_prec + guard >= opts.max_precision:
            status = SeriesStatus.TERMINATED if tail == 0 else SeriesStatus.CONVERGED_BY_TAIL
            with workprec(target_prec):
                return SeriesValue(+total, len(terms), +tail, status, target_prec + guard)
        guard = min(int(lost) + 64, opts.max_precision - target_prec)


def _monotone_tail(terms: list[mpc], ratios: list[mpc], excess: mpc | None) -> mpf | None:
    """Integral-comparison tail bound |t_K| K / Re(excess) once |ratio| creeps up to 1."""
    if excess is None or excess.real <= 0 or len(ratios) < 3:
        return None
    last = [abs(r) for r in ratios[-3:]]
    if not (last[0] <= last[1] <= last[2] < 1):
        return None
    k = len(terms) - 1
    return abs(terms[-1]) * k / excess.real


def _sum_unit(first, ratio, excess, target_prec, opts) -> SeriesValue:
    tol = mpf(opts.tolerance)
    prec = 2 * target_prec
    note = ""
    while prec <= max(opts.max_precision, 2 * target_prec):
        with workprec(prec):
            accel = levin(method="levin", variant="u")
            t = first()
            terms = [t]
            ratios: list[mpc] = []
            partial = [t]
            best_err = mpf(inf)
            best_order = 0
            recent: list[mpf] = []
            value = t
            for n in range(opts.levin_max_order):
                r = ratio(n)
                ratios.append(r)
                t = t * r
                if t == 0:
                    total = mp.fsum(terms)
                    with workprec(target_prec):
                        return SeriesValue(+total, len(terms), mpf(0), SeriesStatus.TERMINATED, prec)
                terms.append(t)
                partial.append(partial[-1] + t)
                bound = _monotone_tail(terms, ratios, excess)
                if bound is not None and bound <= tol * abs(partial[-1]):
                    with workprec(target_prec):
                        return SeriesValue(+mp.fsum(terms), len(terms), +bound,
                                           SeriesStatus.CONVERGED_BY_TAIL, prec)
                if len(partial) < 4:
                    continue
                try:
                    value, err = accel.update_psum(partial)
                except (ValueError, ZeroDivisionError):
                    break
                if err < best_err:
                    best_err, best_order = err, n
                if abs(r) >= 1:
                    # still climbing: transform agreement here is not trustworthy
                    recent.clear()
                    best_order = n
                elif err <= tol * max(abs(value), mpf(2) ** (-target_prec)):
                    recent.append(err)
                    if len(recent) >= 3:
                        with workprec(target_prec):
                            return SeriesValue(+value, len(terms), +max(recent),
                                               SeriesStatus.ACCELERATED_CONVERGED, prec)
                else:
                    recent.clear()
                if n - best_order > 30:
                    break  # cancellation is winning; more bits needed
            note = f"Levin orders disagree by {mp.nstr(best_err, 3)} at {prec} bits"
        prec *= 2
    return _failed(note or "acceleration did not converge")


def _pole(x: mpc) -> bool:
    return nonpositive_int(x) is not None


def _unit_transform(s: HypSeries, t: mpc, opts: SummationOptions) -> SeriesValue | None:
    """Closed-form or better-converging rewrite of a series at argument one.

    2F1 uses Gauss's summation. 3F2 uses Thomae's relation
    3F2(a,b,c;d,e;1) = G(d)G(e)G(s)/(G(a)G(s+b)G(s+c)) 3F2(d-a,e-a,s;s+b,s+c;1)
    with a the upper parameter of largest real part, whose image has excess a.
    Returns None when no rewrite applies.
    """
    outer = s.prefactor * t**s.prefactor_power
    excess = s.parametric_excess()
    if excess.real <= 0:
        return None
    if len(s.upper) == 2 and len(s.lower) == 1:
        a, b = s.upper
        c = s.lower[0]
        if _pole(c) or _pole(excess):
            return None
        with workprec(mp.prec + 32):
            value = outer * gamma(c) * gamma(excess) * rgamma(c - a) * rgamma(c - b)
        return SeriesValue(+value, 0, mpf(0), SeriesStatus.CONVERGED_BY_TAIL, mp.prec,
                           "Gauss summation at unit argument")
    if len(s.upper) == 3 and len(s.lower) == 2:
        order = sorted(range(3), key=lambda i: s.upper[i].real, reverse=True)
        a = s.upper[order[0]]
        b, c = s.upper[order[1]], s.upper[order[2]]
        d, e = s.lower
        if a.real < excess.real + 1:
            return None
        new_lower = (excess + b, excess + c)
        if any(_pole(x) for x in (d, e, excess) + new_lower):
            return None
        image = HypSeries((d - a, e - a, excess), new_lower)
        with workprec(mp.prec + 32):
            factor = gamma(d) * gamma(e) * gamma(excess) * rgamma(a) * rgamma(new_lower[0]) * rgamma(new_lower[1])
        inner = eval_at(image, 1, replace(opts, transformations=False))
        if not inner.status.ok:
            return None
        return SeriesValue(outer * factor * inner.value, inner.terms_used,
                           abs(outer * factor) * inner.tail_estimate, inner.status,
                           inner.precision, "Thomae image at unit argument")
    return None


def eval_at(s: HypSeries, t: Number = 1, opts: SummationOptions | None = None) -> SeriesValue:
    """Value of the series at ``t`` with convergence diagnostics."""
    opts = opts or SummationOptions()
    t = to_complex(t)
    s.check_defined()
    if s.prefactor == 0:
        return SeriesValue(mpc(0), 0, mpf(0), SeriesStatus.TERMINATED, mp.prec)
    if t == 0:
        value = s.prefactor if s.prefactor_power == 0 else mpc(0)
        return SeriesValue(value, 1, mpf(0), SeriesStatus.TERMINATED, mp.prec)

    def first() -> mpc:
        return s.prefactor * t**s.prefactor_power

    def ratio(n: int) -> mpc:
        return s.term_ratio(n, t)

    degree = s.termination_degree
    if degree is not None:
        return sum_series(first, ratio, opts=opts, count=degree + 1)
    p, q = len(s.upper), len(s.lower)
    if p > q + 1:
        return _failed("more upper than lower parameters plus one: zero radius of convergence")
    if p < q + 1:
        return sum_series(first, ratio, opts=opts, limit=mpf(0))
    z = abs(s.scale * t)
    if abs(z - 1) <= mpf(2) ** (-(mp.prec // 2)):
        if opts.transformations and abs(s.scale * t - 1) <= mpf(2) ** (-(mp.prec // 2)):
            shortcut = _unit_transform(s, t, opts)
            if shortcut is not None:
                return shortcut
        return sum_series(first, ratio, opts=opts, limit=mpf(1), excess=s.parametric_excess())
    if z > 1:
        return _failed(f"|scale * t| = {mp.nstr(z, 8)} > 1 for a nonterminating series")
    return sum_series(first, ratio, opts=opts, limit=z, excess=s.parametric_excess())
