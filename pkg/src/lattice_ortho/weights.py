"""Discrete weights r_k = f_k(1) on the lattice nodes.

Two independent routes compute every weight:

* the closed hypergeometric form of f_k, obtained from canonical parameters
  (p, r, y1, y2) / (y, z) and the k-fold derivative of the f_0 series;
* the raw Newton-basis series sum_{j >= k} m_j / v'_{j+1}(x_k), which never
  touches the canonical parameters.

A third, :func:`weights_oracle`, solves the truncated triangular moment
system by back substitution.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

from mpmath import inf, levin, mp, mpc, mpf, sqrt, workprec

from .connection import tables, v_prime_at_node
from .errors import (
    CanonicalizationError,
    ConvergenceConditionError,
    InvalidFamilyError,
    NodeCollisionError,
)
from .hypergeom import (
    HypSeries,
    SeriesStatus,
    SeriesValue,
    SummationOptions,
    derivative_series,
    eval_at,
    shifted_factorial,
    sum_series,
)
from .lattice import Case, FamilyParams, classify, g_reduced_coeffs, termination_index
from .numeric import close, cubic_roots, is_zero

CERTIFY_TERMS = 12


@dataclass(frozen=True)
class CanonicalParams:
    """Hypergeometric parameters of f_0 for one family.

    Case 1 uses (p, r, y1, y2), Case 2 (r, y1, y2), Case 3 (p, y1, y2) and
    Case 4 (y, z). A Case 4 family with z == 0 has f_0(t) = exp(rate * t),
    in which case ``y`` is None.
    """

    case: Case
    params: FamilyParams
    p: mpc | None = None
    r: mpc | None = None
    y1: mpc | None = None
    y2: mpc | None = None
    y: mpc | None = None
    z: mpc | None = None
    rate: mpc | None = None
    residual: mpf = field(default_factory=lambda: mpf(0))

    @property
    def y3(self) -> mpc:
        """Third upper parameter of the Case 1 3F2."""
        return self.p + self.r - self.y1 - self.y2 - 1

    @property
    def exponential(self) -> bool:
        return self.case is Case.CASE4 and self.y is None

    def as_dict(self) -> dict[str, mpc]:
        names = {
            Case.CASE1: ("p", "r", "y1", "y2"),
            Case.CASE2: ("r", "y1", "y2"),
            Case.CASE3: ("p", "y1", "y2"),
            Case.CASE4: ("rate",) if self.exponential else ("y", "z"),
        }[self.case]
        return {n: getattr(self, n) for n in names}


def _pair_from_sum_product(s: mpc, q: mpc) -> tuple[mpc, mpc]:
    disc = sqrt(s * s - 4 * q)
    return (s + disc) / 2, (s - disc) / 2


def direct_coefficients(params: FamilyParams, k: int, count: int) -> list[mpc]:
    """Coefficients of t^0 .. t^{count-1} of f_k from the Newton-basis definition."""
    tab = tables(params)
    out = []
    for j in range(count):
        if j < k:
            out.append(mpc(0))
        else:
            out.append(tab.moment(j) / tab.vprime(j, k))
    return out


def _certify(params: FamilyParams, series: HypSeries) -> mpf | None:
    """Largest relative mismatch of the first coefficients, or None when certified."""
    expected = direct_coefficients(params, 0, CERTIFY_TERMS)
    got = series.taylor(CERTIFY_TERMS)
    worst = mpf(0)
    ok = True
    for a, b in zip(expected, got):
        if not close(a, b):
            ok = False
        scale = max(abs(a), abs(b), mpf(1))
        worst = max(worst, abs(a - b) / scale)
    return None if ok else worst


def _case1_candidates(params: FamilyParams) -> list[tuple[mpc, mpc]]:
    a1, a2, b0, b1, b2, d1, d2 = (getattr(params, n) for n in ("a1", "a2", "b0", "b1", "b2", "d1", "d2"))
    r = a1 / a2 + 1
    p = b1 / b2 + 1
    big_d1 = (d1 / a2 + (r - 1) * b0) / b2
    big_d2 = (d2 / a2 + b0) / b2
    u = p + r
    k0 = big_d2 + r * (p - 1) + 1
    rhs = big_d1 - (r - 1) * (p - 2)
    # eliminate q = y1 y2: (s^2 - u s + k0)(u - 2 - s) = rhs
    with workprec(mp.prec + 64):
        roots = cubic_roots(-(2 * u - 2), u * u - 2 * u + k0, -k0 * (u - 2) + rhs)
    out = []
    for s in roots:
        s = +s
        q = big_d2 - s * (u - s - 1) + r * (p - 1)
        out.append((s, q))
    return out


def canonicalize(params: FamilyParams) -> CanonicalParams:
    """Recover the hypergeometric parameters of f_0 and certify them."""
    return _canonicalize_at(params, mp.prec)


@lru_cache(maxsize=256)
def _canonicalize_at(params: FamilyParams, prec: int) -> CanonicalParams:
    case = classify(params)
    a1, a2, b0, b1, b2, d1, d2 = (getattr(params, n) for n in ("a1", "a2", "b0", "b1", "b2", "d1", "d2"))
    try:
        if case is Case.CASE4:
            denom = a1 * b1 + d2
            if is_zero(denom, max(abs(a1 * b1), abs(d2), mpf(1))):
                canon = CanonicalParams(case, params, z=mpc(0),
                                        rate=(a1 * b0 - a1 * b1 + d1) / (a1 * b1))
            else:
                canon = CanonicalParams(case, params, y=(a1 * b0 + d1 + d2) / denom,
                                        z=1 + d2 / (a1 * b1))
            candidates = [canon]
        elif case is Case.CASE3:
            p = b1 / b2 + 1
            s = p - 1 + d2 / (a1 * b2)
            q = (d1 / a1 + b0) / b2 + s + 1 - p
            y1, y2 = _pair_from_sum_product(s, q)
            candidates = [CanonicalParams(case, params, p=p, y1=y1, y2=y2)]
        elif case is Case.CASE2:
            r = a1 / a2 + 1
            s = (d2 / a2 + b0) / b1 + r
            q = (d1 / a2 + b0 * (r - 1)) / b1 - r + s
            y1, y2 = _pair_from_sum_product(s, q)
            candidates = [CanonicalParams(case, params, r=r, y1=y1, y2=y2)]
        else:
            r = a1 / a2 + 1
            p = b1 / b2 + 1
            candidates = []
            for s, q in _case1_candidates(params):
                y1, y2 = _pair_from_sum_product(s, q)
                candidates.append(CanonicalParams(case, params, p=p, r=r, y1=y1, y2=y2))
    except ZeroDivisionError as exc:
        raise CanonicalizationError(f"{case}: a denominator of the parameter change vanishes") from exc

    residuals = []
    for canon in candidates:
        try:
            series = f0_series(canon)
            mismatch = _certify(params, series)
        except (ZeroDivisionError, NodeCollisionError) as exc:
            residuals.append(str(exc))
            continue
        if mismatch is None:
            return canon
        residuals.append(mp.nstr(mismatch, 5))
    raise CanonicalizationError(
        f"{case}: no parameter candidate reproduces f_0 (residuals {residuals})"
    )


def f0_series(canon: CanonicalParams) -> HypSeries:
    c = canon
    if c.case is Case.CASE1:
        return HypSeries((c.y1, c.y2, c.y3), (c.r, c.p))
    if c.case is Case.CASE2:
        return HypSeries((c.y1, c.y2), (c.r,))
    if c.case is Case.CASE3:
        return HypSeries((c.y1, c.y2), (c.p,))
    if c.exponential:
        return HypSeries((), (), scale=c.rate)
    return HypSeries((c.y, mpc(1)), (mpc(1),), scale=c.z)


def _sign_factorial(k: int) -> mpf:
    return mpf(-1) ** k / mp.factorial(k)


def _explicit(canon: CanonicalParams, k: int) -> HypSeries:
    c = canon
    if c.case in (Case.CASE1, Case.CASE3):
        uppers = (c.y1, c.y2, c.y3) if c.case is Case.CASE1 else (c.y1, c.y2)
        lowers_k = (c.r,) if c.case is Case.CASE1 else ()
        num = mpc(1)
        for a in uppers:
            num *= shifted_factorial(a, k)
        den = shifted_factorial(c.p - 1 + k, k)
        for b in lowers_k:
            den *= shifted_factorial(b, k)
        if den == 0 or is_zero(den):
            raise InvalidFamilyError(f"f_{k}: prefactor denominator vanishes (node collision)")
        base = HypSeries(
            tuple(a + k for a in uppers),
            tuple(b + k for b in lowers_k) + (c.p + 2 * k,),
        )
        return base.with_prefactor(_sign_factorial(k) * num / den, k)
    # Cases 2 and 4: plain k-th derivative of f_0
    return derivative_series(f0_series(c), k).with_prefactor(_sign_factorial(k), k)


def fk_series(canon: CanonicalParams, k: int, form: str = "derivative") -> HypSeries:
    """f_k as a hypergeometric series with prefactor (-1)^k t^k / k! folded in.

    ``form="derivative"`` differentiates the base series (lower parameter p+k
    in Cases 1 and 3); ``form="explicit"`` builds the shifted series directly.
    A vanishing p + k - 1 reroutes to the explicit form.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    if form not in ("derivative", "explicit"):
        raise ValueError(f"unknown form {form!r}")
    c = canon
    if form == "explicit":
        return _explicit(c, k)
    if c.case in (Case.CASE1, Case.CASE3):
        pole = c.p + k - 1
        if is_zero(pole, abs(c.p) + k):
            return _explicit(c, k)
        lowers = (c.r, c.p + k) if c.case is Case.CASE1 else (c.p + k,)
        uppers = (c.y1, c.y2, c.y3) if c.case is Case.CASE1 else (c.y1, c.y2)
        base = HypSeries(uppers, lowers)
        factor = _sign_factorial(k) * (c.p + 2 * k - 1) / pole
        return derivative_series(base, k).with_prefactor(factor, k)
    return derivative_series(f0_series(c), k).with_prefactor(_sign_factorial(k), k)


def convergence_condition(params: FamilyParams, canon: CanonicalParams | None = None) -> tuple[bool, str]:
    """Family-level condition for f_k(1) to converge, before any summation."""
    canon = canon or canonicalize(params)
    f0 = f0_series(canon)
    if f0.terminating:
        return True, "terminating series"
    case = canon.case
    p = params
    if case is Case.CASE1:
        return True, "parametric excess is 1"
    if case is Case.CASE2:
        value = -(p.a2 * p.b0 + p.d2) / (p.a2 * p.b1)
        ok = value.real > 0
        return ok, f"Re(-(a2 b0 + d2)/(a2 b1)) = {mp.nstr(value.real, 10)} must be > 0"
    if case is Case.CASE3:
        value = 1 - p.d2 / (p.a1 * p.b2)
        ok = value.real > 0
        return ok, f"Re(1 - d2/(a1 b2)) = {mp.nstr(value.real, 10)} must be > 0"
    if canon.exponential:
        return True, "f_0 is an exponential"
    z = abs(canon.z)
    return z < 1, f"|z| = |1 + d2/(a1 b1)| = {mp.nstr(z, 10)} must be < 1"


def _as_canon(obj: FamilyParams | CanonicalParams) -> CanonicalParams:
    return obj if isinstance(obj, CanonicalParams) else canonicalize(obj)


def check_weight_convergence(canon: CanonicalParams, k: int) -> HypSeries:
    """Raise ConvergenceConditionError if r_k cannot converge; return the f_k series."""
    ok, why = convergence_condition(canon.params, canon)
    if not ok:
        raise ConvergenceConditionError(f"{canon.case}: {why}")
    series = fk_series(canon, k)
    if series.prefactor == 0 or series.terminating or series.scale == 0:
        return series
    if len(series.upper) == len(series.lower) + 1 and abs(series.scale) >= 1:
        excess = series.parametric_excess()
        if excess.real <= 0:
            raise ConvergenceConditionError(
                f"{canon.case}: f_{k}(1) diverges, parametric excess of its series is "
                f"{mp.nstr(excess, 8)}"
            )
    return series


def weight(obj: FamilyParams | CanonicalParams, k: int,
           opts: SummationOptions | None = None) -> tuple[mpc, SeriesValue]:
    """r_k = f_k(1) via the closed hypergeometric form."""
    canon = _as_canon(obj)
    series = check_weight_convergence(canon, k)
    result = eval_at(series, 1, opts)
    return result.value, result


def _poly_shift(coeffs: Sequence[mpc], shift: int) -> list[mpc]:
    """Coefficients of P(n + shift) given those of P(n), constant first."""
    out = [mpc(0)] * len(coeffs)
    for i, c in enumerate(coeffs):
        # (n + shift)^i expanded binomially
        for j in range(i + 1):
            out[j] += c * mp.binomial(i, j) * mpf(shift) ** (i - j)
    return out


def _poly_mul(a: Sequence[mpc], b: Sequence[mpc]) -> list[mpc]:
    out = [mpc(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _trim(coeffs: list[mpc]) -> list[mpc]:
    scale = max([mpf(1)] + [abs(c) for c in coeffs])
    while len(coeffs) > 1 and is_zero(coeffs[-1], scale):
        coeffs = coeffs[:-1]
    return coeffs


def _direct_asymptotics(params: FamilyParams, k: int) -> tuple[mpf, mpc | None]:
    """|lim ratio| and excess of the Newton-basis series for r_k.

    In n = j - k the term ratio is
    G(n+k+1) / ((a1 + a2 (n+k+1)) (n+1) (b1 + b2 (n+2k+1))), with g_j = j G(j).
    """
    p = params
    num = _trim(_poly_shift(g_reduced_coeffs(p), k + 1))
    den = _poly_mul(_poly_mul([p.a1 + p.a2 * (k + 1), p.a2], [mpc(1), mpc(1)]),
                    [p.b1 + p.b2 * (2 * k + 1), p.b2])
    den = _trim(den)
    dn, dd = len(num) - 1, len(den) - 1
    if dn < dd:
        return mpf(0), None
    if dn > dd:
        return mpf(inf), None
    lead = num[-1] / den[-1]
    sigma = num[-2] / num[-1] - den[-2] / den[-1]
    # terms ~ lead^n n^sigma; excess = -sigma - 1
    return abs(lead), -sigma - 1


def direct_series_weight(params: FamilyParams, k: int,
                         opts: SummationOptions | None = None) -> SeriesValue:
    """r_k from sum_{j >= k} m_j / v'_{j+1}(x_k), summed with the shared engine."""
    opts = opts or SummationOptions()
    if k < 0:
        raise ValueError("k must be nonnegative")
    size = termination_index(params)
    if size is not None and k >= size:
        return SeriesValue(mpc(0), 0, mpf(0), SeriesStatus.TERMINATED, mp.prec)

    def first() -> mpc:
        return tables(params).moment(k) / v_prime_at_node(params, k, k)

    def ratio(n: int) -> mpc:
        j = k + n
        g = tables(params).g(j + 1)
        return g / ((-params.h_at(j + 1)) * (params.x_at(k) - params.x_at(j + 1)))

    if size is not None:
        return sum_series(first, ratio, opts=opts, count=size - k)
    limit, excess = _direct_asymptotics(params, k)
    if limit == 1 and excess is not None and excess.real <= 0:
        return sum_series(first, ratio, opts=opts, limit=limit, excess=excess)
    return sum_series(first, ratio, opts=opts, limit=limit, excess=excess)


def weights_oracle(params: FamilyParams, J: int) -> list[mpc]:
    """Back-substitute sum_{j=k}^{J} v_k(x_j) r_j = m_k for k = J, ..., 0."""
    if J < 1:
        raise ValueError("J must be >= 1")
    tab = tables(params)
    xs = [tab.x(j) for j in range(J + 1)]
    # P[j][k] = v_k(x_j), lower triangular
    P = []
    for j in range(J + 1):
        row = [mpc(1)]
        for k in range(1, j + 1):
            row.append(row[-1] * (xs[j] - xs[k - 1]))
        P.append(row)
    r: list[mpc] = [mpc(0)] * (J + 1)
    for k in range(J, -1, -1):
        diag = P[k][k]
        if diag == 0 or is_zero(diag):
            raise NodeCollisionError(f"v_{k}(x_{k}) vanishes")
        acc = mp.fsum(P[j][k] * r[j] for j in range(k + 1, J + 1))
        r[k] = (tab.moment(k) - acc) / diag
    return r


@dataclass
class WeightEntry:
    k: int
    node: mpc
    weight: mpc
    diagnostics: SeriesValue
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None and self.diagnostics.status.ok


@dataclass
class WeightTable:
    entries: list[WeightEntry]
    count: int
    finite_family: int | None
    sum_check: mpc
    extrapolated_sum: mpc | None = None
    extrapolation_error: mpf | None = None

    @property
    def tail_mass(self) -> mpc:
        """1 - sum of the tabulated weights."""
        return 1 - self.sum_check

    @property
    def weights(self) -> list[mpc]:
        return [e.weight for e in self.entries]

    @property
    def nodes(self) -> list[mpc]:
        return [e.node for e in self.entries]

    @property
    def ok(self) -> bool:
        return all(e.ok for e in self.entries)


def extrapolate_partial_sums(partials: Sequence[mpc], window: int = 60) -> tuple[mpc, mpf]:
    """Levin t-transform limit of a sequence of partial sums.

    Returns the estimate and the spread of the last three transform orders.
    Only the trailing ``window`` entries are used.
    """
    seq = list(partials[-window:])
    if len(seq) < 4:
        return seq[-1], mpf(inf)
    with workprec(2 * mp.prec):
        accel = levin(method="levin", variant="t")
        errs = []
        value = seq[-1]
        for n in range(3, len(seq) + 1):
            try:
                value, err = accel.update_psum(seq[:n])
            except (ValueError, ZeroDivisionError):
                # an exactly vanishing increment: the sequence is already constant
                return seq[-1], mpf(0)
            errs.append(err)
    spread = max(errs[-3:])
    return +value, +spread


def weight_table(params: FamilyParams, count: int | None = None,
                 opts: SummationOptions | None = None) -> WeightTable:
    """Weights r_0 .. r_{count-1}; a finite family is cut to its N + 1 nodes."""
    opts = opts or SummationOptions()
    canon = canonicalize(params)
    ok, why = convergence_condition(params, canon)
    if not ok:
        raise ConvergenceConditionError(f"{canon.case}: {why}")
    size = termination_index(params)
    if count is None:
        if size is None:
            raise ValueError("count is required for an infinite family")
        count = size
    elif size is not None:
        count = min(count, size)
    entries = []
    tab = tables(params)
    for k in range(count):
        node = tab.x(k)
        try:
            value, diag = weight(canon, k, opts)
            error = None if diag.status.ok else diag.message
        except (ConvergenceConditionError, InvalidFamilyError) as exc:
            value = mpc(mp.nan, mp.nan)
            diag = SeriesValue(value, 0, mpf(inf), SeriesStatus.FAILED_TO_CONVERGE, mp.prec, str(exc))
            error = str(exc)
        entries.append(WeightEntry(k, node, value, diag, error))
    good = [e.weight for e in entries if e.ok]
    total = mp.fsum(good) if good else mpc(0)
    table = WeightTable(entries, count, None if size is None else size - 1, total)
    if size is None and len(good) == count and count >= 4:
        partials = []
        acc = mpc(0)
        for w in good:
            acc += w
            partials.append(acc)
        table.extrapolated_sum, table.extrapolation_error = extrapolate_partial_sums(partials)
    return table
