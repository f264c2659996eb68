"""Three-term recurrence u_{n+1} = (t - beta_n) u_n - alpha_n u_{n-1}.

Terms whose g-factor is g_0 = 0 are dropped before their denominator is
formed, which settles the otherwise undefined h_{-1} at n = 0 and n = 1.
"""
from __future__ import annotations

from dataclasses import dataclass

from mpmath import mpc, mpf

from .connection import NewtonPoly, _checked_div, connection_row, tables
from .lattice import FamilyParams
from .numeric import Number, to_complex


def _ratio(params: FamilyParams, g_index: int, i: int, j: int) -> mpc:
    """g_{g_index} / (h_i - h_j), zero when g_index == 0."""
    g = tables(params).g(g_index)
    if g_index == 0 or g == 0:
        return mpc(0)
    scale = max(mpf(1), abs(params.a1) * (abs(i) + abs(j)), abs(params.a2) * (i * i + j * j))
    return _checked_div(g, params.h_at(i) - params.h_at(j), scale, f"h_{i} - h_{j}")


def beta(params: FamilyParams, n: int) -> mpc:
    if n < 0:
        raise ValueError("n must be nonnegative")
    return params.x_at(n) + _ratio(params, n + 1, n, n + 1) - _ratio(params, n, n - 1, n)


def alpha_with_scale(params: FamilyParams, n: int) -> tuple[mpc, mpf]:
    """alpha_n together with the magnitude of its largest partial product."""
    if n < 1:
        raise ValueError("alpha_n is defined for n >= 1")
    lead = _ratio(params, n, n - 1, n)
    if lead == 0:
        return mpc(0), mpf(1)
    parts = (
        _ratio(params, n - 1, n - 2, n),
        -lead,
        _ratio(params, n + 1, n - 1, n + 1),
        params.x_at(n) - params.x_at(n - 1),
    )
    inner = sum(parts, mpc(0))
    scale = max([mpf(1)] + [abs(lead * p) for p in parts])
    return lead * inner, scale


def alpha(params: FamilyParams, n: int) -> mpc:
    return alpha_with_scale(params, n)[0]


def u_eval(params: FamilyParams, n: int, t: Number) -> mpc:
    """Monic u_n(t) by the forward recurrence from u_0 = 1, u_1 = t - beta_0."""
    return u_values(params, n, t)[n]


def u_values(params: FamilyParams, n: int, t: Number) -> list[mpc]:
    """[u_0(t), ..., u_n(t)]."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    t = to_complex(t)
    rc = coefficients(params, n)
    values = [mpc(1)]
    if n >= 1:
        values.append(t - rc.beta[0])
    for k in range(1, n):
        values.append((t - rc.beta[k]) * values[k] - rc.alpha[k - 1] * values[k - 1])
    return values


def u_newton_coeffs(params: FamilyParams, n: int) -> NewtonPoly:
    return NewtonPoly(tuple(connection_row(params, n)), params)


def norm_K(params: FamilyParams, n: int) -> mpc:
    """K_n = alpha_1 ... alpha_n, with K_0 = 1."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    value = mpc(1)
    for k in range(1, n + 1):
        value *= alpha(params, k)
    return value


@dataclass(frozen=True)
class RecurrenceCoeffs:
    """beta_0..beta_{n}, alpha_1..alpha_{n}; ``finite_size`` set when some alpha vanishes."""

    beta: tuple[mpc, ...]
    alpha: tuple[mpc, ...]
    params: FamilyParams
    finite_size: int | None = None

    def norms(self) -> list[mpc]:
        out = [mpc(1)]
        for a in self.alpha:
            out.append(out[-1] * a)
        return out


def coefficients(params: FamilyParams, n: int) -> RecurrenceCoeffs:
    """Recurrence coefficients up to index n.

    A terminating family (g_{N+1} = 0) yields alpha_{N+1} = 0; that is
    reported through ``finite_size = N + 1`` rather than raised.
    """
    betas = tuple(beta(params, k) for k in range(n + 1))
    alphas = tuple(alpha(params, k) for k in range(1, n + 1))
    size = tables(params).first_zero_g
    finite = size if size is not None and size <= n else None
    return RecurrenceCoeffs(betas, alphas, params, finite)
