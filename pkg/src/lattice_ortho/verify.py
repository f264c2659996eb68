"""Gram matrices and moment recovery on the computed nodes and weights."""
from __future__ import annotations

from dataclasses import dataclass, field

from mpmath import inf, log, mp, mpc, mpf, sqrt

from .connection import tables, v_eval
from .errors import LatticeOrthoError
from .hypergeom import SummationOptions
from .lattice import FamilyParams, termination_index
from .recurrence import norm_K, u_values
from .weights import WeightTable, weight_table

FIT_WINDOW = 10


@dataclass
class GramReport:
    """S_nm = sum_{k<K} u_n(x_k) u_m(x_k) r_k for n, m <= nmax.

    ``offdiag_max`` is the largest raw |S_nm|, ``offdiag_rel_max`` the same
    divided by sqrt(|K_n K_m|). ``tail_allowance`` bounds the truncated
    remainder on that normalized scale.
    """

    nmax: int
    K: int
    gram: list[list[mpc]]
    offdiag_max: mpf
    offdiag_rel_max: mpf
    diag_rel_err: list[mpf]
    tail_allowance: mpf
    norms: list[mpc] = field(default_factory=list)
    finite_family: int | None = None
    precision: int = 0

    def passed(self, tolerance) -> bool:
        """Every normalized entry within tolerance + tail allowance.

        The tolerance is floored at 2^(-precision/2), the package-wide
        equality threshold, so low-precision runs are not held to 1e-30.
        """
        if self.tail_allowance == inf:
            return False
        floor = mpf(2) ** (-(self.precision or mp.prec) // 2)
        bound = max(mpf(tolerance), floor) + self.tail_allowance
        return self.offdiag_rel_max <= bound and all(e <= bound for e in self.diag_rel_err)

    def as_dict(self) -> dict:
        return {
            "nmax": self.nmax,
            "K": self.K,
            "finite_family": self.finite_family,
            "offdiag_max": self.offdiag_max,
            "offdiag_rel_max": self.offdiag_rel_max,
            "diag_rel_err": list(self.diag_rel_err),
            "tail_allowance": self.tail_allowance,
            "norms": list(self.norms),
            "gram": [list(row) for row in self.gram],
        }


def tail_estimate(terms: list[mpc]) -> mpf:
    """Remainder estimate from the last few summands of a truncated series.

    Fits |T_k| against both exp(-c k) and k^(-sigma) by least squares on the
    logs and extrapolates whichever fits better. Sign-alternating tails are
    bounded by the last magnitude.
    """
    window = [(k, t) for k, t in enumerate(terms)][-FIT_WINDOW:]
    window = [(k, t) for k, t in window if t != 0]
    if not window:
        return mpf(0)
    last = abs(window[-1][1])
    if len(window) < 3:
        return last
    reals = [t.real for _, t in window]
    if all(abs(t.imag) <= abs(t.real) * mpf(2) ** -20 for _, t in window) and all(
        reals[i] * reals[i + 1] < 0 for i in range(len(reals) - 1)
    ):
        mags = [abs(x) for x in reals]
        if all(mags[i + 1] <= mags[i] for i in range(len(mags) - 1)):
            return last
    ks = [mpf(k + 1) for k, _ in window]
    ys = [log(abs(t)) for _, t in window]
    geo = _fit(ks, ys)
    pw = _fit([log(k) for k in ks], ys)
    K = ks[-1]
    if geo[2] <= pw[2]:
        rho = mp.e ** geo[0]
        if rho >= 1:
            return mpf(inf)
        return last * rho / (1 - rho)
    sigma = -pw[0]
    if sigma <= 1:
        return mpf(inf)
    return last * K / (sigma - 1)


def _fit(xs: list[mpf], ys: list[mpf]) -> tuple[mpf, mpf, mpf]:
    """Slope, intercept and residual sum of squares of a least-squares line."""
    n = len(xs)
    mx = mp.fsum(xs) / n
    my = mp.fsum(ys) / n
    sxx = mp.fsum((x - mx) ** 2 for x in xs)
    if sxx == 0:
        return mpf(0), my, mpf(inf)
    slope = mp.fsum((x - mx) * (y - my) for x, y in zip(xs, ys)) / sxx
    icpt = my - slope * mx
    rss = mp.fsum((y - icpt - slope * x) ** 2 for x, y in zip(xs, ys))
    return slope, icpt, rss


def _checked_table(params: FamilyParams, K: int, opts: SummationOptions) -> WeightTable:
    table = weight_table(params, K, opts)
    bad = [e for e in table.entries if not e.ok]
    if bad:
        raise LatticeOrthoError(f"weight r_{bad[0].k} failed: {bad[0].error or bad[0].diagnostics.message}")
    return table


def gram_matrix(params: FamilyParams, nmax: int, K: int | None = None,
                opts: SummationOptions | None = None) -> GramReport:
    """Truncated Gram matrix of u_0..u_nmax against the discrete weights."""
    opts = opts or SummationOptions()
    if nmax < 0:
        raise ValueError("nmax must be nonnegative")
    size = termination_index(params)
    if K is None:
        if size is None:
            raise ValueError("K is required for an infinite family")
        K = size
    if size is not None:
        K = min(K, size)
        nmax_ok = size - 1
        if nmax > nmax_ok:
            raise ValueError(f"finite family has {size} nodes; nmax must be <= {nmax_ok}")
    if K < nmax + 1:
        raise ValueError("K must be >= nmax + 1")
    table = _checked_table(params, K, opts)
    us = [u_values(params, nmax, x) for x in table.nodes]
    norms = [norm_K(params, n) for n in range(nmax + 1)]
    finite = size is not None and K == size

    gram = [[mpc(0)] * (nmax + 1) for _ in range(nmax + 1)]
    allowance = mpf(0)
    for n in range(nmax + 1):
        for m in range(n, nmax + 1):
            terms = [us[k][n] * us[k][m] * table.weights[k] for k in range(K)]
            value = mp.fsum(terms)
            gram[n][m] = gram[m][n] = value
            if not finite:
                scale = sqrt(abs(norms[n] * norms[m]))
                allowance = max(allowance, tail_estimate(terms) / scale)
    offdiag = mpf(0)
    offdiag_rel = mpf(0)
    for n in range(nmax + 1):
        for m in range(n + 1, nmax + 1):
            offdiag = max(offdiag, abs(gram[n][m]))
            offdiag_rel = max(offdiag_rel, abs(gram[n][m]) / sqrt(abs(norms[n] * norms[m])))
    diag = [abs(gram[n][n] / norms[n] - 1) for n in range(nmax + 1)]
    return GramReport(nmax, K, gram, offdiag, offdiag_rel, diag, allowance, norms,
                      None if size is None else size - 1, mp.prec)


def moment_recovery(params: FamilyParams, kmax: int, K: int,
                    opts: SummationOptions | None = None) -> list[mpf]:
    """|sum_{j=k}^{K-1} v_k(x_j) r_j - m_k| for k = 0..kmax."""
    opts = opts or SummationOptions()
    if kmax < 0:
        raise ValueError("kmax must be nonnegative")
    table = _checked_table(params, K, opts)
    K = table.count
    tab = tables(params)
    out = []
    for k in range(kmax + 1):
        total = mp.fsum(v_eval(params, k, table.nodes[j]) * table.weights[j] for j in range(k, K))
        out.append(abs(total - tab.moment(k)))
    return out
