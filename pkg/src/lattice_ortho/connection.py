"""Newton basis on the lattice nodes, connection coefficients and moments.

``v_k(t) = (t - x_0) ... (t - x_{k-1})`` is the Newton basis, ``c_{n,k}`` the
coefficients of the monic orthogonal polynomial ``u_n`` in that basis, and
``m_k = tau(v_k)`` the generalized moments. All per-family sequences are
memoized in append-only tables keyed by (parameters, precision).
"""
from __future__ import annotations

import threading
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

from mpmath import mp, mpc, mpf

from .errors import NodeCollisionError
from .lattice import FamilyParams, g_eval
from .numeric import Number, is_zero, to_complex


def _checked_div(num: mpc, den: mpc, scale: mpf, what: str) -> mpc:
    if den == 0 or is_zero(den, scale):
        raise NodeCollisionError(f"{what} vanishes")
    return num / den


class FamilyTables:
    """Append-only memo of g_k, m_k and node-derivative rows for one family.

    Writers extend under a lock; readers only ever index below the published
    length, so they always see fully initialized prefixes.
    """

    def __init__(self, params: FamilyParams):
        self.params = params
        self._lock = threading.Lock()
        self._x: list[mpc] = []
        self._g: list[mpc] = [mpc(0)]
        self._m: list[mpc] = [mpc(1)]
        self._vprime: dict[int, list[mpc]] = {}
        self.first_zero_g: int | None = None

    def _h_scale(self, n: int) -> mpf:
        p = self.params
        return max(mpf(1), abs(p.a1) * n, abs(p.a2) * n * n)

    def x(self, k: int) -> mpc:
        if k >= len(self._x):
            with self._lock:
                while len(self._x) <= k:
                    self._x.append(self.params.x_at(len(self._x)))
        return self._x[k]

    def g(self, k: int) -> mpc:
        if k >= len(self._g):
            with self._lock:
                while len(self._g) <= k:
                    j = len(self._g)
                    value = g_eval(self.params, j)
                    p = self.params
                    scale = max(
                        mpf(1),
                        abs(p.x_at(j - 1) * p.h_at(j)),
                        abs(p.d1 * j) + abs(p.d2 * j * j),
                    )
                    if is_zero(value, scale):
                        value = mpc(0)
                        if self.first_zero_g is None:
                            self.first_zero_g = j
                    self._g.append(value)
        return self._g[k]

    def moment(self, k: int) -> mpc:
        if k >= len(self._m):
            self.g(k)
            with self._lock:
                p = self.params
                while len(self._m) <= k:
                    j = len(self._m)
                    prev = self._m[-1]
                    if prev == 0 or self._g[j] == 0:
                        self._m.append(mpc(0))
                        continue
                    ratio = _checked_div(
                        self._g[j], -p.h_at(j), self._h_scale(j), f"h_0 - h_{j}"
                    )
                    self._m.append(prev * ratio)
        return self._m[k]

    def vprime(self, j: int, k: int) -> mpc:
        """v'_{j+1}(x_k) = prod_{i <= j, i != k} (x_k - x_i), for j >= k."""
        if j < k:
            raise ValueError(f"v'_{{j+1}}(x_k) needs j >= k, got j={j}, k={k}")
        row = self._vprime.get(k)
        if row is None or len(row) <= j - k:
            self.x(j)
            with self._lock:
                row = self._vprime.setdefault(k, [])
                xk = self._x[k]
                scale = max(mpf(1), abs(xk))
                if not row:
                    value = mpc(1)
                    for i in range(k):
                        diff = xk - self._x[i]
                        if is_zero(diff, scale):
                            raise NodeCollisionError(f"x_{k} == x_{i}")
                        value *= diff
                    row.append(value)
                while len(row) <= j - k:
                    i = k + len(row)
                    diff = xk - self._x[i]
                    if is_zero(diff, max(scale, abs(self._x[i]))):
                        raise NodeCollisionError(f"x_{k} == x_{i}")
                    row.append(row[-1] * diff)
        return row[j - k]


@lru_cache(maxsize=128)
def _tables_at(params: FamilyParams, prec: int) -> FamilyTables:
    return FamilyTables(params)


def tables(params: FamilyParams) -> FamilyTables:
    return _tables_at(params, mp.prec)


@dataclass(frozen=True)
class NewtonPoly:
    """Polynomial sum_k coeffs[k] v_k(t) in the family's Newton basis."""

    coeffs: tuple[mpc, ...]
    params: FamilyParams

    @property
    def degree(self) -> int:
        for k in range(len(self.coeffs) - 1, -1, -1):
            if self.coeffs[k] != 0:
                return k
        return -1

    def __call__(self, t: Number) -> mpc:
        t = to_complex(t)
        tab = tables(self.params)
        acc = mpc(0)
        for k in range(len(self.coeffs) - 1, -1, -1):
            acc = self.coeffs[k] + (t - tab.x(k)) * acc
        return acc


class MomentSeq(Sequence[mpc]):
    """Lazily extended view of the generalized moments m_0, m_1, ..."""

    def __init__(self, params: FamilyParams, length: int | None = None):
        self.params = params
        self._length = length

    def __getitem__(self, k):  # type: ignore[override]
        if isinstance(k, slice):
            stop = k.stop if k.stop is not None else len(self)
            return [self[i] for i in range(*slice(k.start, stop, k.step).indices(stop))]
        if k < 0:
            raise IndexError("moment index must be nonnegative")
        if self._length is not None and k >= self._length:
            raise IndexError(k)
        return moment(self.params, k)

    def __len__(self) -> int:
        if self._length is None:
            raise TypeError("unbounded moment sequence has no length")
        return self._length

    def __iter__(self) -> Iterator[mpc]:
        k = 0
        while self._length is None or k < self._length:
            yield moment(self.params, k)
            k += 1


def v_eval(params: FamilyParams, k: int, t: Number) -> mpc:
    if k < 0:
        raise ValueError("k must be nonnegative")
    t = to_complex(t)
    tab = tables(params)
    value = mpc(1)
    for i in range(k):
        value *= t - tab.x(i)
    return value


def v_prime_at_node(params: FamilyParams, j: int, k: int) -> mpc:
    if not 0 <= k <= j:
        raise ValueError(f"need 0 <= k <= j, got j={j}, k={k}")
    return tables(params).vprime(j, k)


def connection_row(params: FamilyParams, n: int) -> list[mpc]:
    """[c_{n,0}, ..., c_{n,n}] by a running product from the diagonal down."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    tab = tables(params)
    hn = params.h_at(n)
    scale = tab._h_scale(n)
    row = [mpc(0)] * (n + 1)
    row[n] = mpc(1)
    for k in range(n - 1, -1, -1):
        if row[k + 1] == 0:
            continue
        row[k] = row[k + 1] * _checked_div(
            tab.g(k + 1), hn - params.h_at(k), scale, f"h_{n} - h_{k}"
        )
    return row


def connection_coeff(params: FamilyParams, n: int, k: int) -> mpc:
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got n={n}, k={k}")
    tab = tables(params)
    hn = params.h_at(n)
    scale = tab._h_scale(n)
    value = mpc(1)
    for j in range(k, n):
        value *= _checked_div(tab.g(j + 1), hn - params.h_at(j), scale, f"h_{n} - h_{j}")
    return value


def inverse_coeff(params: FamilyParams, n: int, k: int) -> mpc:
    """Entry (n, k) of the inverse of the connection matrix."""
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got n={n}, k={k}")
    tab = tables(params)
    hk = params.h_at(k)
    scale = tab._h_scale(n)
    value = mpc(1)
    for j in range(k + 1, n + 1):
        value *= _checked_div(tab.g(j), hk - params.h_at(j), scale, f"h_{k} - h_{j}")
    return value


def moment(params: FamilyParams, k: int) -> mpc:
    if k < 0:
        raise ValueError("k must be nonnegative")
    return tables(params).moment(k)


def moments(params: FamilyParams, count: int) -> list[mpc]:
    tab = tables(params)
    tab.moment(max(count - 1, 0))
    return [tab.moment(k) for k in range(count)]
