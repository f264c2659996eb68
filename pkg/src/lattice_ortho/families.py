"""Named Askey-scheme presets mapped onto lattice parameters.

Gauge choices left open by the maps default to a2 = 1 (quadratic-eigenvalue
families) or a1 = 1 (linear ones) and b0 = 0. Both can be overridden with the
optional ``scale`` and ``b0`` arguments where the map leaves them free.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Mapping

from mpmath import binomial, exp, factorial, mp, mpc

from .errors import InvalidFamilyError
from .hypergeom import shifted_factorial
from .lattice import FamilyParams
from .numeric import Number, nearest_int, to_complex


class FamilyName(enum.Enum):
    WILSON = "wilson"
    CONTINUOUS_HAHN = "continuous-hahn"
    HAHN = "hahn"
    CONTINUOUS_DUAL_HAHN = "continuous-dual-hahn"
    KRAWTCHOUK = "krawtchouk"
    MEIXNER = "meixner"
    CHARLIER = "charlier"

    def __str__(self) -> str:
        return self.value


# required arguments, then the optional gauge arguments each preset accepts
ARGUMENTS: dict[FamilyName, tuple[tuple[str, ...], tuple[str, ...]]] = {
    FamilyName.WILSON: (("a", "b", "c", "d"), ("scale", "b0")),
    FamilyName.CONTINUOUS_HAHN: (("a", "b", "c", "d"), ("scale", "b0")),
    FamilyName.HAHN: (("alpha", "beta", "N"), ("scale",)),
    FamilyName.CONTINUOUS_DUAL_HAHN: (("a", "b", "c"), ("scale",)),
    FamilyName.KRAWTCHOUK: (("p", "N"), ("scale", "b0")),
    FamilyName.MEIXNER: (("c", "beta"), ("scale", "b0")),
    FamilyName.CHARLIER: (("a",), ("scale", "b0")),
}

DESCRIPTIONS = {
    FamilyName.WILSON: "Case 1, quadratic nodes x_k = k^2 + 2c k + b0",
    FamilyName.CONTINUOUS_HAHN: "Case 2, imaginary linear nodes x_k = b0 + i k; needs Re(b - a) > k for r_k",
    FamilyName.HAHN: "Case 2, finite family on x_k = 0..N",
    FamilyName.CONTINUOUS_DUAL_HAHN: "Case 3, nodes x_k = (k + c)^2; needs Re(1 - a - b) > 0",
    FamilyName.KRAWTCHOUK: "Case 4, finite binomial weights on x_k = b0 + k",
    FamilyName.MEIXNER: "Case 4, negative-binomial weights; needs |c/(c-1)| < 1",
    FamilyName.CHARLIER: "Case 4, Poisson weights",
}


@dataclass(frozen=True)
class FamilySpec:
    name: FamilyName
    named_args: dict[str, mpc]
    derived: FamilyParams
    classical_weight: Callable[[int], mpc] | None = field(default=None, compare=False)
    finite_size: int | None = None

    @property
    def params(self) -> FamilyParams:
        return self.derived


def family_names() -> list[str]:
    return [f.value for f in FamilyName]


def _lookup(name: str | FamilyName) -> FamilyName:
    if isinstance(name, FamilyName):
        return name
    key = name.strip().lower().replace("_", "-")
    try:
        return FamilyName(key)
    except ValueError:
        raise InvalidFamilyError(
            f"unknown family {name!r}; expected one of {', '.join(family_names())}"
        ) from None


def _positive_int(value: mpc, what: str) -> int:
    n = nearest_int(value)
    if n is None or n < 1:
        raise InvalidFamilyError(f"{what} must be a positive integer, got {mp.nstr(value, 8)}")
    return n


def _collect(family: FamilyName, named_args: Mapping[str, Number]) -> dict[str, mpc]:
    required, optional = ARGUMENTS[family]
    unknown = [k for k in named_args if k not in required and k not in optional]
    missing = [k for k in required if k not in named_args]
    if unknown or missing:
        raise InvalidFamilyError(
            f"{family}: arguments are {', '.join(required)} "
            f"(optional {', '.join(optional)}); missing={missing} unexpected={unknown}"
        )
    args = {k: to_complex(v) for k, v in named_args.items()}
    if "scale" in args and args["scale"] == 0:
        raise InvalidFamilyError("scale must be nonzero")
    return args


def _case1_d(a2, b0, b2, p, r, y1, y2) -> tuple[mpc, mpc]:
    u = p + r - y1 - y2
    d1 = a2 * (b2 * ((y1 - 1) * (y2 - 1) * (u - 2) + (r - 1) * (p - 2)) - (r - 1) * b0)
    d2 = a2 * (b2 * ((y1 + y2) * (u - 1) + y1 * y2 - r * (p - 1)) - b0)
    return d1, d2


def _wilson(args):
    a, b, c, d = (args[n] for n in "abcd")
    lam, b0 = args.get("scale", mpc(1)), args.get("b0", mpc(0))
    r, p, y1, y2 = a + b + c + d, 2 * c + 1, c + d, b + c
    b2 = mpc(1)
    d1, d2 = _case1_d(lam, b0, b2, p, r, y1, y2)
    return FamilyParams((r - 1) * lam, lam, b0, (p - 1) * b2, b2, d1, d2), None, None


def _continuous_hahn(args):
    a, b, c, d = (args[n] for n in "abcd")
    lam, b0 = args.get("scale", mpc(1)), args.get("b0", mpc(0))
    b1 = mpc(0, 1)
    r, y1, y2 = a + b + c + d, a + c, a + d
    d1 = lam * (b1 * (r - 1 + (y1 - 1) * (y2 - 1)) - b0 * (r - 1))
    d2 = lam * (b1 * (y1 + y2 - r) - b0)
    return FamilyParams((r - 1) * lam, lam, b0, b1, 0, d1, d2), None, None


def _hahn(args):
    al, be = args["alpha"], args["beta"]
    N = _positive_int(args["N"], "N")
    lam = args.get("scale", mpc(1))
    params = FamilyParams(
        (al + be + 1) * lam, lam, 0, 1, 0,
        -lam * (N * al - be - 1), -lam * (N + be + 1),
    )

    def w(k: int) -> mpc:
        if not 0 <= k <= N:
            return mpc(0)
        return binomial(al + k, k) * binomial(be + N - k, N - k) / binomial(N + al + be + 1, N)

    return params, w, N + 1


def _continuous_dual_hahn(args):
    a, b, c = args["a"], args["b"], args["c"]
    lam = args.get("scale", mpc(1))
    params = FamilyParams(
        lam, 0, c * c, 2 * c, 1,
        lam * (a * b + a * c + b * c - a - b), lam * (a + b),
    )
    return params, None, None


def _krawtchouk(args):
    p = args["p"]
    N = _positive_int(args["N"], "N")
    lam, b0 = args.get("scale", mpc(1)), args.get("b0", mpc(0))
    params = FamilyParams(lam, 0, b0, 1, 0, -lam * (N * p + p + b0 - 1), (p - 1) * lam)

    def w(k: int) -> mpc:
        if not 0 <= k <= N:
            return mpc(0)
        return binomial(N, k) * p**k * (1 - p) ** (N - k)

    return params, w, N + 1


def _meixner(args):
    c, be = args["c"], args["beta"]
    if c == 1:
        raise InvalidFamilyError("meixner: c must differ from 1")
    lam, b0 = args.get("scale", mpc(1)), args.get("b0", mpc(0))
    # the published d1 line has unbalanced parentheses; this bracketing
    # reproduces f_0(t) = 2F1(beta, 1; 1; c t/(c - 1))
    d1 = lam * ((be - b0) * c + b0 - 1) / (c - 1)
    params = FamilyParams(lam, 0, b0, 1, 0, d1, lam / (c - 1))

    def w(k: int) -> mpc:
        return shifted_factorial(be, k) * c**k * (1 - c) ** be / factorial(k)

    return params, w, None


def _charlier(args):
    a = args["a"]
    lam, b0 = args.get("scale", mpc(1)), args.get("b0", mpc(0))
    params = FamilyParams(lam, 0, b0, 1, 0, (1 - a - b0) * lam, -lam)

    def w(k: int) -> mpc:
        return a**k * exp(-a) / factorial(k)

    return params, w, None


_BUILDERS = {
    FamilyName.WILSON: _wilson,
    FamilyName.CONTINUOUS_HAHN: _continuous_hahn,
    FamilyName.HAHN: _hahn,
    FamilyName.CONTINUOUS_DUAL_HAHN: _continuous_dual_hahn,
    FamilyName.KRAWTCHOUK: _krawtchouk,
    FamilyName.MEIXNER: _meixner,
    FamilyName.CHARLIER: _charlier,
}


def make_family(name: str | FamilyName, named_args: Mapping[str, Number]) -> FamilySpec:
    family = _lookup(name)
    args = _collect(family, named_args)
    params, weight_fn, size = _BUILDERS[family](args)
    return FamilySpec(family, args, params, weight_fn, size)


def alpha_closed_form(name: str | FamilyName, named_args: Mapping[str, Number], n: int) -> mpc:
    """Published closed form of alpha_n; a test oracle only.

    Assumes the default gauge (b2 = 1 for Wilson, b1 = i for continuous Hahn).
    """
    family = _lookup(name)
    args = _collect(family, named_args)
    if n < 1:
        raise ValueError("alpha_n is defined for n >= 1")
    if family is FamilyName.WILSON:
        a, b, c, d = (args[k] for k in "abcd")
        r, p, y1, y2 = a + b + c + d, 2 * c + 1, c + d, b + c
        b2 = 1
        num = (b2**2 * n * (n + y1 - 1) * (n + y2 - 1) * (n - p + y1 + y2)
               * (n - 2 + r) * (n + r - y1 - 1) * (n + r - y2 - 1) * (n + p + r - y1 - y2 - 2))
        den = (2 * n + r - 3) * (2 * n + r - 2) ** 2 * (2 * n + r - 1)
        return num / den
    if family is FamilyName.CONTINUOUS_HAHN:
        a, b, c, d = (args[k] for k in "abcd")
        s = a + b + c + d
        num = n * (n + s - 2) * (n + a + c - 1) * (n + a + d - 1) * (n + b + c - 1) * (n + b + d - 1)
        den = (2 * n + s - 2) ** 2 * (2 * n + s - 1) * (2 * n + s - 3)
        return num / den
    raise InvalidFamilyError(f"no published closed form of alpha_n for {family}")
