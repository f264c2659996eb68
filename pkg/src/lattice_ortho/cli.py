"""Command-line interface: ``lattice-ortho <command> [options]``.

Exit codes: 0 success, 1 invalid family / configuration / convergence
condition (a JSON error object is written), 2 a per-entry or verification
failure in an otherwise valid run.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from typing import Any, Callable

from mpmath import mp, mpc, mpf

from .errors import LatticeOrthoError
from .families import ARGUMENTS, DESCRIPTIONS, FamilyName, make_family
from .hypergeom import SummationOptions
from .lattice import FamilyParams, validate
from .numeric import (
    DEFAULT_PRECISION,
    check_precision,
    default_precision,
    digits_for,
    precision,
)
from .recurrence import coefficients
from .connection import moments
from .verify import gram_matrix
from .weights import canonicalize, weight_table


def fmt_real(x: mpf) -> str:
    """Decimal string with enough digits to round-trip at the working precision."""
    x = mpf(x)
    if mp.isinf(x) or mp.isnan(x):
        return str(x)
    return mp.nstr(x, digits_for(mp.prec))


def fmt_complex(z) -> dict[str, str]:
    z = mpc(z)
    return {"re": fmt_real(z.real), "im": fmt_real(z.imag)}


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, mpc):
        return fmt_complex(obj)
    if isinstance(obj, mpf):
        return fmt_real(obj)
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


class UsageError(LatticeOrthoError):
    pass


def _parse_args_list(items: list[str]) -> dict[str, str]:
    out: dict[str, str] = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise UsageError(f"--arg expects name=value, got {item!r}")
        out[key.strip()] = value.strip()
    return out


def _family(ns: argparse.Namespace) -> tuple[FamilyParams, dict[str, Any]]:
    if ns.family and ns.raw:
        raise UsageError("give either --family or --raw, not both")
    if ns.raw:
        params = FamilyParams.parse(ns.raw)
        return params, {"raw": {k: v for k, v in params.as_dict().items()}}
    if not ns.family:
        raise UsageError("a family is required: --family NAME --arg k=v ... or --raw a1=...,d2=...")
    spec = make_family(ns.family, _parse_args_list(ns.arg))
    return spec.derived, {"name": str(spec.name), "args": spec.named_args}


def _options(ns: argparse.Namespace) -> SummationOptions:
    tol = float(ns.tol)
    if not tol > 0:
        raise UsageError("--tol must be positive")
    return SummationOptions(tolerance=tol)


def _write(ns: argparse.Namespace, text: str) -> None:
    if not ns.out:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(ns.out))
    fd, tmp = tempfile.mkstemp(prefix=".lattice-ortho-", dir=directory)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, ns.out)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(ns: argparse.Namespace, payload: dict, header: list[str], rows: list[list[Any]]) -> None:
    if ns.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf)  # RFC 4180 quoting, CRLF line ends
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
        _write(ns, buf.getvalue())
    else:
        _write(ns, json.dumps(_jsonable(payload), indent=2) + "\n")


def _cell(v: Any) -> Any:
    if isinstance(v, (mpf, mpc)):
        return fmt_real(v) if isinstance(v, mpf) else fmt_real(v.real)
    return "" if v is None else v


def cmd_weights(ns: argparse.Namespace) -> int:
    params, fam = _family(ns)
    table = weight_table(params, ns.count, _options(ns))
    entries = []
    rows = []
    for e in table.entries:
        d = e.diagnostics
        entries.append({
            "k": e.k, "x": e.node, "r": e.weight, "status": str(d.status),
            "tail_estimate": d.tail_estimate, "terms_used": d.terms_used,
            "message": e.error or d.message,
        })
        rows.append([e.k, e.node.real, e.node.imag, e.weight.real, e.weight.imag,
                     str(d.status), d.tail_estimate])
    payload = {
        "command": "weights", "family": fam, "case": str(canonicalize(params).case),
        "precision": mp.prec, "count": table.count, "finite_family": table.finite_family,
        "sum_check": table.sum_check, "tail_mass": table.tail_mass,
        "extrapolated_sum": table.extrapolated_sum,
        "extrapolation_error": table.extrapolation_error,
        "entries": entries,
    }
    header = ["k", "x_re", "x_im", "r_re", "r_im", "status", "tail_estimate"]
    _emit(ns, payload, header, rows)
    return 0 if table.ok else 2


def cmd_verify(ns: argparse.Namespace) -> int:
    params, fam = _family(ns)
    report = gram_matrix(params, ns.nmax, ns.K, _options(ns))
    ok = report.passed(ns.tol)
    payload = {"command": "verify", "family": fam, "precision": mp.prec,
               "tolerance": ns.tol, "passed": ok, **report.as_dict()}
    rows = [[n, m, report.gram[n][m].real, report.gram[n][m].imag]
            for n in range(report.nmax + 1) for m in range(report.nmax + 1)]
    _emit(ns, payload, ["n", "m", "S_re", "S_im"], rows)
    return 0 if ok else 2


def cmd_recurrence(ns: argparse.Namespace) -> int:
    params, fam = _family(ns)
    rc = coefficients(params, ns.n)
    norms = rc.norms()
    rows_json = []
    rows = []
    for n in range(ns.n + 1):
        a = rc.alpha[n - 1] if n >= 1 else None
        rows_json.append({"n": n, "beta": rc.beta[n], "alpha": a, "K": norms[n]})
        rows.append([n, rc.beta[n].real, rc.beta[n].imag,
                     None if a is None else a.real, None if a is None else a.imag,
                     norms[n].real, norms[n].imag])
    payload = {"command": "recurrence", "family": fam, "precision": mp.prec,
               "finite_size": rc.finite_size, "rows": rows_json}
    header = ["n", "beta_re", "beta_im", "alpha_re", "alpha_im", "K_re", "K_im"]
    _emit(ns, payload, header, rows)
    return 0


def cmd_moments(ns: argparse.Namespace) -> int:
    params, fam = _family(ns)
    count = ns.count or 10
    ms = moments(params, count)
    payload = {"command": "moments", "family": fam, "precision": mp.prec,
               "moments": [{"k": k, "m": m} for k, m in enumerate(ms)]}
    _emit(ns, payload, ["k", "m_re", "m_im"], [[k, m.real, m.imag] for k, m in enumerate(ms)])
    return 0


def cmd_validate(ns: argparse.Namespace) -> int:
    params, fam = _family(ns)
    report = validate(params, ns.horizon)
    payload = {"command": "validate", "family": fam, **report.as_dict()}
    d = report.as_dict()
    keys = [k for k in d if k != "messages"]
    _emit(ns, payload, keys + ["messages"], [[d[k] for k in keys] + ["; ".join(d["messages"])]])
    return 0 if report.ok else 2


def cmd_families(ns: argparse.Namespace) -> int:
    items = []
    for f in FamilyName:
        required, optional = ARGUMENTS[f]
        items.append({"name": f.value, "args": list(required), "optional": list(optional),
                      "description": DESCRIPTIONS[f]})
    rows = [[i["name"], " ".join(i["args"]), " ".join(i["optional"]), i["description"]] for i in items]
    _emit(ns, {"command": "families", "families": items},
          ["name", "args", "optional", "description"], rows)
    return 0


COMMANDS: dict[str, Callable[[argparse.Namespace], int]] = {
    "weights": cmd_weights,
    "verify": cmd_verify,
    "recurrence": cmd_recurrence,
    "moments": cmd_moments,
    "validate": cmd_validate,
    "families": cmd_families,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lattice-ortho",
        description="Discrete orthogonality weights, recurrences and checks for "
                    "hypergeometric polynomial families on quadratic lattices.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision", type=int, default=None,
                        help=f"working precision in bits (default {DEFAULT_PRECISION}, "
                             "or $LATTICE_ORTHO_PRECISION)")
    common.add_argument("--tol", type=float, default=1e-30, help="summation tolerance")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", help="write to this path (atomically) instead of stdout")

    fam = argparse.ArgumentParser(add_help=False)
    fam.add_argument("--family", help="preset name, see the 'families' command")
    fam.add_argument("--arg", action="append", default=[], metavar="NAME=VALUE",
                     help="preset argument; repeatable")
    fam.add_argument("--raw", metavar="a1=..,a2=..,b0=..,b1=..,b2=..,d1=..,d2=..",
                     help="the seven lattice parameters directly")

    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("weights", parents=[common, fam], help="weights r_k at the nodes x_k")
    p.add_argument("--count", type=int, default=None,
                   help="number of weights (default: whole finite family, else 20)")
    p = sub.add_parser("verify", parents=[common, fam], help="Gram matrix check")
    p.add_argument("--nmax", type=int, default=3)
    p.add_argument("--K", type=int, default=None,
                   help="truncation (default: whole finite family, else 100)")
    p = sub.add_parser("recurrence", parents=[common, fam], help="beta_n, alpha_n, K_n")
    p.add_argument("--n", type=int, default=5)
    p = sub.add_parser("moments", parents=[common, fam], help="generalized moments m_k")
    p.add_argument("--count", type=int, default=10)
    p = sub.add_parser("validate", parents=[common, fam], help="family validation report")
    p.add_argument("--horizon", type=int, default=20)
    sub.add_parser("families", parents=[common], help="list presets")
    return parser


def _error(ns: argparse.Namespace | None, exc: BaseException) -> int:
    payload = {"error": {"type": type(exc).__name__, "message": str(exc)}}
    text = json.dumps(payload, indent=2) + "\n"
    if ns is not None and getattr(ns, "out", None):
        try:
            _write(ns, text)
        except OSError:
            sys.stdout.write(text)
    else:
        sys.stdout.write(text)
    return 1


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        bits = check_precision(ns.precision) if ns.precision is not None else default_precision()
    except ValueError as exc:
        return _error(ns, exc)
    with precision(bits):
        try:
            if ns.command == "weights" and ns.count is None:
                ns.count = None if _is_finite(ns) else 20
            if ns.command == "verify" and ns.K is None:
                ns.K = None if _is_finite(ns) else 100
            return COMMANDS[ns.command](ns)
        except (LatticeOrthoError, ValueError, ZeroDivisionError) as exc:
            return _error(ns, exc)


def _is_finite(ns: argparse.Namespace) -> bool:
    from .lattice import termination_index

    params, _ = _family(ns)
    return termination_index(params) is not None


if __name__ == "__main__":
    sys.exit(main())
