"""Command-line front end: JSON (default) or CSV on stdout.

Exit status 0 on success, 2 on usage errors, 1 on compute errors (with a
JSON {"error": ...} record on stdout).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import subprocess
import sys
from fractions import Fraction
from pathlib import Path

from . import _accel
from .characters import DirichletCharacter, gauss_sum, jacobi_sum, period_identity, rho_tau
from .cyclotomic import Cyclotomic, as_exact
from .fourier import dumps, gram, iter_records, loads, siegel_phi, theta_lattice
from .polys import LaurentPoly
from .symmat import HalfIntSymMat

__all__ = ["main", "build_parser", "render"]


class UsageError(Exception):
    """Bad flag combination detected after parsing."""


# ---------------------------------------------------------------- rendering

def render(x):
    """JSON-friendly exact rendering: Fractions as "num/den", cyclotomics as level + coordinates."""
    if isinstance(x, bool) or x is None or isinstance(x, (str, float)):
        return x
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, Cyclotomic):
        return {"level": x.level, "coords": [str(c) for c in x.coords]}
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    if isinstance(x, LaurentPoly):
        return {"vars": list(x.vars),
                "terms": [{"exp": list(e), "coeff": render(c)} for e, c in sorted(x.terms.items())]}
    if isinstance(x, HalfIntSymMat):
        return x.doubled()
    if isinstance(x, DirichletCharacter):
        return x.spec()
    if isinstance(x, dict):
        return {str(k): render(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [render(v) for v in x]
    return str(x)


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        out = {}
        for k, v in obj.items():
            out.update(_flatten(v, f"{prefix}{k}." if not isinstance(v, (str, int, float, bool)) else f"{prefix}{k}"))
        return out
    if isinstance(obj, list):
        return {prefix.rstrip("."): json.dumps(obj)}
    return {prefix.rstrip("."): obj}


def emit(payload, as_csv: bool, out=None):
    out = out or sys.stdout
    payload = render(payload)
    if not as_csv:
        out.write(json.dumps(payload, indent=None, sort_keys=False) + "\n")
        return
    rows = payload.get("records") if isinstance(payload, dict) and "records" in payload else None
    if rows is None:
        rows = payload if isinstance(payload, list) else [payload]
    flat = [_flatten(r) for r in rows]
    cols: list[str] = []
    for r in flat:
        cols += [c for c in r if c not in cols]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    for r in flat:
        w.writerow(r)
    out.write(buf.getvalue())


# ---------------------------------------------------------------- argument helpers

def _frac(s: str) -> Fraction:
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as err:
        raise argparse.ArgumentTypeError(f"not a rational number: {s!r}") from err


def _k2(s: str) -> int:
    k = _frac(s)
    if (2 * k).denominator != 1:
        raise argparse.ArgumentTypeError(f"weight must be a half-integer, got {s!r}")
    return int(2 * k)


def _intlist(s: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in s.split(",") if x.strip())
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {s!r}") from err


def _fraclist(s: str) -> tuple[Fraction, ...]:
    return tuple(_frac(x) for x in s.split(",") if x.strip())


def _matrix2(s: str) -> HalfIntSymMat:
    """Doubled matrix 'a,b;b,c' (2 tau)."""
    try:
        rows = [[int(x) for x in r.split(",")] for r in s.split(";")]
        return HalfIntSymMat.from_doubled(rows)
    except (ValueError, TypeError) as err:
        raise argparse.ArgumentTypeError(f"bad doubled matrix {s!r}: {err}") from err


def _char(s: str) -> DirichletCharacter:
    try:
        return DirichletCharacter.from_spec(s)
    except ValueError as err:
        raise argparse.ArgumentTypeError(str(err)) from err


def _source(args):
    """Expansion from --input (text format) or --gram/--degree/--trace-bound."""
    if getattr(args, "input", None):
        if args.gram:
            raise UsageError("give either --input or --gram, not both")
        return loads(Path(args.input).read_text())
    if not args.gram:
        raise UsageError("need --input FILE or --gram NAME")
    return theta_lattice(gram(args.gram), args.degree, args.trace_bound)


def _expansion_payload(f, args) -> dict:
    if getattr(args, "out", None):
        Path(args.out).write_text(dumps(f))
    return {"degree": f.degree, "weight2": f.weight2, "trunc": f.trunc,
            "records": list(iter_records(f))}


# ---------------------------------------------------------------- subcommands

def cmd_theta(args):
    f = theta_lattice(gram(args.gram), args.degree, args.trace_bound)
    return _expansion_payload(f, args)


def cmd_phi(args):
    return _expansion_payload(siegel_phi(_source(args)), args)


def cmd_hecke(args):
    from .hecke import eigenvalue_extract, hecke_apply, sp_cosets
    f = _source(args)
    data = sp_cosets(f.degree, args.p, args.q)
    g = hecke_apply(f, data, bound=args.bound)
    payload = _expansion_payload(g, args)
    payload["cosets"] = len(data.pairs)
    if args.eigen:
        lam, wit = eigenvalue_extract(f.truncate(g.trunc), g)
        payload["eigenvalue"] = lam
        payload["witnesses"] = len(wit)
    return payload


def cmd_satake_check(args):
    from .hecke import commuting_square, satake_series_check, sp_cosets
    if args.square:
        q = args.q or ((0,) * (args.n - 1) + (1,))
        lhs, rhs = commuting_square(sp_cosets(args.n, args.p, q))
        return {"n": args.n, "p": args.p, "q": list(q), "ok": (lhs - rhs).is_zero(), "lhs": lhs, "rhs": rhs}
    rep = satake_series_check(args.n, args.p, args.M, args.track)
    return {"n": rep["n"], "p": rep["p"], "M": rep["M"], "track": rep["track"], "ok": rep["ok"],
            "records": [{"m": t["m"], "equal": t["equal"], "series": repr(t["series"]),
                         "product": repr(t["product"])} for t in rep["terms"]]}


def cmd_ladder(args):
    from .lfunctions import ladder_local_check
    r = ladder_local_check(args.n, args.k, args.params, args.p, args.psi, args.chi, args.last)
    return {"ok": r["ok"], "params": list(r["params"]), "lhs": r["lhs"], "rhs": r["rhs"],
            "factors": list(r["factors"]), "diff": r["diff"]}


def cmd_lfun(args):
    from .lfunctions import LSeriesData, lseries_eval, parse_params
    params = parse_params(Path(args.params_file).read_text())
    data = LSeriesData(args.n, args.k, params, level=args.level, primes=list(params))
    val, tail = lseries_eval(data, args.s, args.prime_bound, args.lam_bound)
    return {"s": args.s, "value": val, "tail": tail, "primes": len([p for p in params if p <= args.prime_bound])}


def cmd_gauss(args):
    chi = args.char
    out = {"character": chi, "conductor": chi.conductor, "primitive": chi.is_primitive()}
    G = gauss_sum(chi)
    out["gauss_sum"] = G
    out["abs_squared"] = as_exact(G * (G.conj() if isinstance(G, Cyclotomic) else G))
    if args.jacobi:
        out["jacobi_sum"] = jacobi_sum(chi, args.jacobi)
    if args.period_rho:
        r = period_identity(chi, args.period_rho, args.n)
        out["period_identity"] = {"ok": r["ok"], "lhs": r["lhs"], "rhs": r["rhs"]}
    return out


def cmd_rho_tau(args):
    rho = rho_tau(args.n, args.tau2)
    return {"n": args.n, "tau2": args.tau2, "character": rho, "conductor": rho.conductor,
            "parity": rho.parity}


def cmd_omega(args):
    from .projection import OMEGA_KINDS, OmegaSpec, omega_set
    spec = OmegaSpec(args.n, args.k, args.mu, args.l, args.cusp)
    kinds = [args.which] if args.which else list(OMEGA_KINDS)
    return {"n": args.n, "k": Fraction(args.k, 2), "mu": args.mu, "l": spec.ell,
            "sets": {w: omega_set(spec, w) for w in kinds}}


def cmd_exponents(args):
    from .projection import exponent_bundle
    l2 = args.l if args.l is not None else args.n + 2 * args.mu
    b = exponent_bundle(args.n, args.k, l2, args.m, args.case, args.phi)
    return b.to_json()


def cmd_project(args):
    from .numerics import delta_expansion
    from .projection import from_holomorphic, holo_project
    if args.form == "delta":
        f = delta_expansion(args.trace_bound)
    else:
        f = _source(args)
    F = from_holomorphic(f)
    g = holo_project(F, f.weight2, f.level, mu_scale=args.mu_scale,
                     enforce_weight_bound=not args.allow_low_weight)
    same = all(g.coeff(t) == f.coeff(t) for t in g.keys()) and len(g.keys()) == len(F.terms)
    payload = _expansion_payload(g, args)
    payload["idempotent"] = same
    return payload


def cmd_petersson(args):
    from .numerics import delta_expansion, petersson_numeric, poincare_eval
    from .projection import mu_constant
    D = delta_expansion(args.trace_bound)
    if args.poincare:
        G = lambda z: poincare_eval(12, 1, z, args.C)[0]  # noqa: E731
        lhs, tail = petersson_numeric(D, G, 12, y_max=args.ymax, nx=args.nx, ny=args.ny, normalize=False)
        rhs = float(mu_constant(12, 1)) * 4.0 ** (1 - 12)
        rel = abs(lhs - rhs) / abs(rhs)
        return {"lhs": lhs, "rhs": rhs, "relative_error": rel, "tail": tail, "ok": rel < 0.01}
    val, tail = petersson_numeric(D, D, y_max=args.ymax, nx=args.nx, ny=args.ny)
    return {"value": val, "tail": tail}


def cmd_selftest(args):
    root = Path(__file__).resolve().parents[2]
    target = root / "tests" / "test_acceptance.py"
    if not target.exists():
        raise FileNotFoundError(f"acceptance suite not found at {target}")
    proc = subprocess.run([sys.executable, "-m", "pytest", "-q", "-s", str(target)], cwd=root)
    return {"ok": proc.returncode == 0, "exit": proc.returncode}


# ---------------------------------------------------------------- parser

def _add_source(sp, need_degree=True):
    sp.add_argument("--input", help="expansion in the halfweight text format")
    sp.add_argument("--gram", help="built-in Gram matrix: rank1, diag22, e8, e8e8")
    sp.add_argument("--degree", type=int, default=1)
    sp.add_argument("--trace-bound", type=int, default=3)
    sp.add_argument("--out", help="also write the result in the text format")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="halfweight", description=__doc__.splitlines()[0])
    ap.add_argument("--csv", action="store_true", help="CSV instead of JSON")
    ap.add_argument("--threads", type=int, default=None, help="cap on worker threads")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("theta", help="theta series of a lattice")
    sp.add_argument("--gram", required=True)
    sp.add_argument("--degree", type=int, required=True)
    sp.add_argument("--trace-bound", type=int, required=True)
    sp.add_argument("--out")
    sp.set_defaults(fn=cmd_theta)

    sp = sub.add_parser("phi", help="Siegel Phi operator")
    _add_source(sp)
    sp.set_defaults(fn=cmd_phi)

    sp = sub.add_parser("hecke", help="apply a local Hecke operator")
    _add_source(sp)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--q", type=_intlist, default=None, help="exponents of q, e.g. 0,1")
    sp.add_argument("--bound", type=int, default=None)
    sp.add_argument("--eigen", action="store_true", help="also extract the eigenvalue")
    sp.set_defaults(fn=cmd_hecke)

    sp = sub.add_parser("satake-check", help="Satake series identity or commuting square")
    sp.add_argument("--n", type=int, default=1)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--M", type=int, default=3)
    sp.add_argument("--track", choices=["half-integral", "integral"], default="half-integral")
    sp.add_argument("--square", action="store_true", help="check the commuting square instead")
    sp.add_argument("--q", type=_intlist, default=None)
    sp.set_defaults(fn=cmd_satake_check)

    sp = sub.add_parser("ladder", help="local Euler factor ladder identity")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--k", type=_k2, required=True, help="weight, e.g. 4 or 13/2")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--params", type=_fraclist, default=(), help="Satake parameters of Phi f")
    sp.add_argument("--psi", type=_frac, default=Fraction(1))
    sp.add_argument("--chi", type=_frac, default=None)
    sp.add_argument("--last", type=_frac, default=None, help="override the last parameter")
    sp.set_defaults(fn=cmd_ladder)

    sp = sub.add_parser("lfun", help="truncated Euler product from a parameter file")
    sp.add_argument("--params-file", required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--k", type=_k2, default=0)
    sp.add_argument("--s", type=float, required=True)
    sp.add_argument("--prime-bound", type=int, default=1000)
    sp.add_argument("--level", type=int, default=1, help="primes dividing it use the non-split factor")
    sp.add_argument("--lam-bound", type=float, default=1.0)
    sp.set_defaults(fn=cmd_lfun)

    sp = sub.add_parser("gauss", help="Gauss and Jacobi sums")
    sp.add_argument("--char", type=_char, required=True, help='character spec "N:e1,e2,..."')
    sp.add_argument("--jacobi", type=_char, default=None)
    sp.add_argument("--period-rho", type=_char, default=None)
    sp.add_argument("--n", type=int, default=2)
    sp.set_defaults(fn=cmd_gauss)

    sp = sub.add_parser("rho-tau", help="quadratic character attached to tau")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--tau2", type=_matrix2, required=True, help="2 tau as 'a,b;b,c'")
    sp.set_defaults(fn=cmd_rho_tau)

    sp = sub.add_parser("omega", help="special-value sets")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--k", type=_k2, required=True)
    sp.add_argument("--mu", type=int, default=0, choices=[0, 1])
    sp.add_argument("--l", type=_k2, default=None, help="weight l of g (default n/2 + mu)")
    sp.add_argument("--cusp", action="store_true")
    sp.add_argument("--which", choices=["Omega0", "Omega'_g", "Omega'_nk", "Omega+", "Omega-"])
    sp.set_defaults(fn=cmd_omega)

    sp = sub.add_parser("exponents", help="exponent bundle")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--k", type=_k2, required=True)
    sp.add_argument("--m", type=_frac, required=True)
    sp.add_argument("--mu", type=int, default=0, choices=[0, 1])
    sp.add_argument("--l", type=_k2, default=None)
    sp.add_argument("--case", choices=["R1", "R2", "generic_high", "generic_low"], default=None)
    sp.add_argument("--phi", type=_char, default=None)
    sp.set_defaults(fn=cmd_exponents)

    sp = sub.add_parser("project", help="holomorphic projection of a holomorphic input")
    _add_source(sp)
    sp.add_argument("--form", choices=["delta", "input"], default="delta")
    sp.add_argument("--mu-scale", type=_frac, default=Fraction(1))
    sp.add_argument("--allow-low-weight", action="store_true", help="skip the k > 2n check")
    sp.set_defaults(fn=cmd_project)

    sp = sub.add_parser("petersson", help="numeric Petersson products at level one")
    sp.add_argument("--poincare", action="store_true", help="compare Vol <Delta, G_1> with its closed form")
    sp.add_argument("--C", type=int, default=300)
    sp.add_argument("--ymax", type=float, default=8.0)
    sp.add_argument("--nx", type=int, default=32)
    sp.add_argument("--ny", type=int, default=40)
    sp.add_argument("--trace-bound", type=int, default=30)
    sp.set_defaults(fn=cmd_petersson)

    sp = sub.add_parser("selftest", help="run the acceptance suite")
    sp.set_defaults(fn=cmd_selftest)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.threads is not None:
        if args.threads < 1:
            ap.print_usage(sys.stderr)
            sys.stderr.write("halfweight: error: --threads must be positive\n")
            return 2
        _accel.set_threads(args.threads)
    try:
        payload = args.fn(args)
    except UsageError as exc:
        ap.print_usage(sys.stderr)
        sys.stderr.write(f"halfweight: error: {exc}\n")
        return 2
    except Exception as exc:  # compute errors are reported, not raised
        sys.stdout.write(json.dumps({"error": str(exc), "type": type(exc).__name__}) + "\n")
        return 1
    emit(payload, args.csv)
    if args.command == "selftest" and not payload.get("ok"):
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
