"""Command-line front end.

Exit codes: 0 when every asserted property holds, 1 on a property
violation (the report carries a witness), 2 on bad input.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import approx, space
from .errors import MusielakError
from .measure import ScalarField
from .nfunc import Grid, Verdict, delta2_check, representation_defect, verify_axioms
from .nfunc.functions import TDomain
from .specio import load_family_spec, load_field_spec, load_function, load_measure_spec

SCHEMA = "musielak-kit/1"
EXPECT = {
    "n-function": Verdict.MUSIELAK_N,
    "orlicz-only": Verdict.MUSIELAK_ORLICZ_ONLY,
    "neither": Verdict.NEITHER,
}


class InputError(Exception):
    pass


def _param(text: str) -> tuple[str, float]:
    name, sep, value = text.partition("=")
    if not sep or not name:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got {text!r}")
    try:
        return name.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number in {text!r}") from None


def _tgrid(text: str) -> np.ndarray:
    parts = text.split(":")
    try:
        if len(parts) != 3:
            raise ValueError
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi:n, got {text!r}") from None
    if n < 1 or hi < lo:
        raise argparse.ArgumentTypeError(f"bad t-grid {text!r}")
    return np.linspace(lo, hi, n)


def _rect(text: str) -> approx.Rectangle:
    try:
        lo, hi, um = (float(x) for x in text.split(":"))
        return approx.Rectangle(lo, hi, um)
    except (ValueError, MusielakError):
        raise argparse.ArgumentTypeError(f"expected tlo:thi:umax with tlo < thi and umax > 0, got {text!r}") from None


def _levels(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected L or L1,L2,..., got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="musielak", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="verb", required=True)

    def common(sp, measure=False, field=False):
        sp.add_argument("--nfunc", action="append", required=True, metavar="SPEC",
                        help="catalog:NAME, expr:TEXT, inline JSON or a JSON file")
        sp.add_argument("--param", action="append", type=_param, default=[], metavar="NAME=VAL")
        sp.add_argument("--tgrid", type=_tgrid, metavar="lo:hi:n")
        sp.add_argument("--tol", type=float, default=1e-8, help="norm bisection tolerance")
        sp.add_argument("--atol", type=float, default=1e-6, help="tolerance of identity checks")
        sp.add_argument("--tail", type=int)
        sp.add_argument("--json", metavar="FILE", help="write the JSON report here ('-' for stdout)")
        sp.add_argument("--threads", type=int, default=1)
        if measure:
            sp.add_argument("--measure", default="lebesgue01", metavar="FILE|builtin")
        if field:
            sp.add_argument("--field", default="const:1", metavar="SPEC")
        return sp

    for verb in ("verify", "classify"):
        sp = common(sub.add_parser(verb))
        sp.add_argument("--expect", choices=sorted(EXPECT))
        sp.add_argument("--limit-tol", type=float, default=1e-3)
    common(sub.add_parser("norm"), measure=True, field=True)
    common(sub.add_parser("modular"), measure=True, field=True)
    sp = common(sub.add_parser("delta2"))
    sp.add_argument("--u0", type=float, default=1.0)
    sp.add_argument("--utop", type=float, default=30.0)
    sp.add_argument("--cap", type=float, default=1e6)
    sp = common(sub.add_parser("embed"), measure=True)
    sp.add_argument("--r", type=float, default=1.0)
    sp.add_argument("--r-reverse", type=float)
    sp.add_argument("--u0", type=float, default=0.1)
    sp.add_argument("--fields", type=int, default=50, help="number of random test fields")
    sp.add_argument("--seed", type=int, default=0)
    sp = common(sub.add_parser("family-norm"), measure=True, field=True)
    sp.add_argument("--variant", choices=("monotone", "dominated"))
    sp = common(sub.add_parser("approx"), measure=True)
    sp.add_argument("--field", metavar="SPEC", help="also compare norms of this field")
    sp.add_argument("--rect", type=_rect, required=True, metavar="tlo:thi:umax")
    sp.add_argument("--levels", type=_levels, default=[6, 8, 10, 12], metavar="L[,L...]")
    sp.add_argument("--rel-tol", type=float, default=1e-3)
    sp = common(sub.add_parser("repr-check"))
    sp.add_argument("--umax", type=float, default=3.0)
    sp.add_argument("--nu", type=int, default=25)
    sp.add_argument("--inner", type=int, default=2001)
    return p


def _clean(obj):
    """JSON-safe copy: non-finite floats become strings, numpy scalars plain."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


def _single(args):
    if len(args.nfunc) != 1:
        raise InputError(f"{args.verb} takes exactly one --nfunc")
    return load_function(args.nfunc[0], dict(args.param), args.tail)


def _grid(m, args) -> Grid:
    if args.tgrid is not None:
        return Grid.build(m, t=args.tgrid, continuum=True)
    return Grid.build(m)


def run_verify(args):
    m = _single(args)
    report = verify_axioms(m, _grid(m, args), args.limit_tol)
    verdict = report.classification
    result = report.to_dict()
    status, witnesses = "ok", []
    if args.expect and EXPECT[args.expect] != verdict:
        status = "violation"
        witnesses = [{"property": k, **w} for k, w in report.witnesses.items()]
        if not witnesses:
            witnesses = [{"property": "classification", "t": report.t_grid[0], "verdict": verdict.value}]
    lines = [f"function: {m.describe()}", f"classification: {verdict.value}"]
    if args.verb == "verify":
        for k in ("axiom1", "axiom2", "axiom3", "axiom4", "zero_at_zero"):
            lines.append(f"  {k:<13} {'pass' if report.verdicts[k] else 'FAIL'}")
        lines.append("  axiom5        by-construction")
    lines.append(f"limit0 estimate {report.limit0_estimate:.6g}, slope at U_max {report.limit_inf_slope:.6g}")
    if args.verb == "classify":
        result = {"verdict": verdict.value, "report": result}
    return result, status, witnesses, lines


def _field_and_space(args):
    return load_field_spec(args.field), load_measure_spec(args.measure)


def run_norm(args):
    m = _single(args)
    f, sp = _field_and_space(args)
    r = space.luxemburg_norm(f, m, sp, args.tol)
    return r.to_dict(), "ok", [], [f"norm = {r.norm:.10g}", f"bracket = [{r.bracket[0]:.10g}, {r.bracket[1]:.10g}]",
                                   f"iterations = {r.iterations}, modular at norm = {r.modular_at_norm:.10g}"]


def run_modular(args):
    m = _single(args)
    f, sp = _field_and_space(args)
    r = space.modular(f, m, sp)
    return {"value": r.value, "overflow": r.overflow}, "ok", [], [f"modular = {r.value:.10g}" + (" (overflow)" if r.overflow else "")]


def run_delta2(args):
    m = _single(args)
    grid = _grid(m, args) if args.tgrid is not None else None
    r = delta2_check(m, args.u0, grid, args.utop, cap=args.cap)
    return r.to_dict(), "ok", [], [f"K estimate = {r.K_estimate:.10g} on u in [{r.u0:g}, {r.u_top:g}]",
                                   f"bounded = {r.bounded}"]


def run_embed(args):
    if len(args.nfunc) != 2:
        raise InputError("embed takes --nfunc M1 --nfunc M2")
    m1, m2 = (load_function(s, dict(args.param), args.tail) for s in args.nfunc)
    sp = load_measure_spec(args.measure)
    rng = np.random.default_rng(args.seed)
    fields = [ScalarField(values=rng.uniform(args.u0, 4.0, sp.size)) for _ in range(args.fields)]
    r = space.embedding_check(m1, m2, args.r, args.u0, sp, fields, t_grid=args.tgrid, r_reverse=args.r_reverse)
    witnesses = []
    for rep, label in ((r, "M2 <= r*M1"), (r.reverse, "M1 <= r2*M2")):
        if rep is None:
            continue
        if rep.witness:
            witnesses.append({"property": label, **rep.witness})
        if rep.modular_witness:
            witnesses.append({"property": label + " (modular)", **rep.modular_witness})
    status = "ok" if r.holds else "violation"
    lines = [f"hypothesis M2 <= {args.r:g}*M1 for u >= {args.u0:g}: {'holds' if r.hypothesis_holds else 'VIOLATED'}",
             f"modular inequality on {r.fields_checked} fields: {'holds' if r.modular_inequality_holds else 'VIOLATED'}"]
    if r.witness:
        lines.append(f"witness: t={r.witness['t']:g}, u={r.witness['u']:g}")
    return r.to_dict(), status, witnesses, lines


def run_family_norm(args):
    if len(args.nfunc) != 1:
        raise InputError("family-norm takes exactly one --nfunc")
    fam, raw = load_family_spec(args.nfunc[0], dict(args.param), args.tail)
    variant = args.variant or raw.get("variant") or ("dominated" if fam.dominator is not None else "monotone")
    f, sp = _field_and_space(args)
    r = space.family_norm_check(fam, f, sp, args.tol, variant, args.atol, args.threads)
    status = "ok" if r.passed else "violation"
    witnesses = [] if r.passed else [{"property": f"{variant} family norm identity", "gaps": r.gaps}]
    lines = [f"{variant} family n={fam.start}..{fam.tail}: {'pass' if r.passed else 'FAIL'}"]
    lines += [f"  {k} norm = {v:.10g}" for k, v in r.combinator_norms.items()]
    return r.to_dict(), status, witnesses, lines


def run_approx(args):
    m = _single(args)
    if args.field:
        f = load_field_spec(args.field)
        sp = load_measure_spec(args.measure)
        r = approx.approx_space_convergence(m, args.rect, args.levels, f, sp, args.rel_tol)
        ok = r.passed and r.sup_errors_decreasing
        witnesses = [] if ok else [{"property": "convergence", "levels": r.levels, "gaps": r.gaps,
                                    "sup_errors": r.sup_errors}]
        lines = [f"L={L}: sup error {e:.4g}, norm {n:.10g}" for L, e, n in zip(r.levels, r.sup_errors, r.norms)]
        lines.append(f"target norm {r.target_norm:.10g}, final gap {r.final_gap:.3g} (threshold {r.threshold:g})")
        return r.to_dict(), "ok" if ok else "violation", witnesses, lines
    approxes = [approx.simple_approximation(m, args.rect, L) for L in sorted(args.levels)]
    errs = [a.sup_error for a in approxes]
    ok = all(b < a for a, b in zip(errs, errs[1:]))
    result = {"levels": sorted(args.levels), "sup_errors": errs,
              "approximations": [a.to_dict() for a in approxes]}
    witnesses = [] if ok else [{"property": "sup error decreasing", "sup_errors": errs}]
    lines = [f"L={a.levels}: sup error {a.sup_error:.4g}, step {a.delta:.4g}" for a in approxes]
    return result, "ok" if ok else "violation", witnesses, lines


def run_repr_check(args):
    m = _single(args)
    ts = args.tgrid if args.tgrid is not None else m.tdomain.sample(33)
    us = np.linspace(-args.umax, args.umax, args.nu)
    defect, witness = representation_defect(m, ts, us, args.inner, return_witness=True)
    ok = defect <= args.atol
    lines = [f"representation defect = {defect:.3g} (atol {args.atol:g})"]
    return {"defect": defect, "atol": args.atol, "witness": witness}, "ok" if ok else "violation", \
        ([] if ok else [{"property": "representation identity", **witness}]), lines


RUNNERS = {
    "verify": run_verify,
    "classify": run_verify,
    "norm": run_norm,
    "modular": run_modular,
    "delta2": run_delta2,
    "embed": run_embed,
    "family-norm": run_family_norm,
    "approx": run_approx,
    "repr-check": run_repr_check,
}


def _inputs(args) -> dict:
    d = {"nfunc": args.nfunc, "params": dict(args.param)}
    for key in ("measure", "field", "tol", "atol", "tail", "expect"):
        if getattr(args, key, None) is not None:
            d[key] = getattr(args, key)
    if args.tgrid is not None:
        d["tgrid"] = args.tgrid.tolist()
    return d


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        result, status, witnesses, lines = RUNNERS[args.verb](args)
    except (MusielakError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    report = _clean({"schema": SCHEMA, "verb": args.verb, "inputs": _inputs(args), "status": status,
                     "result": result, "witnesses": witnesses})
    text = json.dumps(report, sort_keys=True, indent=2)
    if args.json == "-":
        print(text)
    else:
        if args.json:
            with open(args.json, "w", encoding="utf-8") as fh:
                fh.write(text + "\n")
        print(f"[{args.verb}] {status}")
        print("\n".join(lines))
    return 0 if status == "ok" else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
