"""Loading functions, families, fields and measures from JSON or inline shorthand."""

from __future__ import annotations

import json
import os
from typing import Mapping

from .errors import SpecError
from .measure import MeasureSpace, ScalarField, lebesgue01, load_field, load_measure
from .nfunc.functions import (
    CATALOG,
    ExprFunction,
    FamilyCombinator,
    FunctionFamily,
    MusielakFunction,
    Scale,
    Sum,
    TDomain,
    catalog,
)

BUILTIN_MEASURES = {"lebesgue01": lebesgue01}


def _read_json(text_or_path: str, what: str):
    """Inline JSON (starting with ``{``) or a path to a JSON file."""
    src = text_or_path.strip()
    if src.startswith("{"):
        origin = "<inline>"
        raw = src
    else:
        origin = src
        try:
            with open(src, encoding="utf-8") as fh:
                raw = fh.read()
        except OSError as exc:
            raise SpecError(f"cannot read {what} file {src!r}: {exc.strerror}") from None
    try:
        return json.loads(raw)
    except json.JSONDecodeError as exc:
        raise SpecError(f"{origin}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def parse_tdomain(obj) -> TDomain | None:
    if obj is None:
        return None
    if isinstance(obj, dict) and "points" in obj:
        return TDomain.at(*obj["points"])
    if isinstance(obj, (list, tuple)) and len(obj) == 2:
        return TDomain.of(*obj)
    raise SpecError(f"cannot read t-domain {obj!r}")


def function_from_dict(d: Mapping, params: Mapping[str, float] | None = None,
                       tail: int | None = None) -> MusielakFunction:
    params = dict(params or {})
    if "catalog" in d:
        p = {**d.get("params", {}), **params}
        return catalog(d["catalog"], parse_tdomain(d.get("tdomain")), **p)
    if "expr" in d:
        p = {**d.get("params", {}), **params}
        kw = {}
        if "u_max" in d:
            kw["u_max"] = float(d["u_max"])
        return ExprFunction(d["expr"], p, parse_tdomain(d.get("tdomain")), d.get("claimed", "Unclassified"), **kw)
    if "combinator" in d:
        kind = d["combinator"]
        if kind == "sum":
            children = d.get("children") or []
            if len(children) < 2:
                raise SpecError("sum needs at least two children")
            return Sum(*(function_from_dict(c, params, tail) for c in children))
        if kind == "scale":
            return Scale(float(d["r"]), function_from_dict(d["child"], params, tail))
        if kind in FamilyCombinator.KINDS:
            return FamilyCombinator(kind, family_from_dict(d["family"], params, tail))
        raise SpecError(f"unknown combinator {kind!r}")
    raise SpecError(f"function spec needs one of catalog/expr/combinator, got keys {sorted(d)}")


def family_from_dict(d: Mapping, params: Mapping[str, float] | None = None,
                     tail: int | None = None) -> FunctionFamily:
    params = {**d.get("params", {}), **(params or {})}
    start = int(d.get("start", 1))
    n_tail = int(tail if tail is not None else d.get("tail", 64))
    dominator = function_from_dict(d["dominator"]) if "dominator" in d else None
    limit = function_from_dict(d["limit"]) if "limit" in d else None
    if "expr" in d:
        index = d.get("index", "n")
        params.pop(index, None)
        return FunctionFamily.from_expr(d["expr"], index, start, n_tail, params,
                                        parse_tdomain(d.get("tdomain")), dominator, limit)
    if "members" in d:
        members = [function_from_dict(m) for m in d["members"]]
        return FunctionFamily(members, tail=min(n_tail, start + len(members) - 1), start=start,
                              dominator=dominator, limit=limit)
    raise SpecError("family spec needs 'expr' or 'members'")


def load_function(spec: str, params: Mapping[str, float] | None = None, tail: int | None = None) -> MusielakFunction:
    """``catalog:NAME``, ``expr:TEXT``, inline JSON or a JSON file."""
    if spec.startswith("catalog:"):
        name = spec.split(":", 1)[1]
        if name not in CATALOG:
            raise SpecError(f"unknown catalog entry {name!r}; known: {', '.join(sorted(CATALOG))}")
        return catalog(name, **(params or {}))
    if spec.startswith("expr:"):
        return ExprFunction(spec.split(":", 1)[1], params)
    return function_from_dict(_read_json(spec, "function"), params, tail)


def load_family_spec(spec: str, params=None, tail: int | None = None) -> tuple[FunctionFamily, dict]:
    """A family from a spec whose top level or combinator carries a ``family`` key."""
    d = _read_json(spec, "family")
    fam = d.get("family", d if "expr" in d or "members" in d else None)
    if fam is None:
        raise SpecError("family spec needs a 'family' object")
    return family_from_dict(fam, params, tail), d


def load_field_spec(spec: str) -> ScalarField:
    """``const:VALUE``, ``expr:TEXT``, inline JSON or a JSON file."""
    if spec.startswith("const:"):
        try:
            c = float(spec.split(":", 1)[1])
        except ValueError:
            raise SpecError(f"bad constant in field spec {spec!r}") from None
        return ScalarField.constant(c)
    if spec.startswith("expr:"):
        return ScalarField(expr=spec.split(":", 1)[1])
    return load_field(_read_json(spec, "field"))


def load_measure_spec(spec: str) -> MeasureSpace:
    """A builtin name, inline JSON or a JSON file.

    ``NAME.json`` falls back to the builtin ``NAME`` when no such file exists.
    """
    name = spec[len("builtin:"):] if spec.startswith("builtin:") else spec
    if name in BUILTIN_MEASURES:
        return BUILTIN_MEASURES[name]()
    if not spec.strip().startswith("{") and not os.path.exists(spec):
        stem = os.path.splitext(os.path.basename(spec))[0]
        if stem in BUILTIN_MEASURES:
            return BUILTIN_MEASURES[stem]()
    return load_measure(_read_json(spec, "measure"))
