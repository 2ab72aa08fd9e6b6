"""Evaluable functions ``M(t, u)``, their combinators and indexed families."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Mapping, Sequence

import numpy as np

from .. import specdsl
from ..errors import DominationViolated, EmptyFamily, SpecError

DEFAULT_U_MAX = 2.0**10
DEFAULT_TAIL = 64

MUSIELAK_N = "MusielakN"
MUSIELAK_ORLICZ = "MusielakOrlicz"
UNCLASSIFIED = "Unclassified"


@dataclass(frozen=True)
class TDomain:
    """Where ``t`` lives: a closed interval or a finite point set."""

    interval: tuple | None = None
    points: tuple | None = None

    def __post_init__(self):
        if (self.interval is None) == (self.points is None):
            raise SpecError("a t-domain is either an interval or a point set")
        if self.interval is not None:
            lo, hi = self.interval
            if not lo <= hi:
                raise SpecError(f"empty t-interval {self.interval}")

    @classmethod
    def of(cls, lo: float, hi: float) -> "TDomain":
        return cls(interval=(float(lo), float(hi)))

    @classmethod
    def at(cls, *points: float) -> "TDomain":
        return cls(points=tuple(sorted(float(p) for p in points)))

    @property
    def continuum(self) -> bool:
        return self.interval is not None and self.interval[0] < self.interval[1]

    def sample(self, n: int = 33) -> np.ndarray:
        if self.points is not None:
            return np.array(self.points)
        lo, hi = self.interval
        if lo == hi:
            return np.array([lo])
        return np.linspace(lo, hi, n)

    def to_json(self):
        if self.points is not None:
            return {"points": list(self.points)}
        return list(self.interval)


class MusielakFunction:
    """Base class for an evaluable ``M(t, u)``.

    Subclasses implement :meth:`_eval` on broadcast numpy arrays.  Instances
    are immutable; ``claimed`` records what the user asserts the function to
    be, which the verification code never trusts.
    """

    tdomain: TDomain
    claimed: str = UNCLASSIFIED
    u_max: float = DEFAULT_U_MAX

    def __call__(self, t, u):
        t_arr, u_arr = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(u, dtype=float))
        out = np.asarray(self._eval(t_arr, u_arr), dtype=float)
        if out.shape != t_arr.shape:
            out = np.broadcast_to(out, t_arr.shape).copy()
        if out.ndim == 0:
            return float(out)
        return out

    def _eval(self, t: np.ndarray, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def describe(self) -> str:
        return type(self).__name__

    def to_dict(self) -> dict:
        raise NotImplementedError

    def __repr__(self):
        return f"<{type(self).__name__} {self.describe()}>"


class ExprFunction(MusielakFunction):
    """A function given by an expression in ``t``, ``u`` and named parameters."""

    def __init__(
        self,
        expr: str | specdsl.Expr,
        params: Mapping[str, float] | None = None,
        tdomain: TDomain | None = None,
        claimed: str = UNCLASSIFIED,
        u_max: float = DEFAULT_U_MAX,
        catalog_name: str | None = None,
    ):
        self.params = {k: float(v) for k, v in (params or {}).items()}
        if isinstance(expr, str):
            self.expr = specdsl.parse(expr, params=self.params.keys())
        else:
            self.expr = expr
        missing = specdsl.free_parameters(self.expr) - self.params.keys()
        if missing:
            raise SpecError(f"unbound parameters: {', '.join(sorted(missing))}")
        self.tdomain = tdomain or TDomain.of(-1.0, 1.0)
        self.claimed = claimed
        self.u_max = float(u_max)
        self.catalog_name = catalog_name

    @property
    def text(self) -> str:
        return specdsl.pretty(self.expr)

    def _eval(self, t, u):
        return specdsl.evaluate(self.expr, t, u, self.params)

    def describe(self) -> str:
        if self.catalog_name:
            args = ",".join(f"{k}={v:g}" for k, v in sorted(self.params.items()))
            return f"catalog:{self.catalog_name}" + (f"({args})" if args else "")
        return self.text

    def to_dict(self) -> dict:
        if self.catalog_name:
            d = {"catalog": self.catalog_name}
            if self.params:
                d["params"] = dict(self.params)
            return d
        return {"expr": self.text, "params": dict(self.params), "tdomain": self.tdomain.to_json()}


class CallableFunction(MusielakFunction):
    """Wraps a vectorised Python callable ``f(t, u)``; used by tests and scripts."""

    def __init__(self, func: Callable, tdomain: TDomain | None = None, name: str = "callable",
                 claimed: str = UNCLASSIFIED, u_max: float = DEFAULT_U_MAX):
        self.func = func
        self.tdomain = tdomain or TDomain.of(-1.0, 1.0)
        self.name = name
        self.claimed = claimed
        self.u_max = u_max

    def _eval(self, t, u):
        return self.func(t, u)

    def describe(self) -> str:
        return self.name

    def to_dict(self) -> dict:
        return {"callable": self.name}


# -- combinators ------------------------------------------------------------


def _merge_domains(children: Sequence[MusielakFunction]) -> TDomain:
    return children[0].tdomain


def _merge_claims(children) -> str:
    claims = {c.claimed for c in children}
    return claims.pop() if len(claims) == 1 else UNCLASSIFIED


class Sum(MusielakFunction):
    def __init__(self, *children: MusielakFunction):
        if not children:
            raise EmptyFamily("sum of nothing")
        self.children = tuple(children)
        self.tdomain = _merge_domains(children)
        self.claimed = _merge_claims(children)
        self.u_max = min(c.u_max for c in children)

    def _eval(self, t, u):
        out = self.children[0](t, u)
        for c in self.children[1:]:
            out = out + c(t, u)
        return out

    def describe(self) -> str:
        return " + ".join(f"[{c.describe()}]" for c in self.children)

    def to_dict(self) -> dict:
        return {"combinator": "sum", "children": [c.to_dict() for c in self.children]}


class Scale(MusielakFunction):
    def __init__(self, r: float, child: MusielakFunction):
        r = float(r)
        if not (r > 0 and math.isfinite(r)):
            raise SpecError(f"scale factor must be a positive real, got {r}")
        self.r = r
        self.child = child
        self.tdomain = child.tdomain
        self.claimed = child.claimed
        self.u_max = child.u_max

    def _eval(self, t, u):
        return self.r * self.child(t, u)

    def describe(self) -> str:
        return f"{self.r:g}*[{self.child.describe()}]"

    def to_dict(self) -> dict:
        return {"combinator": "scale", "r": self.r, "child": self.child.to_dict()}


def sum_(m1: MusielakFunction, m2: MusielakFunction, *more: MusielakFunction) -> Sum:
    return Sum(m1, m2, *more)


def scale(r: float, m: MusielakFunction) -> Scale:
    return Scale(r, m)


class FunctionFamily:
    """An indexed sequence ``n -> M_n`` for ``n = start .. tail``.

    ``tail`` is the finite window standing in for ``n -> infinity``.  An
    optional ``dominator`` G must satisfy ``|M_n| <= G`` on the working grid,
    and an optional ``limit`` is the known pointwise limit of the sequence.
    """

    def __init__(
        self,
        members: Sequence[MusielakFunction] | Callable[[int], MusielakFunction],
        tail: int | None = None,
        start: int = 1,
        dominator: MusielakFunction | None = None,
        limit: MusielakFunction | None = None,
        spec: dict | None = None,
    ):
        if callable(members) and not isinstance(members, (list, tuple)):
            if tail is None:
                tail = DEFAULT_TAIL
            self._gen = members
            self._given = None
        else:
            members = list(members)
            if not members:
                raise EmptyFamily("family has no members")
            self._gen = None
            self._given = members
            tail = start + len(members) - 1 if tail is None else tail
            if tail - start + 1 > len(members):
                raise SpecError(f"tail {tail} exceeds the {len(members)} listed members")
        if tail < start or tail < 1:
            raise EmptyFamily(f"empty index window [{start}, {tail}]")
        self.start = int(start)
        self.tail = int(tail)
        self.dominator = dominator
        self.limit = limit
        self.spec = spec

    @classmethod
    def from_expr(cls, text: str, index: str = "n", start: int = 1, tail: int = DEFAULT_TAIL,
                  params: Mapping[str, float] | None = None, tdomain: TDomain | None = None,
                  dominator=None, limit=None, claimed: str = UNCLASSIFIED) -> "FunctionFamily":
        params = dict(params or {})
        expr = specdsl.parse(text, params=set(params) | {index})

        def member(n: int) -> ExprFunction:
            return ExprFunction(expr, {**params, index: float(n)}, tdomain, claimed)

        spec = {"expr": text, "index": index, "start": start, "tail": tail}
        if params:
            spec["params"] = params
        return cls(member, tail=tail, start=start, dominator=dominator, limit=limit, spec=spec)

    @property
    def indices(self) -> range:
        return range(self.start, self.tail + 1)

    @cached_property
    def members(self) -> tuple:
        if self._given is not None:
            return tuple(self._given[: self.tail - self.start + 1])
        return tuple(self._gen(n) for n in self.indices)

    def member(self, n: int) -> MusielakFunction:
        return self.members[n - self.start]

    def with_tail(self, tail: int) -> "FunctionFamily":
        src = self._gen if self._gen is not None else self._given
        spec = dict(self.spec, tail=tail) if self.spec else None
        return FunctionFamily(src, tail=tail, start=self.start, dominator=self.dominator,
                              limit=self.limit, spec=spec)

    def stack(self, t, u) -> np.ndarray:
        """Member values with the index along axis 0."""
        return np.stack([np.asarray(m(t, u), dtype=float) for m in self.members])

    def check_domination(self, t, u) -> None:
        if self.dominator is None:
            return
        g = np.asarray(self.dominator(t, u), dtype=float)
        t_b, u_b = np.broadcast_arrays(np.asarray(t, float), np.asarray(u, float))
        for n, m in zip(self.indices, self.members):
            excess = np.abs(np.asarray(m(t, u), dtype=float)) - g
            if np.any(excess > 1e-12 * np.maximum(1.0, np.abs(g))):
                i = np.unravel_index(np.argmax(excess), excess.shape)
                raise DominationViolated(
                    "family member exceeds its dominator",
                    {"n": n, "t": float(t_b[i]), "u": float(u_b[i]), "excess": float(excess[i])},
                )

    def to_dict(self) -> dict:
        d = dict(self.spec) if self.spec else {"members": [m.to_dict() for m in self.members]}
        d["tail"] = self.tail
        if self.dominator is not None:
            d["dominator"] = self.dominator.to_dict()
        if self.limit is not None:
            d["limit"] = self.limit.to_dict()
        return d


class FamilyCombinator(MusielakFunction):
    """Pointwise sup/inf and windowed limsup/liminf over a family.

    ``limsup`` is ``min_n max_{n<=k<=tail} M_k`` and ``liminf`` is
    ``max_n min_{n<=k<=tail} M_k``.  ``n`` runs over the first half of the
    index window only: letting it reach ``tail`` would make the last window
    a single member and collapse both to ``M_tail``.
    """

    KINDS = ("sup", "inf", "limsup", "liminf")

    def __init__(self, kind: str, family: FunctionFamily):
        if kind not in self.KINDS:
            raise SpecError(f"unknown family combinator {kind!r}")
        self.kind = kind
        self.family = family
        members = family.members
        if not members:
            raise EmptyFamily("family has no members")
        self.tdomain = members[0].tdomain
        self.claimed = _merge_claims(members)
        self.u_max = min(m.u_max for m in members)

    def _eval(self, t, u):
        vals = self.family.stack(t, u)
        if self.kind == "sup":
            return vals.max(axis=0)
        if self.kind == "inf":
            return vals.min(axis=0)
        last_n = (len(vals) - 1) // 2
        rev = vals[::-1]
        if self.kind == "limsup":
            tails = np.maximum.accumulate(rev, axis=0)[::-1]
            return tails[: last_n + 1].min(axis=0)
        tails = np.minimum.accumulate(rev, axis=0)[::-1]
        return tails[: last_n + 1].max(axis=0)

    def describe(self) -> str:
        return f"{self.kind}_{{n={self.family.start}..{self.family.tail}}}"

    def to_dict(self) -> dict:
        return {"combinator": self.kind, "family": self.family.to_dict()}


def pointwise_sup(family: FunctionFamily) -> FamilyCombinator:
    return FamilyCombinator("sup", family)


def pointwise_inf(family: FunctionFamily) -> FamilyCombinator:
    return FamilyCombinator("inf", family)


def lim_sup(family: FunctionFamily) -> FamilyCombinator:
    return FamilyCombinator("limsup", family)


def lim_inf(family: FunctionFamily) -> FamilyCombinator:
    return FamilyCombinator("liminf", family)


# -- catalog ----------------------------------------------------------------

# name -> (expression, default params, t-domain, claimed class, working U_max)
CATALOG = {
    "power_tu2": ("(t*u)^2", {}, TDomain.of(-1, 1), MUSIELAK_N, DEFAULT_U_MAX),
    # exp(|u|+|t|) normalised so that M(t,0) = 0 and the slope at 0 vanishes
    "exp_abs": ("exp(abs(t))*(exp(abs(u)) - 1 - abs(u))", {}, TDomain.of(-1, 1), MUSIELAK_N, 2.0**9),
    # the unnormalised text; M(t,0) = exp(|t|) - |t| != 0
    "exp_abs_literal": ("exp(abs(u) + abs(t)) - abs(u) - abs(t)", {}, TDomain.of(-1, 1), UNCLASSIFIED, 2.0**9),
    "geo_minus_one": ("a^(t*abs(u)) - 1", {"a": math.e}, TDomain.of(0, 2), MUSIELAK_ORLICZ, 2.0**8),
    "affine_slope": ("(t + 1)^2*abs(u)", {}, TDomain.of(0, 1), MUSIELAK_ORLICZ, DEFAULT_U_MAX),
}


def catalog(name: str, tdomain: TDomain | None = None, **params: float) -> ExprFunction:
    """Built-in example functions by name; keyword arguments override parameters."""
    try:
        text, defaults, dom, claimed, u_max = CATALOG[name]
    except KeyError:
        raise SpecError(f"unknown catalog entry {name!r}; known: {', '.join(sorted(CATALOG))}") from None
    unknown = set(params) - set(defaults)
    if unknown:
        raise SpecError(f"catalog entry {name!r} has no parameter(s) {', '.join(sorted(unknown))}")
    if name == "geo_minus_one" and params.get("a", math.e) <= 1:
        raise SpecError("geo_minus_one needs a > 1")
    return ExprFunction(text, {**defaults, **params}, tdomain or dom, claimed, u_max, catalog_name=name)
