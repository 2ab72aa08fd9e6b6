"""Finite measure spaces and integration of nonnegative scalar fields.

Two families are supported: weighted point sets and a bounded interval
with a density and a fixed quadrature rule.  Either way a space reduces to
a sorted array of nodes and nonnegative weights, and integrals are weighted
sums reduced with :func:`math.fsum` in ascending node order so results do
not depend on how the integrand was evaluated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import specdsl
from .errors import IntegrationOverflow, NodeMismatch, SpecError

SCHEMES = ("midpoint", "simpson", "gauss-legendre")


@dataclass(frozen=True)
class QuadratureRule:
    scheme: str = "simpson"
    n: int = 1001

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise SpecError(f"unknown quadrature scheme {self.scheme!r}; expected one of {SCHEMES}")
        if self.n < 1:
            raise SpecError("node count must be positive")
        if self.scheme == "simpson" and (self.n < 3 or self.n % 2 == 0):
            raise SpecError(f"composite Simpson needs an odd node count >= 3, got {self.n}")

    def nodes_weights(self, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
        """Nodes and weights of the rule on ``[a, b]`` (unit density)."""
        n = self.n
        if self.scheme == "midpoint":
            h = (b - a) / n
            x = a + h * (np.arange(n) + 0.5)
            return x, np.full(n, h)
        if self.scheme == "simpson":
            x = np.linspace(a, b, n)
            h = (b - a) / (n - 1)
            w = np.full(n, 2.0)
            w[1::2] = 4.0
            w[0] = w[-1] = 1.0
            return x, w * (h / 3.0)
        x, w = np.polynomial.legendre.leggauss(n)
        return 0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w


@dataclass(frozen=True, eq=False)
class MeasureSpace:
    """A finite measure space reduced to nodes and weights.

    Build instances with :meth:`discrete` or :meth:`interval`; ``nodes`` are
    sorted ascending and duplicate-free and ``weights`` nonnegative.
    """

    kind: str
    nodes: np.ndarray
    weights: np.ndarray
    interval: tuple | None = None
    density_text: str | None = None
    rule: QuadratureRule | None = None
    points: tuple = field(default=(), repr=False)

    @classmethod
    def discrete(cls, points: Sequence[tuple[float, float]]) -> "MeasureSpace":
        pts = sorted((float(t), float(w)) for t, w in points)
        if not pts:
            raise SpecError("a discrete measure needs at least one point")
        ts = np.array([p[0] for p in pts])
        ws = np.array([p[1] for p in pts])
        if np.any(np.diff(ts) == 0):
            raise SpecError("duplicate nodes in discrete measure")
        if not (np.all(np.isfinite(ts)) and np.all(np.isfinite(ws))):
            raise SpecError("nodes and weights must be finite")
        if np.any(ws < 0):
            raise SpecError("weights must be nonnegative")
        ts.setflags(write=False)
        ws.setflags(write=False)
        return cls("discrete", ts, ws, points=tuple(pts))

    @classmethod
    def interval(
        cls,
        a: float,
        b: float,
        density: str | Callable | None = None,
        rule: QuadratureRule | None = None,
    ) -> "MeasureSpace":
        a, b = float(a), float(b)
        if not (math.isfinite(a) and math.isfinite(b) and a < b):
            raise SpecError(f"need a finite interval with a < b, got [{a}, {b}]")
        rule = rule or QuadratureRule()
        x, w = rule.nodes_weights(a, b)
        if density is None:
            text = "1"
            dens = np.ones_like(x)
        elif isinstance(density, str):
            text = density
            dens = specdsl.evaluate(specdsl.parse(density, params=()), t=x, u=0.0)
        else:
            text = None
            dens = np.asarray(density(x), dtype=float) * np.ones_like(x)
        if not np.all(np.isfinite(dens)) or np.any(dens < 0):
            raise SpecError("density must be finite and nonnegative at every quadrature node")
        w = w * dens
        x.setflags(write=False)
        w.setflags(write=False)
        return cls("interval", x, w, interval=(a, b), density_text=text, rule=rule)

    @property
    def size(self) -> int:
        return len(self.nodes)

    @property
    def total_mass(self) -> float:
        return integrate(np.ones(self.size), self)

    def to_dict(self) -> dict:
        if self.kind == "discrete":
            return {"kind": "discrete", "points": [list(p) for p in self.points]}
        a, b = self.interval
        return {
            "kind": "interval",
            "a": a,
            "b": b,
            "density": self.density_text,
            "rule": {"scheme": self.rule.scheme, "n": self.rule.n},
        }


def lebesgue01(n: int = 1001) -> MeasureSpace:
    """[0, 1] with Lebesgue measure and composite Simpson on ``n`` nodes."""
    return MeasureSpace.interval(0.0, 1.0, rule=QuadratureRule("simpson", n))


class ScalarField:
    """The nonnegative field ``t -> ||f(t)||`` at the nodes of a space.

    Holds either node values or an expression in ``t`` that is evaluated on
    :meth:`values_on`.
    """

    def __init__(self, values=None, expr: str | None = None):
        if (values is None) == (expr is None):
            raise SpecError("a field needs exactly one of values or expr")
        self.expr_text = expr
        self._expr = specdsl.parse(expr, params=()) if expr is not None else None
        self._values = None
        if values is not None:
            v = np.array(values, dtype=float).ravel()
            _validate(v)
            v.setflags(write=False)
            self._values = v

    @classmethod
    def constant(cls, c: float) -> "ScalarField":
        if not (math.isfinite(c) and c >= 0):
            raise SpecError(f"a constant field must be finite and nonnegative, got {c}")
        return cls(expr=specdsl.pretty(specdsl.Const(float(c))))

    def values_on(self, space: MeasureSpace) -> np.ndarray:
        if self._values is not None:
            if len(self._values) != space.size:
                raise NodeMismatch(f"field has {len(self._values)} values, space has {space.size} nodes")
            return self._values
        v = specdsl.evaluate(self._expr, t=space.nodes, u=0.0)
        v = np.broadcast_to(np.asarray(v, dtype=float), space.nodes.shape).copy()
        _validate(v)
        return v

    def to_dict(self) -> dict:
        if self._values is not None:
            return {"values": self._values.tolist()}
        return {"expr": self.expr_text}


def _validate(v: np.ndarray) -> None:
    if not np.all(np.isfinite(v)):
        raise SpecError("field values must be finite")
    if np.any(v < 0):
        raise SpecError("field values are norms and must be nonnegative")


def integrate(field, space: MeasureSpace) -> float:
    """Weighted sum of ``field`` over the nodes of ``space``.

    ``field`` is a :class:`ScalarField` or an array aligned with
    ``space.nodes``.  The reduction is an exactly rounded sum taken in
    ascending node order.
    """
    if isinstance(field, ScalarField):
        g = field.values_on(space)
    else:
        g = np.asarray(field, dtype=float)
        if g.ndim == 0:
            g = np.full(space.size, float(g))
    if g.shape != (space.size,):
        raise NodeMismatch(f"field has shape {g.shape}, space has {space.size} nodes")
    if not np.all(np.isfinite(g)):
        raise IntegrationOverflow("integrand is not finite at every node")
    with np.errstate(over="ignore", invalid="ignore"):
        terms = space.weights * g
    if not np.all(np.isfinite(terms)):
        raise IntegrationOverflow("weighted integrand overflowed")
    try:
        total = math.fsum(terms.tolist())
    except OverflowError as exc:
        raise IntegrationOverflow(str(exc)) from None
    if not math.isfinite(total):
        raise IntegrationOverflow("sum left the representable range")
    return total


def load_measure(spec: dict) -> MeasureSpace:
    """Build a space from its JSON form."""
    kind = spec.get("kind")
    try:
        if kind == "discrete":
            return MeasureSpace.discrete(spec["points"])
        if kind == "interval":
            rule = spec.get("rule", {})
            return MeasureSpace.interval(
                spec["a"],
                spec["b"],
                spec.get("density", "1"),
                QuadratureRule(rule.get("scheme", "simpson"), int(rule.get("n", 1001))),
            )
    except KeyError as exc:
        raise SpecError(f"measure spec is missing {exc.args[0]!r}") from None
    raise SpecError(f"unknown measure kind {kind!r}")


def load_field(spec: dict) -> ScalarField:
    if "values" in spec:
        return ScalarField(values=spec["values"])
    if "expr" in spec:
        return ScalarField(expr=spec["expr"])
    raise SpecError("field spec needs 'values' or 'expr'")
