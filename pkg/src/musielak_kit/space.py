"""Modulars, Luxemburg norms and space-level checks.

For a field ``f`` (the sampled values of ``t -> ||f(t)||``) and a function
``M`` the modular is ``rho(f) = integral M(t, f(t)) dmu`` and the Luxemburg
norm is ``inf{lam > 0 : rho(f / lam) <= 1}``.  Since ``lam -> rho(f/lam)``
is nonincreasing, the infimum is found by bracketing and bisection.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import (
    BracketFailure,
    EvaluationOverflow,
    HypothesisViolated,
    IntegrationOverflow,
    MonotonicityViolated,
    NonmonotoneModular,
    SpecError,
)
from .measure import MeasureSpace, ScalarField, integrate
from .nfunc.axioms import finite_u_max, safe_eval
from .nfunc.functions import FamilyCombinator, FunctionFamily, MusielakFunction, Sum

OVERFLOW_CAP = 1e300
MAX_BRACKET_STEPS = 200


@dataclass(frozen=True)
class ModularResult:
    value: float
    overflow: bool = False

    def exceeds_one(self) -> bool:
        return self.overflow or self.value > 1.0


@dataclass
class NormResult:
    norm: float
    bracket: tuple
    iterations: int
    modular_at_norm: float

    def to_dict(self) -> dict:
        return {
            "norm": self.norm,
            "bracket": list(self.bracket),
            "iterations": self.iterations,
            "modular_at_norm": self.modular_at_norm,
        }


def _field_values(f, space: MeasureSpace) -> np.ndarray:
    if isinstance(f, ScalarField):
        return f.values_on(space)
    v = np.asarray(f, dtype=float)
    if v.ndim == 0:
        v = np.full(space.size, float(v))
    return ScalarField(values=v).values_on(space)


def modular(f, m: MusielakFunction, space: MeasureSpace, scale: float = 1.0) -> ModularResult:
    """``integral M(t, f(t)/scale) dmu`` with an overflow flag.

    ``f`` is a :class:`ScalarField` or node values.  Integrand values above
    ``1e300`` (or a non-finite evaluation) set ``overflow`` and give an
    infinite value instead of raising.
    """
    v = _field_values(f, space)
    if isinstance(m, Sum):
        # integrate term by term so the modular is additive in M to the last bit
        parts = [modular(v, c, space, scale) for c in m.children]
        if any(p.overflow for p in parts):
            return ModularResult(math.inf, True)
        total = math.fsum(p.value for p in parts)
        return ModularResult(total) if math.isfinite(total) else ModularResult(math.inf, True)
    try:
        g = np.asarray(m(space.nodes, v / scale), dtype=float)
    except EvaluationOverflow:
        return ModularResult(math.inf, True)
    if not np.all(np.isfinite(g)) or np.any(g > OVERFLOW_CAP):
        return ModularResult(math.inf, True)
    try:
        return ModularResult(integrate(g, space))
    except IntegrationOverflow:
        return ModularResult(math.inf, True)


def luxemburg_norm(f, m: MusielakFunction, space: MeasureSpace, rel_tol: float = 1e-8,
                   seed: float = 1.0) -> NormResult:
    """Luxemburg norm of ``f`` by bracketing from ``seed`` and bisecting.

    Returns the upper end of the final bracket, which is always feasible
    (modular <= 1), while the lower end is infeasible; their gap is at most
    ``rel_tol`` times the upper end.
    """
    if not 0 < rel_tol <= 0.1:
        raise SpecError(f"rel_tol must lie in (0, 0.1], got {rel_tol}")
    v = _field_values(f, space)
    if not np.any((v != 0) & (space.weights > 0)):
        return NormResult(0.0, (0.0, 0.0), 0, modular(v, m, space).value)

    seen: list[tuple[float, float]] = []

    def rho(lam: float) -> float:
        r = modular(v, m, space, lam)
        val = math.inf if r.overflow else r.value
        for lam_s, val_s in seen:
            # rounding in M may wiggle the modular by a few ulps
            slack = 1e-9 * max(abs(val_s), abs(val)) if math.isfinite(val_s + val) else 0.0
            if (lam_s < lam and val_s < val - slack) or (lam_s > lam and val_s > val + slack):
                raise NonmonotoneModular(
                    f"modular({lam_s:g}) = {val_s:g} but modular({lam:g}) = {val:g}"
                )
        seen.append((lam, val))
        if len(seen) > 4:
            seen.pop(0)
        return val

    iterations = 0
    lam = float(seed)
    if rho(lam) > 1.0:
        lo = lam
        for _ in range(MAX_BRACKET_STEPS):
            iterations += 1
            lam *= 2.0
            if rho(lam) <= 1.0:
                break
            lo = lam
        else:
            raise BracketFailure(f"modular still > 1 after {MAX_BRACKET_STEPS} doublings of lambda")
        hi = lam
    else:
        hi = lam
        for _ in range(MAX_BRACKET_STEPS):
            iterations += 1
            lam *= 0.5
            if rho(lam) > 1.0:
                break
            hi = lam
        else:
            raise BracketFailure(f"modular still <= 1 after {MAX_BRACKET_STEPS} halvings of lambda")
        lo = lam
    while hi - lo > rel_tol * hi:
        iterations += 1
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if rho(mid) > 1.0:
            lo = mid
        else:
            hi = mid
    return NormResult(hi, (lo, hi), iterations, modular(v, m, space, hi).value)


# -- embedding ----------------------------------------------------------------


@dataclass
class EmbeddingReport:
    r: float
    u0: float
    hypothesis_holds: bool
    max_violation: float
    witness: dict | None
    fields_checked: int
    modular_inequality_holds: bool
    modular_witness: dict | None
    reverse: "EmbeddingReport | None" = None

    @property
    def holds(self) -> bool:
        ok = self.hypothesis_holds and self.modular_inequality_holds
        if self.reverse is not None:
            ok = ok and self.reverse.holds
        return ok

    def to_dict(self) -> dict:
        d = asdict(self)
        d["holds"] = self.holds
        return d


def embedding_check(m1: MusielakFunction, m2: MusielakFunction, r: float, u0: float, space: MeasureSpace,
                    test_fields=(), t_grid=None, u_grid=None, r_reverse: float | None = None,
                    strict: bool = False, atol: float = 1e-12) -> EmbeddingReport:
    """Check ``M2(t,u) <= r M1(t,u)`` for ``u >= u0`` and its modular consequence.

    The hypothesis is scanned on ``t_grid`` (default: the space's nodes) times
    ``u_grid`` (default: 64 geometric points from ``u0``).  Each test field
    whose node values are all ``>= u0`` must then satisfy
    ``modular(f, M2) <= r * modular(f, M1)``.  With ``r_reverse`` the
    opposite inclusion is checked too, giving equality of the two spaces.
    ``strict`` raises :class:`HypothesisViolated` instead of reporting.
    """
    if not (r > 0 and u0 > 0):
        raise SpecError("r and u0 must be positive")
    ts = space.nodes if t_grid is None else np.atleast_1d(np.asarray(t_grid, dtype=float))
    if u_grid is None:
        top = min(finite_u_max(m1, ts, m1.u_max), finite_u_max(m2, ts, m2.u_max))
        us = np.geomspace(u0, max(top, u0), 64)
    else:
        us = np.asarray(u_grid, dtype=float)
        us = us[us >= u0]
    a = safe_eval(m1, ts[:, None], us[None, :])
    b = safe_eval(m2, ts[:, None], us[None, :])
    with np.errstate(invalid="ignore"):
        viol = b - r * a
    viol = np.where(np.isnan(viol), np.inf, viol)
    rel = viol / np.maximum(1.0, np.abs(r * a))
    i, j = np.unravel_index(np.argmax(rel), rel.shape)
    holds = bool(rel[i, j] <= atol)
    witness = None if holds else {"t": float(ts[i]), "u": float(us[j]), "M2": float(b[i, j]),
                                  "r*M1": float(r * a[i, j])}
    if strict and not holds:
        raise HypothesisViolated("M2 <= r*M1 fails", witness)

    checked, mod_ok, mod_witness = 0, True, None
    if holds:
        for k, f in enumerate(test_fields):
            v = _field_values(f, space)
            if np.any(v[space.weights > 0] < u0):
                continue
            checked += 1
            lhs = modular(v, m2, space)
            rhs = modular(v, m1, space)
            if lhs.overflow and not rhs.overflow:
                ok = False
            elif rhs.overflow:
                ok = True
            else:
                ok = lhs.value <= r * rhs.value * (1 + 1e-12) + 1e-300
            if not ok and mod_ok:
                mod_ok = False
                mod_witness = {"field": k, "modular_M2": lhs.value, "r*modular_M1": r * rhs.value}
        if strict and not mod_ok:
            raise HypothesisViolated("modular inequality fails", mod_witness)

    reverse = None
    if r_reverse is not None:
        reverse = embedding_check(m2, m1, r_reverse, u0, space, test_fields, t_grid, u_grid,
                                  None, strict, atol)
    return EmbeddingReport(float(r), float(u0), holds, float(viol[i, j]), witness, checked, mod_ok,
                           mod_witness, reverse)


# -- families -------------------------------------------------------------------


@dataclass
class FamilyNormReport:
    variant: str
    indices: list
    member_norms: list
    excluded: list
    combinator_norms: dict
    aggregates: dict
    gaps: dict
    passed: bool
    tol: float
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _field_grid(v: np.ndarray, n: int = 33) -> np.ndarray:
    top = float(v.max()) if v.size else 1.0
    return np.linspace(0.0, max(top, 1e-12) * 4.0, n)


def _norms(functions, v, space, rel_tol, threads: int):
    def one(m):
        if _is_degenerate(m, space, v):
            return None
        return luxemburg_norm(v, m, space, rel_tol)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(one, functions))
    return [one(m) for m in functions]


def _is_degenerate(m: MusielakFunction, space: MeasureSpace, v: np.ndarray) -> bool:
    """Identically zero at the space's nodes on the sampled u-range."""
    us = _field_grid(v)
    vals = safe_eval(m, space.nodes[:, None], us[None, :])
    return bool(np.all(vals == 0))


def family_norm_check(family: FunctionFamily, f, space: MeasureSpace, rel_tol: float = 1e-8,
                      variant: str = "monotone", tol: float = 1e-6, threads: int = 1) -> FamilyNormReport:
    """Norm identities for families of functions.

    ``monotone``: requires ``M_n <= M_{n+1}`` at every (node, u) sampled
    (else :class:`MonotonicityViolated`) and compares the norms under the
    sup and inf combinators with the max and min of the member norms.
    Identically zero members are left out of both aggregates.

    ``dominated``: requires ``family.dominator``; checks ``|M_n| <= G``,
    then compares member norms with the norm under the limit (``family.limit``
    when given, else the windowed limsup) and asks the gaps to be
    nonincreasing in ``n`` up to the bisection resolution.
    """
    v = _field_values(f, space)
    ts = space.nodes
    us = _field_grid(v)
    T, U = ts[:, None], us[None, :]
    members = family.members
    if variant == "monotone":
        vals = np.stack([safe_eval(m, T, U) for m in members])
        diff = vals[:-1] - vals[1:]
        bad = diff > 1e-12 * np.maximum(1.0, np.abs(vals[1:]))
        if np.any(bad):
            k, i, j = np.unravel_index(np.argmax(bad), bad.shape)
            raise MonotonicityViolated("family is not nondecreasing in n", {
                "n": family.start + int(k), "t": float(ts[i]), "u": float(us[j])})
    elif variant == "dominated":
        if family.dominator is None:
            raise SpecError("the dominated variant needs a dominator")
        family.check_domination(T, U)
    else:
        raise SpecError(f"unknown variant {variant!r}")

    results = _norms(members, v, space, rel_tol, threads)
    idx = list(family.indices)
    norms = [None if r is None else r.norm for r in results]
    excluded = [n for n, x in zip(idx, norms) if x is None]
    live = [(n, x) for n, x in zip(idx, norms) if x is not None]
    if not live:
        raise SpecError("every family member is degenerate")
    details: dict = {}
    if variant == "monotone":
        sup_norm = luxemburg_norm(v, FamilyCombinator("sup", family), space, rel_tol).norm
        nondeg = FunctionFamily([family.member(n) for n, _ in live], start=live[0][0],
                                tail=live[0][0] + len(live) - 1)
        inf_norm = luxemburg_norm(v, FamilyCombinator("inf", nondeg), space, rel_tol).norm
        agg = {"max_member": max(x for _, x in live), "min_member": min(x for _, x in live)}
        gaps = {"sup": abs(sup_norm - agg["max_member"]), "inf": abs(inf_norm - agg["min_member"])}
        combos = {"sup": sup_norm, "inf": inf_norm}
        passed = gaps["sup"] <= tol and gaps["inf"] <= tol
    else:
        limit = family.limit if family.limit is not None else FamilyCombinator("limsup", family)
        lim_norm = luxemburg_norm(v, limit, space, rel_tol).norm
        if family.limit is None:
            # the window only approximates a limit when limsup and liminf agree
            liminf = safe_eval(FamilyCombinator("liminf", family), T, U)
            limsup = safe_eval(limit, T, U)
            details["limsup_liminf_gap"] = float(np.max(np.abs(limsup - liminf)))
        seq = [abs(x - lim_norm) for _, x in live]
        slack = 2 * rel_tol * lim_norm
        nonincreasing = all(b <= a + slack for a, b in zip(seq, seq[1:]))
        combos = {"limit": lim_norm}
        agg = {"tail_member": live[-1][1]}
        gaps = {"tail": seq[-1], "sequence": seq}
        details["gaps_nonincreasing"] = nonincreasing
        passed = nonincreasing
    return FamilyNormReport(variant, idx, norms, excluded, combos, agg, gaps, bool(passed), tol, details)
