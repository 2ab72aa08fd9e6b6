"""Grid-based verification of the N-function axioms and related checks.

All checks work on finite grids.  Properties that only need to hold for
almost every ``t`` are judged per t-node; on a sampled interval a failure
at an isolated node (both neighbours pass) is treated as a null set and
reported under ``excused`` instead of failing the verdict.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ..errors import DomainError, NonmonotoneQuotient, SpecError
from .functions import MusielakFunction

U_MIN = 1e-6
LIMIT_TOL = 1e-3
EVEN_TOL = 1e-10
CONVEX_TOL = 1e-9
ZERO_TOL = 1e-12


class Verdict(str, enum.Enum):
    MUSIELAK_N = "MusielakN"
    MUSIELAK_ORLICZ_ONLY = "MusielakOrliczOnly"
    NEITHER = "Neither"


@dataclass(frozen=True)
class Grid:
    """Sampling used by the verifiers.

    ``u_mags`` are positive magnitudes (the u-grid is ``-u_mags, 0, u_mags``);
    ``limit_u`` is the geometric sequence ``u_min * 2**k`` used for the two
    limit axioms.
    """

    t: np.ndarray
    continuum: bool
    u_mags: np.ndarray
    limit_u: np.ndarray

    @classmethod
    def build(cls, m: MusielakFunction, t=None, n_t: int = 33, n_u: int = 64,
              u_min: float = U_MIN, u_max: float | None = None, continuum: bool | None = None) -> "Grid":
        if t is None:
            ts = m.tdomain.sample(n_t)
            cont = m.tdomain.continuum if continuum is None else continuum
        else:
            ts = np.atleast_1d(np.asarray(t, dtype=float))
            cont = bool(continuum)
        top = finite_u_max(m, ts, u_max if u_max is not None else m.u_max)
        mags = np.geomspace(u_min, top, n_u)
        k = int(math.floor(math.log2(top / u_min) + 1e-12))
        limit_u = u_min * 2.0 ** np.arange(k + 1)
        return cls(ts, cont, mags, limit_u)

    @property
    def u(self) -> np.ndarray:
        return np.concatenate([-self.u_mags[::-1], [0.0], self.u_mags])


def finite_u_max(m: MusielakFunction, ts: np.ndarray, u_max: float) -> float:
    """Largest ``u_max / 2**k`` at which ``m`` evaluates finitely for every t."""
    u = float(u_max)
    for _ in range(60):
        try:
            vals = m(ts, np.full_like(ts, u))
            if np.all(np.isfinite(vals)):
                return u
        except DomainError:
            pass
        u /= 2.0
    raise SpecError(f"{m.describe()} is not finite anywhere on the u-grid")


def safe_eval(m: MusielakFunction, t, u) -> np.ndarray:
    """Evaluate on a grid, turning domain errors into NaN entries."""
    t_b, u_b = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(u, dtype=float))
    try:
        out = np.asarray(m(t_b, u_b), dtype=float)
        return np.broadcast_to(out, t_b.shape).copy()
    except DomainError:
        pass
    out = np.empty(t_b.shape)
    for idx in np.ndindex(t_b.shape):
        try:
            out[idx] = m(float(t_b[idx]), float(u_b[idx]))
        except DomainError:
            out[idx] = np.nan
    return out


def ae_holds(ok: np.ndarray, continuum: bool) -> tuple[bool, list[int]]:
    """Whether a per-node property holds almost everywhere, and which nodes were excused."""
    ok = np.asarray(ok, dtype=bool)
    bad = np.flatnonzero(~ok)
    if bad.size == 0:
        return True, []
    if not continuum or ok.size < 3:
        return False, []
    for i in bad:
        left = ok[i - 1] if i > 0 else True
        right = ok[i + 1] if i + 1 < ok.size else True
        if not (left and right):
            return False, []
    return True, bad.tolist()


def _limit_zero_ok(r: np.ndarray, tol: float) -> bool:
    """Ratios M/u at the three smallest u (smallest first) tend to 0."""
    r0, r1, r2 = r
    if not np.all(np.isfinite(r)):
        return False
    if r0 < tol and r0 <= r1 * (1 + 1e-9) + 1e-300 and r1 <= r2 * (1 + 1e-9) + 1e-300:
        return True
    # slowly vanishing power law: consistent geometric contraction
    if r0 > 0 and r1 > 0 and r2 > 0:
        q1, q2 = r0 / r1, r1 / r2
        if q1 <= 1 - tol and q2 <= 1 - tol:
            return abs(math.log(q1) - math.log(q2)) <= 0.1 * abs(math.log(q2))
    return False


def _limit_inf_ok(r: np.ndarray, tol: float) -> tuple[bool, bool]:
    """(passes, growing) for ratios M/u at the three largest u (largest last)."""
    r1, r2, r3 = r
    if not np.all(np.isfinite(r)):
        return False, False
    inc1, inc2 = r2 - r1, r3 - r2
    growing = bool(inc1 > 0 and inc2 > tol * r3 and inc2 >= 0.75 * inc1)
    return bool(r3 >= 1.0 / tol or growing), growing


@dataclass
class AxiomReport:
    """Numerical evidence for each axiom, with per-t detail and witnesses."""

    function: str
    t_grid: list
    u_max: float
    even_defect: float
    convexity_defect: float
    convexity_defect_nonneg: float
    positivity_ok: bool
    nonnegativity_ok: bool
    zero_at_zero_defect: float
    limit0_estimate: float
    limit0_per_t: list
    limit_inf_slope: float
    limit_inf_per_t: list
    growth_trend: list
    right_continuous_at_zero: bool
    verdicts: dict
    excused: dict = field(default_factory=dict)
    witnesses: dict = field(default_factory=dict)
    tol: float = LIMIT_TOL

    @property
    def n_function(self) -> bool:
        return all(self.verdicts[k] for k in ("axiom1", "axiom2", "axiom3", "axiom4", "zero_at_zero"))

    @property
    def orlicz_core(self) -> bool:
        v = self.verdicts
        return v["convex_nonneg"] and v["nonnegative"] and v["zero_at_zero"] and v["axiom2"]

    @property
    def classification(self) -> Verdict:
        if not self.orlicz_core:
            return Verdict.NEITHER
        if self.n_function:
            return Verdict.MUSIELAK_N
        return Verdict.MUSIELAK_ORLICZ_ONLY

    def to_dict(self) -> dict:
        d = asdict(self)
        d["classification"] = self.classification.value
        return d


def _witness(values: np.ndarray, ts: np.ndarray, us: np.ndarray, **extra) -> dict:
    i = np.unravel_index(np.nanargmax(values), values.shape)
    return {"t": float(ts[i[0]]), "u": float(us[i[1]]), "defect": float(values[i]), **extra}


def verify_axioms(m: MusielakFunction, grid: Grid | None = None, tol: float = LIMIT_TOL) -> AxiomReport:
    """Check axioms 1-4 of a Musielak N-function on a grid.

    Axiom 5 (measurability in ``t``) holds by construction for every
    representable body and is reported as such.  ``M(t, 0) = 0`` is checked
    alongside the axioms since the integral representation forces it.
    """
    g = grid or Grid.build(m)
    ts = g.t
    T = ts[:, None]
    u = g.u
    vals = safe_eval(m, T, u[None, :])
    n_u = len(g.u_mags)
    neg, zero, pos = vals[:, :n_u][:, ::-1], vals[:, n_u], vals[:, n_u + 1:]
    domain_ok = np.all(np.isfinite(vals), axis=1)
    witnesses: dict = {}

    # evenness (relative to the size of the values)
    scale = np.maximum(1.0, np.abs(pos))
    even = np.abs(neg - pos) / scale
    even = np.where(np.isfinite(even), even, np.inf)
    even_per_t = even.max(axis=1)

    # midpoint convexity over all grid pairs
    conv_full = _midpoint_defect(m, T, u)
    conv_half = _midpoint_defect(m, T, np.concatenate([[0.0], g.u_mags]))
    conv_full_t = conv_full.max(axis=(1, 2))
    conv_half_t = conv_half.max(axis=(1, 2))

    zero_def = np.where(np.isfinite(zero), np.abs(zero), np.inf)
    positive_t = np.all(pos > 0, axis=1)
    nonneg_t = np.all(np.nan_to_num(pos, nan=-1.0) >= -ZERO_TOL, axis=1) & (zero_def <= ZERO_TOL)

    # limit axioms on the geometric grid
    lim = safe_eval(m, T, g.limit_u[None, :])
    with np.errstate(all="ignore"):
        ratios = lim / g.limit_u[None, :]
    lim0_ok = np.array([_limit_zero_ok(r[:3], tol) for r in ratios])
    inf_checks = [_limit_inf_ok(r[-3:], tol) for r in ratios]
    liminf_ok = np.array([c[0] for c in inf_checks])
    growth = [c[1] for c in inf_checks]
    right_cont = np.isfinite(lim[:, 0]) & np.isfinite(zero) & (np.abs(lim[:, 0] - zero) <= tol * max(1.0, g.limit_u[0]))

    axiom1_t = domain_ok & (even_per_t <= EVEN_TOL) & (conv_full_t <= CONVEX_TOL)
    per_t = {
        "axiom1": axiom1_t,
        "axiom2": domain_ok & positive_t,
        "axiom3": domain_ok & lim0_ok,
        "axiom4": domain_ok & liminf_ok,
        "zero_at_zero": zero_def <= ZERO_TOL,
        "convex_nonneg": domain_ok & (conv_half_t <= CONVEX_TOL),
        "nonnegative": nonneg_t,
    }
    verdicts, excused = {}, {}
    for key, ok in per_t.items():
        holds, exc = ae_holds(ok, g.continuum)
        verdicts[key] = holds
        if exc:
            excused[key] = [float(ts[i]) for i in exc]
        if not ok.all():
            witnesses[key] = _axiom_witness(key, ok, ts, g, even, conv_full, conv_half, zero_def, pos, ratios)
    verdicts["axiom5"] = "by-construction"

    def counted(key):
        ok = per_t[key]
        keep = np.ones_like(ok)
        for t_exc in excused.get(key, []):
            keep &= ts != t_exc
        return keep

    l0 = ratios[:, 0]
    linf = ratios[:, -1]
    k3, k4 = counted("axiom3"), counted("axiom4")
    return AxiomReport(
        function=m.describe(),
        t_grid=ts.tolist(),
        u_max=float(g.u_mags[-1]),
        even_defect=_fmax(even_per_t),
        convexity_defect=_fmax(conv_full_t),
        convexity_defect_nonneg=_fmax(conv_half_t),
        positivity_ok=verdicts["axiom2"],
        nonnegativity_ok=verdicts["nonnegative"],
        zero_at_zero_defect=_fmax(zero_def),
        limit0_estimate=_fmax(l0[k3]),
        limit0_per_t=l0.tolist(),
        limit_inf_slope=float(np.nanmin(linf[k4])) if np.any(k4) else float("nan"),
        limit_inf_per_t=linf.tolist(),
        growth_trend=growth,
        right_continuous_at_zero=bool(right_cont.all()),
        verdicts=verdicts,
        excused=excused,
        witnesses=witnesses,
        tol=tol,
    )


def _fmax(a) -> float:
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        return float("nan")
    return float(np.nanmax(np.where(np.isnan(a), np.inf, a)))


def _midpoint_defect(m: MusielakFunction, T: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Relative violation of midpoint convexity for every pair, shape (n_t, n_u, n_u)."""
    base = safe_eval(m, T, u[None, :])
    mid_u = 0.5 * (u[:, None] + u[None, :])
    mid = safe_eval(m, T[:, :, None], mid_u[None, :, :])
    avg = 0.5 * (base[:, :, None] + base[:, None, :])
    with np.errstate(invalid="ignore"):
        d = (mid - avg) / np.maximum(1.0, np.abs(avg))
    d = np.where(np.isfinite(d), d, np.inf)
    return np.maximum(d, 0.0)


def _axiom_witness(key, ok, ts, g, even, conv_full, conv_half, zero_def, pos, ratios) -> dict:
    i = int(np.flatnonzero(~ok)[0])
    t = float(ts[i])
    if key == "axiom1":
        if np.max(even[i]) > EVEN_TOL:
            j = int(np.argmax(even[i]))
            return {"t": t, "u": float(g.u_mags[j]), "even_defect": float(even[i, j])}
        j, k = np.unravel_index(np.argmax(conv_full[i]), conv_full[i].shape)
        return {"t": t, "u1": float(g.u[j]), "u2": float(g.u[k]), "midpoint_defect": float(conv_full[i, j, k])}
    if key == "convex_nonneg":
        us = np.concatenate([[0.0], g.u_mags])
        j, k = np.unravel_index(np.argmax(conv_half[i]), conv_half[i].shape)
        return {"t": t, "u1": float(us[j]), "u2": float(us[k]), "midpoint_defect": float(conv_half[i, j, k])}
    if key in ("axiom2", "nonnegative"):
        j = int(np.nanargmin(np.where(np.isnan(pos[i]), -np.inf, pos[i])))
        return {"t": t, "u": float(g.u_mags[j]), "value": float(pos[i, j]), "M(t,0)": float(zero_def[i])}
    if key == "zero_at_zero":
        return {"t": t, "u": 0.0, "value": float(zero_def[i])}
    if key == "axiom3":
        return {"t": t, "u": float(g.limit_u[0]), "ratio": float(ratios[i, 0])}
    return {"t": t, "u": float(g.limit_u[-1]), "ratio": float(ratios[i, -1])}


def classify(m: MusielakFunction, grid: Grid | None = None, tol: float = LIMIT_TOL) -> Verdict:
    """MusielakN, MusielakOrliczOnly or Neither, decided from :func:`verify_axioms`.

    The Orlicz core (convexity on ``u >= 0``, nonnegativity, ``M(t,0) = 0``
    and positivity) is tested first; only when it holds do evenness and the
    two limit axioms separate N-functions from plain Musielak-Orlicz ones.
    """
    return verify_axioms(m, grid, tol).classification


# -- Delta-2 ----------------------------------------------------------------


@dataclass
class Delta2Report:
    function: str
    u0: float
    u_top: float
    K_estimate: float
    bounded: bool
    cap: float
    witness: dict
    skipped_t: list

    def to_dict(self) -> dict:
        return asdict(self)


def delta2_check(m: MusielakFunction, u0: float = 1.0, grid: Grid | None = None, u_top: float = 30.0,
                 n_u: int = 64, cap: float = 1e6) -> Delta2Report:
    """Estimate ``K`` in ``M(t, 2u) <= K M(t, u)`` for ``u >= u0``.

    ``bounded`` requires the largest ratio to stay below ``cap`` and the
    ratios on the upper quarter of the geometric u-grid not to exceed those
    below it (no upward trend).  t-nodes where ``M(t, u) = 0`` somewhere on
    the grid are skipped and listed.
    """
    if not u0 > 0:
        raise SpecError("u0 must be positive")
    if u_top < u0:
        raise SpecError("u_top must be at least u0")
    ts = grid.t if grid is not None else m.tdomain.sample(33)
    us = np.geomspace(u0, u_top, n_u) if u_top > u0 else np.array([u0])
    lo = safe_eval(m, ts[:, None], us[None, :])
    hi = safe_eval(m, ts[:, None], 2.0 * us[None, :])
    usable = np.all(np.isfinite(lo) & (lo > 0), axis=1)
    skipped = ts[~usable].tolist()
    if not usable.any():
        raise SpecError("positivity precheck failed at every t; Delta-2 ratio undefined")
    with np.errstate(over="ignore"):
        ratio = hi[usable] / lo[usable]
    ratio = np.where(np.isfinite(ratio), ratio, np.inf)
    i, j = np.unravel_index(np.argmax(ratio), ratio.shape)
    K = float(ratio[i, j])
    q = max(1, n_u // 4)
    if ratio.shape[1] > q:
        upper = ratio[:, -q:].max()
        lower = ratio[:, :-q].max()
        trending = upper > lower * (1 + 1e-6)
    else:
        trending = False
    bounded = bool(np.isfinite(K) and K <= cap and not trending)
    witness = {"t": float(ts[usable][i]), "u": float(us[j]), "ratio": K}
    return Delta2Report(m.describe(), float(u0), float(us[-1]), K, bounded, cap, witness, skipped)


# -- right derivative and integral representation ---------------------------


def p_plus(m: MusielakFunction, t, u, h0: float | None = None, steps: int = 6, qtol: float = 1e-8):
    """Right derivative of ``u -> M(t, u)``.

    Forward quotients ``[M(t,u+h) - M(t,u)]/h`` are taken along
    ``h = h0 * 2**-k``, ``k = 0..steps``; for convex M they must not
    increase as ``h`` shrinks (checked up to ``qtol``).  The Richardson
    extrapolate of the sequence is returned, clipped to the interval between
    the last backward and forward quotients, which brackets the true value.
    """
    t_b, u_b = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(u, dtype=float))
    if np.any(u_b < 0):
        raise SpecError("p_plus is defined for u >= 0")
    if h0 is None:
        h0_arr = 1e-2 * np.maximum(1.0, u_b)
    else:
        if not h0 > 0:
            raise SpecError("h0 must be positive")
        h0_arr = np.full(u_b.shape, float(h0))
    base = np.asarray(m(t_b, u_b), dtype=float)
    table = []
    prev = None
    for k in range(steps + 1):
        h = h0_arr * 2.0**-k
        d = (np.asarray(m(t_b, u_b + h), dtype=float) - base) / h
        if prev is not None:
            slack = qtol * np.maximum(1.0, np.abs(prev)) + 64 * np.finfo(float).eps * np.abs(base) / h
            bad = d > prev + slack
            if np.any(bad):
                i = np.unravel_index(np.argmax(bad), bad.shape)
                raise NonmonotoneQuotient(
                    f"right difference quotient increased at t={float(t_b[i])}, u={float(u_b[i])}, "
                    f"h={float(h[i])}: {float(prev[i])} -> {float(d[i])}"
                )
        prev = d
        row = [d]
        for j in range(1, k + 1):
            f = 2.0**j
            row.append((f * row[j - 1] - table[k - 1][j - 1]) / (f - 1.0))
        table.append(row)
    extrap = table[-1][-1]
    h_last = h0_arr * 2.0**-steps
    back = (base - np.asarray(m(t_b, u_b - h_last), dtype=float)) / h_last
    out = np.clip(extrap, np.minimum(back, prev), prev)
    if out.ndim == 0:
        return float(out)
    return out


def _simpson(y: np.ndarray, h: np.ndarray) -> np.ndarray:
    w = np.full(y.shape[-1], 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return (y @ w) * h / 3.0


def representation_defect(m: MusielakFunction, t_grid=None, u_grid=None, n_inner: int = 2001,
                          return_witness: bool = False):
    """Max of ``|M(t,u) - integral_0^|u| p_plus(t,s) ds|`` over the grid.

    The inner integral is composite Simpson on ``n_inner`` nodes per ``u``.
    """
    if n_inner < 3 or n_inner % 2 == 0:
        raise SpecError("n_inner must be odd and >= 3")
    ts = m.tdomain.sample(33) if t_grid is None else np.atleast_1d(np.asarray(t_grid, dtype=float))
    us = np.linspace(-3.0, 3.0, 25) if u_grid is None else np.atleast_1d(np.asarray(u_grid, dtype=float))
    mags = np.abs(us)
    frac = np.linspace(0.0, 1.0, n_inner)
    s = mags[:, None] * frac[None, :]
    h = mags / (n_inner - 1)
    worst, witness = 0.0, {"t": float(ts[0]), "u": float(us[0]), "defect": 0.0}
    for t in ts:
        p = p_plus(m, t, s)
        integral = _simpson(p, h)
        direct = np.asarray(m(t, us), dtype=float)
        d = np.abs(direct - integral)
        j = int(np.argmax(d))
        if d[j] > worst:
            worst = float(d[j])
            witness = {"t": float(t), "u": float(us[j]), "defect": worst,
                       "M": float(direct[j]), "integral": float(integral[j])}
    if return_witness:
        return worst, witness
    return worst
