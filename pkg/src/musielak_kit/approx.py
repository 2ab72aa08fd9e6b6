"""Simple-function approximation on a bounded rectangle.

The approximant at level ``L`` splits the t-interval into ``2**L`` equal
cells, freezes ``t`` at each cell midpoint and rounds values down to
multiples of ``delta = max_rect(M) / 2**L``::

    phi_L(t, u) = delta * floor(M(t_c, u) / delta),   t in cell c

Rounding down keeps ``phi_L(t, 0) = 0`` and monotonicity in ``|u|``, and
midpoint sampling keeps evenness exact.  The same formula is used for
``|u|`` beyond the rectangle, which the norm search may visit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SpecError, UnboundedOnRectangle
from .measure import MeasureSpace
from .nfunc.axioms import safe_eval
from .nfunc.functions import MusielakFunction, TDomain, UNCLASSIFIED
from .space import luxemburg_norm

MAX_LEVELS = 20
BOUND_CAP = 1e300
N_SCAN = 257
MAX_CHECK_T = 2**16


@dataclass(frozen=True)
class Rectangle:
    t_lo: float
    t_hi: float
    u_max: float

    def __post_init__(self):
        if not (self.t_lo < self.t_hi and self.u_max > 0):
            raise SpecError(f"degenerate rectangle {self}")


class SimpleApprox(MusielakFunction):
    """Piecewise-constant-in-t, finitely-valued surrogate of ``M``."""

    def __init__(self, m: MusielakFunction, rect: Rectangle, levels: int, delta: float, sup_error: float):
        self.source = m
        self.rect = rect
        self.levels = levels
        self.delta = delta
        self.sup_error = sup_error
        self.tdomain = TDomain.of(rect.t_lo, rect.t_hi)
        self.claimed = UNCLASSIFIED
        self.u_max = m.u_max
        n = 2**levels
        self.edges = np.linspace(rect.t_lo, rect.t_hi, n + 1)
        self.midpoints = 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def cells(self) -> int:
        return 2**self.levels

    def cell_of(self, t) -> np.ndarray:
        idx = np.searchsorted(self.edges, np.asarray(t, dtype=float), side="right") - 1
        return np.clip(idx, 0, self.cells - 1)

    def _eval(self, t, u):
        tc = self.midpoints[self.cell_of(t)]
        raw = np.asarray(self.source(tc, np.abs(u)), dtype=float)
        return self.delta * np.floor(raw / self.delta)

    def describe(self) -> str:
        return f"simple_L{self.levels}[{self.source.describe()}]"

    def to_dict(self, table_u=None) -> dict:
        us = np.linspace(0.0, self.rect.u_max, 17) if table_u is None else np.asarray(table_u, dtype=float)
        table = self(self.midpoints[:, None], us[None, :])
        return {
            "levels": self.levels,
            "rect": [self.rect.t_lo, self.rect.t_hi, self.rect.u_max],
            "cell_boundaries": self.edges.tolist(),
            "quantization_step": self.delta,
            "table_u": us.tolist(),
            "cell_values": table.tolist(),
            "sup_error": self.sup_error,
            "source": self.source.describe(),
        }


def _bound(m: MusielakFunction, rect: Rectangle) -> float:
    ts = np.linspace(rect.t_lo, rect.t_hi, N_SCAN)
    us = np.linspace(0.0, rect.u_max, N_SCAN)
    vals = safe_eval(m, ts[:, None], us[None, :])
    # both signs of u; even inputs give the same values
    vals_neg = safe_eval(m, ts[:, None], -us[None, :])
    if not (np.all(np.isfinite(vals)) and np.all(np.isfinite(vals_neg))):
        raise UnboundedOnRectangle("function is not finite on the rectangle")
    top = float(max(np.abs(vals).max(), np.abs(vals_neg).max()))
    if top > BOUND_CAP:
        raise UnboundedOnRectangle(f"max |M| on the rectangle is {top:g} > {BOUND_CAP:g}")
    return top


def _check_points(rect: Rectangle, levels: int) -> tuple[np.ndarray, np.ndarray]:
    n_cells = 2**levels
    n_t = min(4 * n_cells, MAX_CHECK_T)
    per = max(1, n_t // n_cells)
    if n_cells * per <= MAX_CHECK_T:
        width = (rect.t_hi - rect.t_lo) / n_cells
        offs = (np.arange(per) + 0.5) / per
        ts = rect.t_lo + width * (np.arange(n_cells)[:, None] + offs[None, :]).ravel()
    else:
        ts = np.linspace(rect.t_lo, rect.t_hi, MAX_CHECK_T)
    us = np.linspace(-rect.u_max, rect.u_max, 4 * 64 + 1)
    return ts, us


def sup_error(m: MusielakFunction, phi: MusielakFunction, rect: Rectangle, levels: int) -> float:
    ts, us = _check_points(rect, levels)
    worst = 0.0
    for chunk in np.array_split(ts, max(1, len(ts) // 4096)):
        d = np.abs(safe_eval(m, chunk[:, None], us[None, :]) - phi(chunk[:, None], us[None, :]))
        worst = max(worst, float(np.max(d)))
    return worst


def simple_approximation(m: MusielakFunction, rect: Rectangle | tuple, levels: int) -> SimpleApprox:
    """Build ``phi_L`` for ``m`` on ``rect`` and measure its sup error.

    The error is taken on a grid four times finer than the cells in ``t``
    (capped at 65536 abscissae) and on 257 symmetric u-values.
    """
    if not isinstance(rect, Rectangle):
        rect = Rectangle(*rect)
    if not 1 <= levels <= MAX_LEVELS:
        raise SpecError(f"levels must lie in [1, {MAX_LEVELS}], got {levels}")
    top = _bound(m, rect)
    delta = top / 2**levels if top > 0 else 1.0
    phi = SimpleApprox(m, rect, levels, delta, 0.0)
    phi.sup_error = sup_error(m, phi, rect, levels)
    return phi


@dataclass
class ConvergenceReport:
    levels: list
    sup_errors: list
    norms: list
    target_norm: float
    gaps: list
    gaps_nonincreasing: bool
    sup_errors_decreasing: bool
    final_gap: float
    threshold: float
    passed: bool

    def to_dict(self) -> dict:
        from dataclasses import asdict

        return asdict(self)


def approx_space_convergence(m: MusielakFunction, rect: Rectangle | tuple, level_list, f,
                             space: MeasureSpace, rel_tol: float = 1e-3,
                             norm_tol: float = 1e-10) -> ConvergenceReport:
    """Norms under ``phi_L`` against the norm under ``m``.

    Norms are bisected to ``norm_tol`` so that the gap sequence is not
    dominated by bisection noise; the final gap must be below
    ``10 * rel_tol`` and the gaps nonincreasing in ``L``.
    """
    if not isinstance(rect, Rectangle):
        rect = Rectangle(*rect)
    nodes = space.nodes[space.weights > 0]
    if nodes.size and (nodes.min() < rect.t_lo or nodes.max() > rect.t_hi):
        raise SpecError("measure nodes must lie in the rectangle's t-interval")
    levels = sorted(int(x) for x in level_list)
    target = luxemburg_norm(f, m, space, norm_tol).norm
    errs, norms, gaps = [], [], []
    for L in levels:
        phi = simple_approximation(m, rect, L)
        errs.append(phi.sup_error)
        n = luxemburg_norm(f, phi, space, norm_tol).norm
        norms.append(n)
        gaps.append(abs(n - target))
    slack = 2 * norm_tol * max(target, 1e-300)
    nonincreasing = all(b <= a + slack for a, b in zip(gaps, gaps[1:]))
    decreasing = all(b < a for a, b in zip(errs, errs[1:]))
    threshold = 10 * rel_tol
    final = gaps[-1] if gaps else 0.0
    return ConvergenceReport(levels, errs, norms, target, gaps, nonincreasing, decreasing, final,
                             threshold, bool(nonincreasing and final <= threshold))
