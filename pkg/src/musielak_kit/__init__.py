"""Numerics for Musielak N-functions and the Musielak-Orlicz spaces they generate."""

from .approx import Rectangle, SimpleApprox, approx_space_convergence, simple_approximation
from .measure import MeasureSpace, QuadratureRule, ScalarField, integrate, lebesgue01
from .nfunc import (
    FunctionFamily,
    Grid,
    TDomain,
    Verdict,
    catalog,
    classify,
    delta2_check,
    p_plus,
    representation_defect,
    verify_axioms,
)
from .space import embedding_check, family_norm_check, luxemburg_norm, modular

__version__ = "0.1.0"
