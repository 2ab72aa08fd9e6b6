"""Musielak N-functions and Musielak-Orlicz functions."""

from .axioms import (
    AxiomReport,
    Delta2Report,
    Grid,
    Verdict,
    classify,
    delta2_check,
    p_plus,
    representation_defect,
    verify_axioms,
)
from .functions import (
    CATALOG,
    CallableFunction,
    ExprFunction,
    FamilyCombinator,
    FunctionFamily,
    MusielakFunction,
    Scale,
    Sum,
    TDomain,
    catalog,
    lim_inf,
    lim_sup,
    pointwise_inf,
    pointwise_sup,
    scale,
    sum_,
)


def evaluate(m: MusielakFunction, t, u):
    """``M(t, u)``; arrays broadcast."""
    return m(t, u)


__all__ = [
    "AxiomReport", "CATALOG", "CallableFunction", "Delta2Report", "ExprFunction",
    "FamilyCombinator", "FunctionFamily", "Grid", "MusielakFunction", "Scale", "Sum",
    "TDomain", "Verdict", "catalog", "classify", "delta2_check", "evaluate", "lim_inf",
    "lim_sup", "p_plus", "pointwise_inf", "pointwise_sup", "representation_defect",
    "scale", "sum_", "verify_axioms",
]
