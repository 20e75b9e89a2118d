"""Structured check outcomes shared by every module and the CLI."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

__all__ = ["CheckReport", "ResolutionExhausted", "PreconditionError", "jsonable"]

VERDICTS = ("pass", "fail", "exhausted", "unverified")


class ResolutionExhausted(RuntimeError):
    """The grid is too coarse to exhibit a point whose existence is guaranteed."""


class PreconditionError(ValueError):
    """Inputs violate the stated precondition of an operation."""


def jsonable(obj: Any) -> Any:
    """Convert numpy values and +inf into plain JSON types."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if v == math.inf:
            return "inf"
        if v == -math.inf:
            return "-inf"
        if math.isnan(v):
            return "nan"
        return v
    if hasattr(obj, "to_json"):
        return jsonable(obj.to_json())
    return obj


@dataclass
class CheckReport:
    check: str
    verdict: str
    tol: dict = field(default_factory=dict)
    probes: int = 0
    first_violation: Any = None
    witnesses: list = field(default_factory=list)
    anchor: str = ""
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if isinstance(self.verdict, (bool, np.bool_)):
            self.verdict = "pass" if self.verdict else "fail"
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_json(self) -> dict:
        out = {
            "check": self.check,
            "anchor": self.anchor,
            "verdict": self.verdict,
            "tol": self.tol,
            "probes": self.probes,
        }
        if self.first_violation is not None:
            out["first_violation"] = self.first_violation
        out["witnesses"] = self.witnesses
        if self.details:
            out["details"] = self.details
        return jsonable(out)


# check name -> (anchor, parameter schema); the CLI `describe` prints these
CHECKS = {
    "monotonicity": (
        "monotone operator: <x - y, x* - y*> >= 0 for all graph pairs",
        {"operator": "name"},
    ),
    "maximality": (
        "maximal monotonicity: no off-graph point is monotonically related to T",
        {"operator": "name", "probes": "grid over X x X*", "tol": "off-graph distance"},
    ),
    "ni_deficit": (
        "type NI definition (Simons): inf over T of <y* - x*, x** - y> <= 0",
        {"operator": "name", "probes": "grid over X* x X**", "tol": "float"},
    ),
    "fenchel_young": (
        "Fenchel-Young inequality; eps-subdifferential via the conjugate",
        {"function": "name", "dual_grid": "grid over X*", "eps": "float"},
    ),
    "fitzpatrick": (
        "Fitzpatrick function phi_T, smallest member of the Fitzpatrick family",
        {"operator": "name", "grid": "grid over X x X*"},
    ),
    "s_function": (
        "S-function S_T = clconv(pi + delta_T), largest member of the Fitzpatrick family",
        {"operator": "name", "grid": "grid over X x X*"},
    ),
    "family_membership": (
        "Fitzpatrick family: convex lsc h >= pi with h = pi on T",
        {"function": "name (bifunction)", "operator": "name", "tol": "float"},
    ),
    "flip_conjugate": (
        "flip conjugation J h(x, x*) = h*(x*, x); J S_T = phi_T",
        {"operator": "name", "grid": "grid over X x X*"},
    ),
    "aux_infimum": (
        "NI characterisation: inf h_(x0,x0*) + ½||x||² + ½||x*||² = 0",
        {"function": "name (bifunction)", "shifts": "list of [x0, x0*]", "tol": "float"},
    ),
    "range_density": (
        "Rockafellar-type surjectivity: R(T(. + z0) + mu J_eps) = X*",
        {"operator": "name", "mu": "float", "eps": "float", "z0": "vector", "dual_probes": "grid over X*", "hit_tol": "float"},
    ),
    "equivalence_suite": (
        "closed monotone T: dense range of T(. + z0) + mu J_eps for all eps, z0 <=> T maximal monotone of type NI",
        {"operator": "name", "shifts": "list of vectors", "eps": "list", "mu": "list", "grids": "probe grids"},
    ),
    "br_search": (
        "Brondsted-Rockafellar property of h with h >= pi, h* >= pi_*",
        {"function": "name (bifunction)", "x": "vector", "xstar": "vector", "eps": "float", "lambda": "float"},
    ),
    "eps_duality_gap": (
        "enlarged duality map: x* in J_eps(x) implies | ||x|| - ||x*|| | <= sqrt(2 eps)",
        {"samples": "int", "eps": "list", "seed": "int"},
    ),
    "preimage_bound": (
        "boundedness of (T + J_eps)^-1(B[0, M]) for monotone T",
        {"operator": "name", "M": "float", "eps": "float", "dual_grid": "grid over X*"},
    ),
    "qualification": (
        "Attouch-Brezis qualification: union of lambda (D_X(h1) - D_X(h2)) is a closed subspace",
        {"h1": "name", "h2": "name", "strict": "bool"},
    ),
    "conjugate_min_formula": (
        "exact inf-convolution of conjugates: h*(x*, x**) = min_u h1*(u, x**) + h2*(x* - u, x**)",
        {"h1": "name", "h2": "name", "probes": "list of [x*, x**]"},
    ),
    "sum_rule": (
        "sum of maximal monotone NI operators: T1 + T2 = {J h = pi} = {h = pi}",
        {"T1": "name", "T2": "name", "h1": "name", "h2": "name"},
    ),
}


def anchor(check: str) -> str:
    return CHECKS[check][0]
