"""Two-dimensional reductions and limiting equations.

Every equation is stored as its left-hand side minus right-hand side, on
its own chart (see ``KINDS``).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import sympy as sp

from .exterior import DifferentialForm, MetricTensor
from .scalar import ALPHA, REAL, Chart, DomainError, J, evaluate, evaluate_many, j, v, w, wb, xi
from .weyl import WeylStructure

I = sp.I
Rc = sp.Symbol("Rc")  # log(w wb) as a coordinate for the X3-invariant equation

CHARTS = {
    "toda": Chart("toda", (j, w, wb), (REAL, ("conj", 2), ("conj", 1))),
    "hypercr": Chart("hypercr", (w, wb, v), (("conj", 1), ("conj", 0), REAL)),
    "liouville": Chart("liouville", (w, wb), (("conj", 1), ("conj", 0))),
    "mequation": Chart("mequation", (v, xi), (REAL, REAL)),
    "rjv": Chart("rjv", (J, v), (REAL, REAL)),
    "flinear": Chart("flinear", (xi, v), (REAL, REAL)),
    "x3full": Chart("x3full", (Rc, v), (REAL, REAL)),
}
KINDS = tuple(CHARTS)


def _toda(f):
    return sp.diff(f, w, wb) + 2 * sp.diff(sp.exp(2 * f), j, 2)


def _hypercr(F):
    Fv = sp.diff(F, v)
    return (sp.diff(F, w, wb) * (F + sp.diff(Fv, v))
            - (sp.diff(F, w) + I * sp.diff(Fv, w)) * (sp.diff(F, wb) - I * sp.diff(Fv, wb)) - 4)


def _liouville(Psi):
    return sp.diff(Psi, w, wb) - 4 * sp.exp(-2 * Psi)


def _mequation(Mf):
    s = sp.sin(ALPHA)
    Mx = sp.diff(Mf, xi)
    return (sp.diff(Mf, v, 2) + 2 * s * sp.diff(Mf, v, xi) + sp.diff(Mx, xi)
            + 4 * sp.exp(Mf) * (sp.diff(Mx, xi) + Mx ** 2 + 3 * Mx + 2))


def _rjv(Rf):
    s = sp.sin(ALPHA)
    JR = J * sp.diff(Rf, J)
    return 4 * sp.diff(sp.exp(Rf), J, 2) + sp.diff(Rf, v, 2) + 2 * s * sp.diff(JR, v) + J * sp.diff(JR, J)


def _flinear(f):
    s = sp.sin(ALPHA)
    return (4 * sp.exp(-2 * xi) * (sp.diff(f, xi, 2) - sp.diff(f, xi)) + sp.diff(f, v, 2)
            + 2 * s * sp.diff(f, xi, v) + sp.diff(f, xi, 2))


def _x3full(G):
    s = sp.sin(ALPHA)
    Gv, GR = sp.diff(G, v), sp.diff(G, Rc)
    return ((G + sp.diff(Gv, v) - 2 * s * Gv) * sp.diff(GR, Rc)
            - (sp.exp(I * ALPHA) * GR - I * sp.diff(Gv, Rc)) * (sp.exp(-I * ALPHA) * GR + I * sp.diff(Gv, Rc))
            - 4 * sp.exp(Rc))


_BUILDERS = {"toda": _toda, "hypercr": _hypercr, "liouville": _liouville, "mequation": _mequation,
             "rjv": _rjv, "flinear": _flinear, "x3full": _x3full}


def residual_expression(kind: str, f):
    try:
        return _BUILDERS[kind](sp.sympify(f))
    except KeyError:
        raise DomainError(f"unknown equation kind {kind!r}; expected one of {KINDS}") from None


def residual_2d(kind: str, f, params, point) -> complex:
    return evaluate(residual_expression(kind, f), point, params)


# -- substitutions ---------------------------------------------------------------

def m_from_r(Rf):
    """M(v, xi) = R(J = e^xi, v) - 2 xi."""
    return sp.sympify(Rf).xreplace({J: sp.exp(xi)}) - 2 * xi


def x3_to_alter(g):
    """g(Rc, v) -> G(w, wb, v) = g(log(w wb), v); x3full(g) = w wb alterform(G)."""
    return sp.sympify(g).xreplace({Rc: sp.log(w * wb)})


# -- the Toda (alpha = -pi/2) chain ---------------------------------------------

@dataclass
class TodaPoint:
    j: complex
    v: complex
    v_j: complex
    v_jj: complex
    v_wwb: complex
    toda_residual: complex


def toda_reduction_chain(F, params, point) -> TodaPoint:
    """Take F(w, wb, v) at alpha = -pi/2, use j = F_v as a coordinate and
    evaluate the Toda residual of v(j, w, wb) by implicit differentiation."""
    if abs(params.alpha + np.pi / 2) > 1e-12:
        raise DomainError("the Toda chain needs alpha = -pi/2")
    phi = sp.diff(F, v)
    names = [phi, sp.diff(phi, v), sp.diff(phi, v, 2), sp.diff(phi, w), sp.diff(phi, wb),
             sp.diff(phi, w, wb), sp.diff(phi, w, v), sp.diff(phi, wb, v)]
    p, pv, pvv, pw, pwb, pwwb, pwv, pwbv = evaluate_many(names, point, params)
    if abs(pv) < 1e-12:
        raise DomainError(f"j = F_v is not a coordinate at {point} (F_vv = 0)")
    vj = 1 / pv
    vw, vwb = -pw / pv, -pwb / pv
    vwwb = -(pwwb + pwv * vwb + pwbv * vw + pvv * vw * vwb) / pv
    vjj = -pvv / pv ** 3
    e2v = np.exp(2 * complex(point[v]))
    res = vwwb + 2 * e2v * (2 * vjj + 4 * vj ** 2)
    return TodaPoint(complex(p), complex(point[v]), vj, vjj, vwwb, res)


def lebrun_ward(vfield) -> WeylStructure:
    """h = e^{2v} dw dwb + dj^2/16, nu = 4 v_j dj for v(j, w, wb)."""
    ch = CHARTS["toda"]
    e = sp.exp(2 * sp.sympify(vfield))
    mat = sp.Matrix([[sp.Rational(1, 16), 0, 0], [0, 0, e / 2], [0, e / 2, 0]])
    h = MetricTensor(ch, mat, signature="euclidean")
    nu = DifferentialForm.one_form(ch, [4 * sp.diff(vfield, j), 0, 0])
    return WeylStructure(h, nu)
