"""Linearised reduced equation, recursion relations and the closed-form
hierarchy on the flat background F = 2(w + wt) e^{rho u}."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import sympy as sp

from . import heavenly
from .exterior import VectorField
from .reduction import EXTENDED_CHART, ewred_expression
from .scalar import ETA, M, MT, RHO, DomainError, Params, evaluate, evaluate_many, t, u, w, wt, z, zt

EPS = sp.Symbol("epsilon")
FLAT_F = 2 * (w + wt) * sp.exp(RHO * u)
FLAT_OMEGA = 2 * (w + wt) * sp.sqrt(z * zt)


class UnsupportedDepth(DomainError):
    pass


# -- the null tetrad ----------------------------------------------------------------

@dataclass
class NullTetrad:
    n00: VectorField
    n10: VectorField
    n01: VectorField
    n11: VectorField

    def volume(self, point, params=None) -> complex:
        rows = [X.values(point, params) for X in (self.n00, self.n10, self.n01, self.n11)]
        return complex(np.linalg.det(np.array(rows)))


def null_tetrad(F) -> NullTetrad:
    """nabla_AA' on (w, wt, u, t); vectors are listed in chart order."""
    F = sp.sympify(F)
    Fu = sp.diff(F, u)
    ch = EXTENDED_CHART

    def vec(dw=0, dwt=0, du=0, dt=0):
        return VectorField(ch, [dw, dwt, du, dt])

    a = M / 2 * sp.exp(RHO * t + MT * u)
    n00 = vec(dwt=-a * (ETA * sp.diff(F, w) - sp.diff(Fu, w)), du=-a * sp.diff(F, w, wt), dt=a * sp.diff(F, w, wt))
    b = sp.exp(-ETA * t - 2 * RHO * u) / 4
    St = ETA * sp.diff(F, wt) + sp.diff(Fu, wt)
    n10 = vec(dwt=-b * (ETA ** 2 * F - sp.diff(Fu, u)), du=-b * St, dt=b * St)
    n01 = vec(dw=1)
    c = sp.exp(-M * (t + u)) / (2 * M)
    n11 = vec(du=c, dt=c)
    return NullTetrad(n00, n10, n01, n11)


# -- the linearised equation --------------------------------------------------------

def linearized_expression(F, dF) -> sp.Expr:
    """d/d eps of the reduced residual at F + eps dF.

    Explicitly: S' dF_uwt - St' dF_uw - V' dF_wwt + F_wwt dF_uu
    + eta S' dF_wt + eta St' dF_w - eta^2 F_wwt dF, with S' = eta F_w - F_uw,
    St' = eta F_wt + F_uwt, V' = eta^2 F - F_uu.
    """
    expr = ewred_expression(sp.sympify(F) + EPS * sp.sympify(dF))
    return sp.diff(expr, EPS).xreplace({EPS: 0})


def printed_linear_operator(F, dF) -> sp.Expr:
    """The operator exactly as printed (agrees with the linearisation only at eta = 1)."""
    F, dF = sp.sympify(F), sp.sympify(dF)
    Fu = sp.diff(F, u)
    S, St = ETA * sp.diff(F, w) - sp.diff(Fu, w), ETA * sp.diff(F, wt) + sp.diff(Fu, wt)
    V = ETA ** 2 * F - sp.diff(Fu, u)
    Fwwt = sp.diff(F, w, wt)
    return (S * sp.diff(dF, u, wt) - St * sp.diff(dF, u, w) - V * sp.diff(dF, wt, w) + Fwwt * sp.diff(dF, u, 2)
            + ETA * (S * sp.diff(dF, wt) + ETA * St * sp.diff(dF, w)) - Fwwt * dF)


def _require_solution(F, point, params, tol=1e-9):
    val = abs(evaluate(ewred_expression(F), point, params))
    if val > tol:
        raise DomainError(f"background does not solve the reduced equation (residual {val:.3e})")


def linearized_residual(F, dF, point, params: Params) -> complex:
    _require_solution(F, point, params)
    return evaluate(linearized_expression(F, dF), point, params)


def linearized_fd(F, dF, point, params: Params, eps: float = 1e-6) -> complex:
    """[residual(F + eps dF) - residual(F)]/eps."""
    F = sp.sympify(F)
    r1 = evaluate(ewred_expression(F + sp.Float(eps) * sp.sympify(dF)), point, params)
    r0 = evaluate(ewred_expression(F), point, params)
    return (r1 - r0) / eps


# -- recursion relations ------------------------------------------------------

def recursion_expressions(F, dF, RdF):
    """(r1, r2): LHS - RHS of the two recursion relations, read literally."""
    F, dF, RdF = sp.sympify(F), sp.sympify(dF), sp.sympify(RdF)
    Fu = sp.diff(F, u)
    E = sp.exp(MT * u)
    S, St = ETA * sp.diff(F, w) - sp.diff(Fu, w), ETA * sp.diff(F, wt) + sp.diff(Fu, wt)
    V = ETA ** 2 * F - sp.diff(Fu, u)
    eta_minus = ETA * RdF - sp.diff(RdF, u)
    r1 = M * E * (sp.diff(F, w, wt) * eta_minus - S * sp.diff(RdF, wt)) - 2 * sp.diff(dF, w)
    r2 = MT * E * (St * eta_minus - V * sp.diff(RdF, wt)) - 2 * (ETA * dF + sp.diff(dF, u))
    return r1, r2


def recursion_residual(F, dF, RdF, point, params: Params) -> dict:
    r1, r2 = recursion_expressions(F, dF, RdF)
    a, b = evaluate_many([r1, r2], point, params)
    return {"r1": complex(a), "r2": complex(b)}


def consistency_expression(F, dF) -> sp.Expr:
    """Integrability obstruction for solving the recursion relations for RdF.

    Solving them for X = RdF gives X_u = eta X + p and X_wt = q; the cross
    derivative condition is eta q + p_wt - q_u = 0.
    """
    F, dF = sp.sympify(F), sp.sympify(dF)
    Fu = sp.diff(F, u)
    E = sp.exp(MT * u)
    S, St = ETA * sp.diff(F, w) - sp.diff(Fu, w), ETA * sp.diff(F, wt) + sp.diff(Fu, wt)
    V = ETA ** 2 * F - sp.diff(Fu, u)
    Fwwt = sp.diff(F, w, wt)
    D = Fwwt * V - S * St
    a, b = 2 * sp.diff(dF, w), 2 * (ETA * dF + sp.diff(dF, u))
    p = (S * b / MT - V * a / M) / (E * D)
    q = (St * a / M - Fwwt * b / MT) / (E * D)
    return ETA * q + sp.diff(p, wt) - sp.diff(q, u)


def consistency_check(F, dF, point, params: Params) -> float:
    _require_solution(F, point, params)
    return abs(evaluate(consistency_expression(F, dF), point, params))


# -- the four-dimensional link ---------------------------------------------------

def killing_coordinates():
    """(t, u) as functions of (z, zt) on the null chart."""
    lz, lzt = sp.log(z) / M, sp.log(zt) / MT
    return (lz + lzt) / 2, (lz - lzt) / 2


def four_d_residual(dF, point, params: Params, Omega=FLAT_OMEGA) -> complex:
    """Box(e^{eta t} dF) + eta^2 |dt|^2 e^{eta t} dF on the heavenly background."""
    tt, uu = killing_coordinates()
    d = heavenly.PlebanskiData(Omega, params)
    dOmega = sp.exp(ETA * tt) * sp.sympify(dF).xreplace({u: uu})
    expr = heavenly.wave_operator_4d(d, dOmega) + ETA ** 2 * heavenly.norm_squared(d, tt) * dOmega
    return evaluate(expr, point, params)


# -- the hierarchy -----------------------------------------------------------------

SEEDS = {"exp(-eta u)": sp.exp(-ETA * u), "exp(m u)": 2 * MT / (M + ETA) * sp.exp(M * u)}
# R^n of the exp(m u) seed on the flat background, n = 1, 2, 3
_A2 = 2 * M / (ETA + MT)
FLAT_IMAGES = [sp.diff(FLAT_F, w), _A2 * sp.exp(-MT * u), _A2 * RHO / (2 * ETA + MT) * sp.exp(-(MT + ETA) * u)]
FLAT_PAIRS = [(SEEDS["exp(-eta u)"], -(ETA * FLAT_F + sp.diff(FLAT_F, u)) / (2 * M)),
              (SEEDS["exp(m u)"], FLAT_IMAGES[0])]
MAX_DEPTH = len(FLAT_IMAGES)


@dataclass
class HierarchyLevel:
    label: str
    dF: sp.Expr
    linearized: float
    recursion: dict | None  # residuals of (previous -> this) pair


def is_flat_background(F) -> bool:
    return sp.simplify(sp.sympify(F) - FLAT_F) == 0


def hierarchy(F, depth: int, points, params: Params) -> list[HierarchyLevel]:
    """Levels T_0 (the seed) .. T_depth with their verification results."""
    if depth < 0:
        raise DomainError("depth must be non-negative")
    if depth > MAX_DEPTH:
        raise UnsupportedDepth(f"no closed form registered beyond depth {MAX_DEPTH} (asked {depth})")
    if not is_flat_background(F):
        raise UnsupportedDepth("closed-form recursion images are registered only for the flat background")
    chain = [SEEDS["exp(m u)"]] + FLAT_IMAGES[:depth]
    out = []
    for n, dF in enumerate(chain):
        lin = max(abs(linearized_residual(F, dF, p, params)) for p in points)
        rec = None
        if n > 0:
            rr = [recursion_residual(F, chain[n - 1], dF, p, params) for p in points]
            rec = {k: max(abs(r[k]) for r in rr) for k in ("r1", "r2")}
        out.append(HierarchyLevel(f"T{n}", dF, lin, rec))
    return out
