"""Lax pairs on correspondence charts and the span (integrability) test.

The spectral parameter is dehomogenised (pi_1' = 1), so lambda = infinity
is never sampled.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import sympy as sp

from .exterior import VectorField, lie_bracket
from .reduction import ReducedData, alter_to_euclid, holomorphic_field
from .scalar import (ETA, M, MT, RHO, COMPLEX, Chart, DomainError, Params, lam, lamt, u, v, w, wb, wt, z,
                     zt)

I = sp.I
lamb = sp.Symbol("lamb")
KINDS = ("heavenly", "reduced", "hypercr")
CHARTS = {
    "heavenly": Chart("correspondence", (w, z, wt, zt, lam), (COMPLEX,) * 5),
    "reduced": Chart("reduced-correspondence", (w, wt, u, lamt), (COMPLEX,) * 4),
    "hypercr": Chart("hypercr-correspondence", (w, wb, v, lam), (COMPLEX,) * 4),
}


@dataclass
class LaxPair:
    L0: VectorField
    L1: VectorField
    kind: str
    background: sp.Expr
    params: Params | None = None

    @property
    def chart(self) -> Chart:
        return self.L0.chart


def _background(background, kind):
    """Accept a bare expression or a catalog entry; alterform entries are
    converted to the holomorphic F for the reduced pair."""
    fields = getattr(background, "fields", None)
    if fields is None:
        return sp.sympify(background)
    if kind == "heavenly":
        return fields["Omega"]
    if "F" in fields:
        return fields["F"]
    if kind == "reduced":
        return holomorphic_field(ReducedData(fields["G"], background.params, "alterform"))
    return alter_to_euclid(fields["G"])


def heavenly_lax(Omega) -> tuple[VectorField, VectorField]:
    ch = CHARTS["heavenly"]
    O = sp.sympify(Omega)
    # components on (w, z, wt, zt, lam)
    L0 = VectorField(ch, [-lam, 0, -sp.diff(O, w, zt), sp.diff(O, w, wt), 0])
    L1 = VectorField(ch, [0, -lam, -sp.diff(O, z, zt), sp.diff(O, z, wt), 0])
    return L0, L1


def reduced_lax(F, literal: bool = False) -> tuple[VectorField, VectorField]:
    """Pair on (w, wt, u, lamt) from the heavenly pair with Omega = e^{eta t} F,
    d_t dropped.  L1 carries the prefactor m e^{mt u}; the printed mt e^{mt u}
    (``literal=True``) breaks integrability unless m = mt."""
    ch = CHARTS["reduced"]
    F = sp.sympify(F)
    Fu = sp.diff(F, u)
    e = sp.exp(MT * u)
    # d_u + rho lamt d_lamt, written out on (w, wt, u, lamt)
    A0 = M * e * sp.diff(F, w, wt)
    B0 = M * e * (ETA * sp.diff(F, w) - sp.diff(Fu, w))
    L0 = VectorField(ch, [2 * lamt, B0, A0, A0 * RHO * lamt])
    pre = (MT if literal else M) * e
    A1 = pre * (ETA * sp.diff(F, wt) + sp.diff(Fu, wt))
    B1 = pre * (ETA ** 2 * F - sp.diff(Fu, u))
    L1 = VectorField(ch, [0, B1, A1 + 2 * lamt, A1 * RHO * lamt - 2 * RHO * lamt ** 2])
    return L0, L1


def hypercr_lax(F, literal: bool = False) -> tuple[VectorField, VectorField]:
    """alpha = 0 pair on (w, wb, v, lam).  The printed d_wb coefficient of
    L0 contains F_uw; on this chart it must be F_vw (``literal=True`` keeps
    F_uw, which is identically zero here)."""
    ch = CHARTS["hypercr"]
    F = sp.sympify(F)
    e = sp.exp(I * v)
    Fv = sp.diff(F, v)
    cross = sp.diff(F, u, w) if literal else sp.diff(Fv, w)
    L0 = VectorField(ch, [2 * lam, -e * (sp.diff(F, w) + I * cross), I * e * sp.diff(F, w, wb), 0])
    L1 = VectorField(ch, [0, -e * (F + sp.diff(Fv, v)),
                          e * (sp.diff(Fv, wb) + I * sp.diff(F, wb)) - 2 * I * lam, 0])
    return L0, L1


def build_lax(background, kind: str, params: Params | None = None, literal: bool = False) -> LaxPair:
    if kind not in KINDS:
        raise DomainError(f"unknown Lax kind {kind!r}; expected one of {KINDS}")
    params = params or getattr(background, "params", None)
    bg = _background(background, kind)
    if kind == "heavenly":
        L0, L1 = heavenly_lax(bg)
    elif kind == "reduced":
        L0, L1 = reduced_lax(bg, literal)
    else:
        L0, L1 = hypercr_lax(bg, literal)
    return LaxPair(L0, L1, kind, bg, params)


def _spectral(lp: LaxPair):
    return lamt if lp.kind == "reduced" else lam


def _point(lp: LaxPair, point, lambda_):
    pt = dict(point)
    pt[_spectral(lp)] = complex(lambda_)
    return pt


def span_fit(C: np.ndarray, A: np.ndarray, cond_tol: float = 1e-10) -> float:
    """Residual norm of the least-squares fit C = A @ coef."""
    sv = np.linalg.svd(A, compute_uv=False)
    if sv[-1] <= cond_tol * max(sv[0], 1e-300):
        raise DomainError("degenerate span: the Lax vector fields are parallel at this point")
    coef, *_ = np.linalg.lstsq(A, C, rcond=None)
    return float(np.linalg.norm(A @ coef - C))


def span_residual(lp: LaxPair, point, lambda_) -> float:
    """|[L0, L1] - a L0 - b L1| minimised over (a, b), at (point, lambda)."""
    pt = _point(lp, point, lambda_)
    C = lie_bracket(lp.L0, lp.L1).values(pt, lp.params)
    A = np.stack([lp.L0.values(pt, lp.params), lp.L1.values(pt, lp.params)], axis=1)
    return span_fit(C, A)


# -- the lifted Killing vector ----------------------------------------------------

def lifted_killing(params: Params | None = None) -> VectorField:
    """K~ = m z d_z + mt zt d_zt + rho lam d_lam on the heavenly correspondence chart."""
    ch = CHARTS["heavenly"]
    return VectorField(ch, [0, M * z, 0, MT * zt, RHO * lam])


def killing_time():
    """t with K(t) = 1: t = (log z / m + log zt / mt)/2."""
    return (sp.log(z) / M + sp.log(zt) / MT) / 2


def invariant_spectral_parameter():
    """lamt = lam exp(-rho t), constant along K~."""
    return lam * sp.exp(-RHO * killing_time())


def killing_span_residual(lp: LaxPair, Kt: VectorField, point, lambda_) -> float:
    """max over A of the fit residual of [K~, L_A] in span{L0, L1}."""
    pt = _point(lp, point, lambda_)
    A = np.stack([lp.L0.values(pt, lp.params), lp.L1.values(pt, lp.params)], axis=1)
    return max(span_fit(lie_bracket(Kt, L).values(pt, lp.params), A) for L in (lp.L0, lp.L1))


def real_lift(params: Params, lambda_: complex) -> np.ndarray:
    """(dt, dlam, dlamb) components of d_t + rho lam d_lam + conj(rho lam) d_lamb
    at a point of the Euclidean real slice."""
    q = complex(params.rho) * complex(lambda_)
    return np.array([1.0, q, q.conjugate()])
