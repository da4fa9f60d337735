"""Weyl structures (h, nu): compatibility, Weyl Ricci tensor, the
Einstein-Weyl tensor chi, gauge changes and the generalised monopole
equation.

The curvature-type quantities are evaluated at a point from numerical jets
of h and nu (see :mod:`ewreduce.exterior`); the monopole operators are
symbolic because they only involve first derivatives.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import sympy as sp

from .exterior import (DifferentialForm, MetricTensor, curvature, exterior_d, hodge,
                       divergence, gradient)
from .scalar import DomainError, evaluate, evaluate_many, jet


@dataclass
class WeylStructure:
    h: MetricTensor
    nu: DifferentialForm

    def __post_init__(self):
        if self.nu.degree != 1:
            raise DomainError("the Weyl one-form must have degree 1")
        if self.nu.chart.coords != self.h.chart.coords:
            raise DomainError("h and nu live on different charts")

    @property
    def chart(self):
        return self.h.chart

    @property
    def dim(self):
        return self.h.dim


def gauge_transform(s: WeylStructure, phi, points=(), params=None) -> WeylStructure:
    """(h, nu) -> (phi^2 h, nu + 2 d log phi)."""
    phi = sp.sympify(phi)
    for pt in points:
        val = evaluate(phi, pt, params)
        if not (abs(val.imag) < 1e-12 and val.real > 0):
            raise DomainError(f"conformal factor is not positive at {pt}: {val}")
    dlog = DifferentialForm.one_form(s.chart, [sp.diff(phi, x) / phi for x in s.chart.coords])
    return WeylStructure(s.h.scale(phi ** 2), s.nu + 2 * dlog)


@dataclass
class WeylData:
    """Pointwise Riemannian and Weyl quantities at one point."""

    h: np.ndarray
    hinv: np.ndarray
    christoffel: np.ndarray
    ricci: np.ndarray
    scalar: complex
    nu: np.ndarray
    nabla_nu: np.ndarray  # nabla_i nu_j

    @property
    def nu_up(self):
        return self.hinv @ self.nu

    @property
    def nu_sq(self):
        return complex(self.nu @ self.hinv @ self.nu)

    @property
    def div_nu(self):
        return complex(np.einsum("ij,ij->", self.hinv, self.nabla_nu))


def weyl_data(s: WeylStructure, point, params=None) -> WeylData:
    curv = curvature(s.h, point, params)
    coords = s.chart.coords
    D = jet([s.nu[(i,)] for i in range(s.dim)], coords, point, params, order=1)
    nu, dnu = D[0], D[1]  # dnu[j, i] = d_i nu_j
    nabla = dnu.T - np.einsum("kij,k->ij", curv.christoffel, nu)
    return WeylData(curv.metric, curv.inverse, curv.christoffel, curv.ricci, curv.scalar, nu, nabla)


def weyl_compatibility_residual(s: WeylStructure, point, params=None, perturbation=None) -> float:
    """sup |D_i h_jk - nu_i h_jk| with D = nabla + gamma.

    ``perturbation`` maps ``(l, i, j)`` to an offset added to gamma^l_ij,
    which is how the residual's sensitivity is tested.
    """
    n = s.dim
    D = jet(list(s.h.matrix), s.chart.coords, point, params, order=1)
    h0, dh = D[0].reshape(n, n), D[1].reshape(n, n, n)
    hinv = np.linalg.inv(h0)
    nu = evaluate_many([s.nu[(i,)] for i in range(n)], point, params)
    t = np.einsum("dcb->dbc", dh) + dh - np.einsum("bcd->dbc", dh)
    gam = 0.5 * np.einsum("ad,dbc->abc", hinv, t)
    delta = np.eye(n)
    gamma = (-0.5 * (np.einsum("li,j->lij", delta, nu) + np.einsum("lj,i->lij", delta, nu))
             + 0.5 * np.einsum("ij,l->lij", h0, hinv @ nu))
    for (l, i, j), eps in (perturbation or {}).items():
        gamma[l, i, j] += eps
    conn = gam + gamma
    # dh[j, k, i] = d_i h_jk
    Dh = (np.einsum("jki->ijk", dh) - np.einsum("lij,lk->ijk", conn, h0) - np.einsum("lik,jl->ijk", conn, h0))
    res = Dh - np.einsum("i,jk->ijk", nu, h0)
    return float(np.max(np.abs(res)))


def weyl_ricci(s: WeylStructure, point, params=None, data: WeylData | None = None):
    """Ricci tensor W_ij of D and its trace computed two ways.

    Returns (W_ij, W from the trace, W from the scalar relation)."""
    d = data or weyl_data(s, point, params)
    n = s.dim
    nn = np.outer(d.nu, d.nu)
    W = (d.ricci + (n - 1) / 2 * d.nabla_nu - 0.5 * d.nabla_nu.T + (n - 2) / 4 * nn
         + d.h * (-(n - 2) / 4 * d.nu_sq + 0.5 * d.div_nu))
    trace = complex(np.einsum("ij,ij->", d.hinv, W))
    relation = d.scalar + (n - 1) * d.div_nu - (n - 2) * (n - 1) / 4 * d.nu_sq
    return W, trace, relation


@dataclass
class EWResidual:
    chi: np.ndarray
    sup: float
    trace: float
    asymmetry: float


def ew_residual(s: WeylStructure, point, params=None, data: WeylData | None = None) -> EWResidual:
    """The Einstein-Weyl tensor chi_ij (trace-free symmetrised Weyl Ricci)."""
    if s.dim != 3:
        raise DomainError("the Einstein-Weyl tensor is implemented for three dimensions")
    d = data or weyl_data(s, point, params)
    sym = 0.5 * (d.nabla_nu + d.nabla_nu.T)
    bracket = d.scalar + 0.5 * d.div_nu + 0.25 * d.nu_sq
    chi = d.ricci + 0.5 * sym + 0.25 * np.outer(d.nu, d.nu) - bracket / 3 * d.h
    return EWResidual(chi, float(np.max(np.abs(chi))),
                      float(abs(np.einsum("ij,ij->", d.hinv, chi))), float(np.max(np.abs(chi - chi.T))))


def weighted_laplacian(s: WeylStructure, phi, m: float, k: float, point, params=None) -> complex:
    """LHS - RHS of the weighted Weyl wave equation for a weight-m function
    at a point.  (Returned pointwise: R is only available numerically.)"""
    d = weyl_data(s, point, params)
    P = jet([phi], s.chart.coords, point, params, order=2)
    f, df, ddf = P[0][0], P[1][0], P[2][0]
    lap = complex(np.einsum("ij,ij->", d.hinv, ddf - np.einsum("kij,k->ij", d.christoffel, df)))
    lhs = (lap - (m + 0.5) * complex(d.nu_up @ df)
           + 0.25 * (m * (m + 1) * d.nu_sq - 2 * m * d.div_nu) * f)
    rhs = k * (d.scalar + 2 * d.div_nu - 0.5 * d.nu_sq) * f
    return lhs - rhs


def conformal_laplacian(s: WeylStructure, phi, point, params=None) -> complex:
    """nabla^2 phi - R phi / 8, with the Laplacian taken in divergence form."""
    lap = divergence(gradient(phi, s.h), s.h)
    R = curvature(s.h, point, params).scalar
    return evaluate(lap, point, params) - R * evaluate(phi, point, params) / 8


def monopole_current(s: WeylStructure, V) -> DifferentialForm:
    """The two-form *_h(dV + nu V / 2)."""
    V = sp.sympify(V)
    dV = exterior_d(DifferentialForm.function(s.chart, V))
    return hodge(dV + (V / 2) * s.nu, s.h)


def monopole_residual(s: WeylStructure, V, omega: DifferentialForm, points, params=None) -> float:
    if omega.degree != 1:
        raise DomainError("omega must be a one-form")
    diff = monopole_current(s, V) - exterior_d(omega)
    return max((diff.sup(pt, params) for pt in points), default=0.0)


def monopole_closedness(s: WeylStructure, V, points, params=None) -> float:
    """sup |d *_h(dV + nu V / 2)|: the obstruction to finding omega."""
    dd = exterior_d(monopole_current(s, V))
    return max((dd.sup(pt, params) for pt in points), default=0.0)
