"""Lie point symmetries of the alterform equation.

Generators live on the fiber chart (w, wb, v, G).  Structure constants are
extracted numerically (least squares in the generator basis) and compared
against the closed-form table ``expected_table``.
"""
from __future__ import annotations

import itertools
import json
import math

import numpy as np
import sympy as sp

from .exterior import DifferentialForm, VectorField, exterior_d, lie_bracket, pullback
from .reduction import EUCLID_CHART, alterform_expression
from .scalar import (ALPHA, REAL, Chart, DomainError, Gc, J, Params, Q, Qb, evaluate, v,
                     w, wb)

I = sp.I
FIBER_CHART = Chart("fiber", (w, wb, v, Gc), (("conj", 1), ("conj", 0), REAL, REAL))
IDEAL_CHART = Chart("ideal", (w, wb, v, Q, Qb, J), (("conj", 1), ("conj", 0), REAL, ("conj", 4), ("conj", 3),
                                                    "complex"))
EPS = sp.Symbol("epsilon")


class StructureConstantError(ArithmeticError):
    pass


def generator(i: int, params: Params | None = None) -> VectorField:
    """X_i, i = 1..7.  With ``params`` the angle is substituted numerically."""
    if not 1 <= i <= 7:
        raise DomainError(f"generator index must be in 1..7, got {i}")
    a = ALPHA if params is None else sp.Float(params.alpha)
    es = sp.exp(v * sp.sin(a))
    comps = {
        1: [1, 1, 0, 0],
        2: [I, -I, 0, 0],
        3: [I * w, -I * wb, 0, 0],
        4: [0, 0, 1, 0],
        5: [w, wb, 0, Gc],
        6: [0, 0, 0, es * sp.sin(v * sp.cos(a))],
        7: [0, 0, 0, es * sp.cos(v * sp.cos(a))],
    }[i]
    return VectorField(FIBER_CHART, comps)


def expected_table(alpha: float) -> np.ndarray:
    """T[i, j, k]: coefficient of X_{k+1} in [X_{i+1}, X_{j+1}]."""
    s, c = math.sin(alpha), math.cos(alpha)
    T = np.zeros((7, 7, 7))

    def put(i, j, coeffs):
        for k, val in coeffs.items():
            T[i - 1, j - 1, k - 1] = val
            T[j - 1, i - 1, k - 1] = -val

    put(1, 3, {2: 1})
    put(1, 5, {1: 1})
    put(2, 3, {1: -1})
    put(2, 5, {2: 1})
    put(4, 6, {6: s, 7: c})
    put(4, 7, {7: s, 6: -c})
    put(5, 6, {6: -1})
    put(5, 7, {7: -1})
    return T


def _fiber_points(n: int, seed: int):
    return FIBER_CHART.sample(n, seed=seed, box={"w": (-1, 1), "v": (-1.5, 1.5), "G": (-2, 2)})


def commutator_table(params: Params, n_points: int = 20, seed: int = 0, tol: float = 1e-10):
    """Structure constants by pointwise least squares.

    Returns (table, fit_residuals) with table[i, j, k] the coefficient of
    X_{k+1} in [X_{i+1}, X_{j+1}] and fit_residuals[i, j] the residual norm.
    """
    gens = [generator(i, params) for i in range(1, 8)]
    pts = _fiber_points(n_points, seed)
    basis = np.concatenate([np.stack([g.values(p) for g in gens], axis=1) for p in pts])  # (4n, 7)
    table = np.zeros((7, 7, 7), dtype=complex)
    fits = np.zeros((7, 7))
    for i, j in itertools.combinations(range(7), 2):
        br = lie_bracket(gens[i], gens[j])
        rhs = np.concatenate([br.values(p) for p in pts])
        coef, *_ = np.linalg.lstsq(basis, rhs, rcond=None)
        fit = float(np.linalg.norm(basis @ coef - rhs))
        if fit > tol:
            raise StructureConstantError(f"[X{i + 1}, X{j + 1}] is not in the span (fit residual {fit:.3e})")
        table[i, j], table[j, i] = coef, -coef
        fits[i, j] = fits[j, i] = fit
    if np.max(np.abs(table.imag)) > tol:
        raise StructureConstantError("structure constants are not real")
    return table.real, fits


def jacobi_defect(table: np.ndarray) -> float:
    """max |c_ij^l c_lk^m + c_jk^l c_li^m + c_ki^l c_lj^m|."""
    J3 = (np.einsum("ijl,lkm->ijkm", table, table) + np.einsum("jkl,lim->ijkm", table, table)
          + np.einsum("kil,ljm->ijkm", table, table))
    return float(np.max(np.abs(J3)))


def table_json(table: np.ndarray) -> str:
    rows = [[[round(float(c), 12) + 0.0 for c in table[i, j]] for j in range(7)] for i in range(7)]
    return json.dumps({"basis": [f"X{k}" for k in range(1, 8)], "table": rows}, indent=1)


def table_csv(table: np.ndarray) -> str:
    lines = ["i,j," + ",".join(f"X{k}" for k in range(1, 8))]
    for i in range(7):
        for j in range(7):
            lines.append(f"{i + 1},{j + 1}," + ",".join(repr(round(float(c), 12) + 0.0) for c in table[i, j]))
    return "\n".join(lines) + "\n"


# -- invariance -------------------------------------------------------------------

def characteristic(X: VectorField, G) -> sp.Expr:
    """delta G = phi - xi^w G_w - xi^wb G_wb - xi^v G_v restricted to G = G(w, wb, v)."""
    G = sp.sympify(G)
    c = [comp.xreplace({Gc: G}) for comp in X.components]
    return c[3] - c[0] * sp.diff(G, w) - c[1] * sp.diff(G, wb) - c[2] * sp.diff(G, v)


def linearized_alterform(G, dG) -> sp.Expr:
    expr = alterform_expression(sp.sympify(G) + EPS * sp.sympify(dG))
    return sp.diff(expr, EPS).xreplace({EPS: 0})


def _require_solution(G, points, params, tol=1e-9):
    res = alterform_expression(G)
    for p in points:
        val = abs(evaluate(res, p, params))
        if val > tol:
            raise DomainError(f"G does not solve the alterform equation (residual {val:.3e} at {p})")


def _euclid_points(n, seed):
    return EUCLID_CHART.sample(n, seed=seed, box={"w": (-0.8, 0.8), "v": (-1.0, 1.0)})


def infinitesimal_invariance(i: int, G, params: Params, points=None, n_points: int = 10, seed: int = 0) -> float:
    """sup over points of |L_G[delta G]| for the characteristic of X_i."""
    pts = points if points is not None else _euclid_points(n_points, seed)
    _require_solution(G, pts, params)
    lin = linearized_alterform(G, characteristic(generator(i), G))
    return max(abs(evaluate(lin, p, params)) for p in pts)


def invariance_fd(i: int, G, params: Params, point, eps: float = 1e-6) -> tuple[complex, complex]:
    """(exact linearisation, [residual(G + eps dG) - residual(G)]/eps) at a point."""
    dG = characteristic(generator(i), G)
    exact = evaluate(linearized_alterform(G, dG), point, params)
    shifted = alterform_expression(sp.sympify(G) + sp.Float(eps) * dG)
    fd = (evaluate(shifted, point, params) - evaluate(alterform_expression(G), point, params)) / eps
    return exact, fd


def flow(i: int, G, s):
    """Image of a solution G under the finite flow exp(s X_i)."""
    G = sp.sympify(G)
    s = sp.sympify(s)
    e = sp.exp(v * sp.sin(ALPHA))
    if i == 1:
        return G.xreplace({w: w - s, wb: wb - s})
    if i == 2:
        return G.xreplace({w: w - I * s, wb: wb + I * s})
    if i == 3:
        return G.xreplace({w: sp.exp(-I * s) * w, wb: sp.exp(I * s) * wb})
    if i == 4:
        return G.xreplace({v: v - s})
    if i == 5:
        return sp.exp(s) * G.xreplace({w: sp.exp(-s) * w, wb: sp.exp(-s) * wb})
    if i == 6:
        return G + s * e * sp.sin(v * sp.cos(ALPHA))
    if i == 7:
        return G + s * e * sp.cos(v * sp.cos(ALPHA))
    raise DomainError(f"generator index must be in 1..7, got {i}")


# -- the differential ideal ---------------------------------------------------

def ideal_forms():
    """(omega1, omega2) on the chart (w, wb, v, Q, Qb, J)."""
    ch = IDEAL_CHART
    dw_, dwb_, dv_, dQ, dQb, dJ = (DifferentialForm.coordinate(ch, c) for c in ch.coords)
    a = ALPHA
    om1 = (I * (dQ ^ dJ ^ dwb_) + sp.exp(-I * a) * ((Q * dJ - J * dQ) ^ dwb_ ^ dv_)
           + (dQ ^ dQb ^ dv_) - 4 * (dw_ ^ dwb_ ^ dv_))
    om2 = (dQ ^ dw_ ^ dv_) + sp.exp(I * a) * J * (dw_ ^ dwb_ ^ dv_) - I * (dJ ^ dw_ ^ dwb_)
    return om1, om2


def graph_map(G) -> dict:
    G = sp.sympify(G)
    Gv = sp.diff(G, v)
    return {w: w, wb: wb, v: v, Q: sp.exp(I * ALPHA) * G - I * Gv, Qb: sp.exp(-I * ALPHA) * G + I * Gv,
            J: sp.diff(G, wb)}


def ideal_pullback(G):
    om1, om2 = ideal_forms()
    mp = graph_map(G)
    return pullback(om1, EUCLID_CHART, mp), pullback(om2, EUCLID_CHART, mp)


def ideal_residual(G, point, params) -> dict:
    """Component sup-norms of omega1, omega2 pulled back to the graph of G."""
    p1, p2 = ideal_pullback(G)
    return {"w1": p1.sup(point, params), "w2": p2.sup(point, params)}


def _form_vector(form: DifferentialForm, point, params, keys) -> np.ndarray:
    vals = form.values(point, params)
    return np.array([vals.get(k, 0.0) for k in keys], dtype=complex)


def ideal_closure(params: Params, n_points: int = 5, seed: int = 0) -> float:
    """max over sampled points of the least-squares residual of
    d omega_mu = sum_k,nu c_k,nu dx^k ^ omega_nu."""
    om = ideal_forms()
    ch = IDEAL_CHART
    dx = [DifferentialForm.coordinate(ch, c) for c in ch.coords]
    cands = [d ^ o for o in om for d in dx]
    keys = list(itertools.combinations(range(ch.dim), 4))
    pts = ch.sample(n_points, seed=seed, box={"w": (-1, 1), "v": (-1, 1), "Q": (-1, 1), "J": (-1, 1)})
    worst = 0.0
    for o in om:
        d_o = exterior_d(o)
        for p in pts:
            A = np.stack([_form_vector(c, p, params, keys) for c in cands], axis=1)
            b = _form_vector(d_o, p, params, keys)
            coef, *_ = np.linalg.lstsq(A, b, rcond=None)
            worst = max(worst, float(np.linalg.norm(A @ coef - b)))
    return worst
