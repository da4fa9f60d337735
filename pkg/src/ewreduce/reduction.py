"""From a solution of the reduced equation to the Einstein-Weyl structure.

Three forms of the reduced equation are supported:

``ewred``      F(w, wt, u), holomorphic, constants eta and rho;
``euclid``     F(w, wb, v) on the Euclidean slice wt = -wb, u = i v;
``alterform``  G = exp(v sin(alpha)) F on the Euclidean slice.

The Euclidean forms are built by rewriting them as ``ewred`` data, running
the holomorphic construction and pulling the result back to (w, wb, v).
The only exception is the ``alterform`` metric and one-form, which are
built from their own closed formulas (they differ from the pulled-back
ones by the conformal factor recorded in ``CONVERSIONS``).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import sympy as sp

from .exterior import (DifferentialForm, MetricTensor, VectorField, adjugate, det, exterior_d,
                       hodge, pullback, wedge)
from .scalar import (ALPHA, COMPLEX, ETA, REAL, RHO, M, MT, Chart, DomainError,
                     EvaluationError, Params, evaluate, t, u, v, w, wb, wt, z, zt)
from .weyl import WeylStructure

I = sp.I
EWRED_CHART = Chart("ewred", (w, wt, u), (COMPLEX,) * 3)
EUCLID_CHART = Chart("euclid", (w, wb, v), (("conj", 1), ("conj", 0), REAL))
EXTENDED_CHART = Chart("ewred+t", (w, wt, u, t), (COMPLEX,) * 4)
FORMS = ("ewred", "euclid", "alterform")

# Conformal bookkeeping between the structures produced here.  Each entry is
# (phi^2, shift of nu) with h_target = phi^2 h_source and
# nu_target = nu_source + shift.
CONVERSIONS = {
    # closed-form alterform metric versus the pulled-back holomorphic one
    ("euclid", "alterform"): (sp.exp(2 * v * sp.sin(ALPHA)), "2 sin(alpha) dv"),
    # the v-independent (Liouville) structure is the alterform one times 16 exp(-2 Psi)
    ("alterform", "liouville"): ("16 exp(-2 Psi)", "-2 dPsi"),
    # Jones-Tod quotient metric |K|^-2 g versus the direct construction
    ("jones_tod", "ewred"): ("V^2", "2 dlog V"),
}


class SingularStructure(EvaluationError):
    pass


@dataclass
class ReducedData:
    field: sp.Expr
    params: Params | None = None
    form: str = "ewred"
    chart: Chart = field(init=False)

    def __post_init__(self):
        if self.form not in FORMS:
            raise DomainError(f"unknown reduced form {self.form!r}; expected one of {FORMS}")
        self.field = sp.sympify(self.field)
        self.chart = EWRED_CHART if self.form == "ewred" else EUCLID_CHART
        stray = self.field.free_symbols - set(self.chart.coords)
        stray = {s for s in stray if s.name in ("w", "wt", "wb", "u", "v", "z", "zt", "t")}
        if stray:
            raise DomainError(f"{self.form} field depends on foreign coordinates {stray}")


# -- conversions between forms ------------------------------------------------

def euclid_to_holomorphic(FE):
    """F(w, wt, u) with F(w, -wb, i v) = FE(w, wb, v)."""
    return sp.sympify(FE).xreplace({wb: -wt, v: -I * u})


def holomorphic_to_euclid(F):
    return sp.sympify(F).xreplace({wt: -wb, u: I * v})


def alter_to_euclid(G):
    return sp.exp(-v * sp.sin(ALPHA)) * sp.sympify(G)


def euclid_to_alter(FE):
    return sp.exp(v * sp.sin(ALPHA)) * sp.sympify(FE)


def holomorphic_field(d: ReducedData):
    if d.form == "ewred":
        return d.field
    FE = d.field if d.form == "euclid" else alter_to_euclid(d.field)
    return euclid_to_holomorphic(FE)


EUCLID_SLICE = {w: w, wt: -wb, u: I * v}


# -- residuals ----------------------------------------------------------------

def ewred_expression(F):
    Fw, Fwt, Fu = sp.diff(F, w), sp.diff(F, wt), sp.diff(F, u)
    return ((ETA * Fwt + sp.diff(Fu, wt)) * (ETA * Fw - sp.diff(Fu, w))
            - (ETA ** 2 * F - sp.diff(Fu, u)) * sp.diff(Fw, wt) - 4 * sp.exp(2 * RHO * u))


def euclid_expression(F):
    c = sp.cos(ALPHA)
    Fv = sp.diff(F, v)
    return ((F * c ** 2 + sp.diff(Fv, v)) * sp.diff(F, w, wb)
            - (sp.diff(F, wb) * c - I * sp.diff(Fv, wb)) * (sp.diff(F, w) * c + I * sp.diff(Fv, w))
            - 4 * sp.exp(-2 * v * sp.sin(ALPHA)))


def alterform_expression(G):
    s = sp.sin(ALPHA)
    Gv = sp.diff(G, v)
    return ((G + sp.diff(Gv, v) - 2 * Gv * s) * sp.diff(G, w, wb)
            - (sp.exp(I * ALPHA) * sp.diff(G, wb) - I * sp.diff(Gv, wb))
            * (sp.exp(-I * ALPHA) * sp.diff(G, w) + I * sp.diff(Gv, w)) - 4)


_EXPRESSIONS = {"ewred": ewred_expression, "euclid": euclid_expression, "alterform": alterform_expression}


def residual_expression(d: ReducedData):
    return _EXPRESSIONS[d.form](d.field)


def reduced_residual(d: ReducedData, point) -> complex:
    return evaluate(residual_expression(d), point, d.params)


# -- the construction -----------------------------------------------------------

def _fields(F):
    V = (ETA ** 2 * F - sp.diff(F, u, 2)) / 4
    S = (ETA * sp.diff(F, w) - sp.diff(F, u, w)) / 2
    St = (ETA * sp.diff(F, wt) + sp.diff(F, u, wt)) / 2
    return V, S, St


def _holomorphic_structure(F):
    """(h, nu, V, omega) on (w, wt, u) from F."""
    ch = EWRED_CHART
    V, S, St = _fields(F)
    dw_, dwt_, du_ = (DifferentialForm.coordinate(ch, c) for c in ch.coords)
    theta = V * du_ + (S * dw_ - St * dwt_) / 2
    mat = sp.zeros(3, 3)
    mat[0, 1] = mat[1, 0] = -sp.exp(2 * RHO * u) / 2
    for i in range(3):
        for k in range(3):
            mat[i, k] -= theta[(i,)] * theta[(k,)]
    h = MetricTensor(ch, mat, signature="complex")
    omega = (S * dw_ + St * dwt_).applyfunc(lambda e: e / (2 * V))
    nu = 4 * RHO * du_ + ((ETA + 2 * RHO) * S / V) * dw_ + ((ETA - 2 * RHO) * St / V) * dwt_
    return h, nu, V, omega


def prop_nu(F):
    """The Weyl one-form in its original display (F-derivatives, no S)."""
    ch = EWRED_CHART
    D = ETA ** 2 * F - sp.diff(F, u, 2)
    return DifferentialForm.one_form(ch, [(2 * ETA + 4 * RHO) * (ETA * sp.diff(F, w) - sp.diff(F, u, w)) / D,
                                          (2 * ETA - 4 * RHO) * (ETA * sp.diff(F, wt) + sp.diff(F, u, wt)) / D,
                                          4 * RHO])


def euclid_sqrt_det(det):
    """Volume density on (w, wb, v) oriented like (Re w, Im w, v)."""
    return I / 2 * sp.sqrt(-4 * det)


def altermetric(G, literal: bool = False):
    """The closed-form metric and one-form attached to an alterform G.

    The G_vw terms of the one-form are taken from the gauge transform of
    the holomorphic construction (factor 2i(cos a + 2i sin a) on dw);
    ``literal=True`` uses the printed -2(cos a + 2i sin a), which does not
    give an Einstein-Weyl structure whenever sin(alpha) G_vw != 0.
    """
    ch = EUCLID_CHART
    s, c, a = sp.sin(ALPHA), sp.cos(ALPHA), ALPHA
    Gv, Gw, Gwb = sp.diff(G, v), sp.diff(G, w), sp.diff(G, wb)
    dw_, dwb_, dv_ = (DifferentialForm.coordinate(ch, c_) for c_ in ch.coords)
    theta = (G - 2 * Gv * s) * dv_ + exterior_d(DifferentialForm.function(ch, Gv)) \
        + (-I * sp.exp(-I * a) * Gw) * dw_ + (I * sp.exp(I * a) * Gwb) * dwb_
    mat = sp.zeros(3, 3)
    mat[0, 1] = mat[1, 0] = sp.Rational(1, 2)
    for i in range(3):
        for k in range(3):
            mat[i, k] += theta[(i,)] * theta[(k,)] / 16
    h = MetricTensor(ch, mat, signature="euclidean")
    h._sqrt_det = euclid_sqrt_det(h.det)
    D = G + sp.diff(Gv, v) - 2 * Gv * s
    if literal:
        kw, kwb = -2 * (c + 2 * I * s), -2 * (c - 2 * I * s)
    else:
        kw, kwb = 2 * I * (c + 2 * I * s), -2 * I * (c - 2 * I * s)
    nu = (-2 * s) * dv_ \
        + (((2 + 2 * s ** 2) + I * sp.sin(2 * a)) * Gw / D + kw * sp.diff(Gv, w) / D) * dw_ \
        + (((2 + 2 * s ** 2) - I * sp.sin(2 * a)) * Gwb / D + kwb * sp.diff(Gv, wb) / D) * dwb_
    return h, nu


@dataclass
class EWBuild:
    ew: WeylStructure
    V: sp.Expr
    omega: DifferentialForm
    g4: MetricTensor
    F: sp.Expr  # holomorphic F(w, wt, u)


def four_metric(F) -> MetricTensor:
    """g4 = exp(eta t)(h / V + V (dt + omega)^2) on (w, wt, u, t)."""
    h, _, V, omega = _holomorphic_structure(F)
    mat = sp.zeros(4, 4)
    one = [omega[(0,)], omega[(1,)], 0, 1]
    for i in range(4):
        for k in range(4):
            hik = h.matrix[i, k] if i < 3 and k < 3 else 0
            mat[i, k] = sp.exp(ETA * t) * (hik / V + V * one[i] * one[k])
    return MetricTensor(EXTENDED_CHART, mat, signature="complex")


def build_ew_from_F(d: ReducedData, points=()) -> EWBuild:
    F = holomorphic_field(d)
    h, nu, V, omega = _holomorphic_structure(F)
    for pt in points:
        hp = pt if d.form == "ewred" else {w: pt[w], wt: -pt[wb], u: 1j * pt[v]}
        if abs(evaluate(V, hp, d.params)) < 1e-12:
            raise SingularStructure(f"V vanishes at {pt}")
    g4 = four_metric(F)
    if d.form == "ewred":
        ew = WeylStructure(h, nu)
        return EWBuild(ew, V, omega, g4, F)
    V_E = holomorphic_to_euclid(V)
    omega_E = pullback(omega, EUCLID_CHART, EUCLID_SLICE)
    if d.form == "alterform":
        ew = WeylStructure(*altermetric(d.field))
    else:
        hE = pullback(h, EUCLID_CHART, EUCLID_SLICE)
        hE._sqrt_det = euclid_sqrt_det(hE.det)
        ew = WeylStructure(hE, pullback(nu, EUCLID_CHART, EUCLID_SLICE))
    return EWBuild(ew, V_E, omega_E, g4, F)


# -- Jones-Tod ------------------------------------------------------------------

@dataclass
class JonesTod:
    ew: WeylStructure
    h4: MetricTensor
    nu4: DifferentialForm
    norm: sp.Expr  # |K|^2


def jones_tod(g: MetricTensor, K: VectorField, quotient: Chart, section: dict, invariants: dict | None = None,
              points=(), params=None, tol: float = 1e-10) -> JonesTod:
    """h = |K|^-2 g - |K|^-4 K.K and nu = 2 |K|^-2 *_g(K ^ dK), pulled back to
    ``quotient`` along ``section`` (4D coordinates as functions of the
    quotient coordinates).  ``invariants`` gives each quotient coordinate as
    a function on the 4D chart and is checked to be K-invariant."""
    norm = g(K, K)
    Kf = g.lower(K)
    for pt in points:
        if abs(evaluate(norm, pt, params)) < 1e-12:
            raise SingularStructure(f"K is null at {pt}")
        for name, inv in (invariants or {}).items():
            if abs(evaluate(K(inv), pt, params)) > tol:
                raise DomainError(f"quotient coordinate {name} is not K-invariant at {pt}")
    n = g.dim
    mat = sp.zeros(n, n)
    for i in range(n):
        for k in range(n):
            mat[i, k] = g.matrix[i, k] / norm - Kf[(i,)] * Kf[(k,)] / norm ** 2
    h4 = MetricTensor(g.chart, mat, g.signature)
    nu4 = hodge(wedge(Kf, exterior_d(Kf)), g).applyfunc(lambda e: 2 * e / norm)
    h = pullback(h4, quotient, section)
    nu = pullback(nu4, quotient, section)
    return JonesTod(WeylStructure(h, nu), h4, nu4, norm)


def canonical_section(params_symbolic=True):
    """Section t = 0 of the (z, zt) -> (t, u) map, for the quotient (w, wt, u)."""
    return {w: w, z: sp.exp(M * u), wt: wt, zt: sp.exp(-MT * u)}


def canonical_invariants():
    return {"w": w, "wt": wt, "u": sp.log(z) / (2 * M) - sp.log(zt) / (2 * MT)}


@dataclass
class GaugeFit:
    phi_squared: sp.Expr
    h_gap: float
    nu_gap: float


def gauge_fit(target: WeylStructure, source: WeylStructure, points, params=None) -> GaugeFit:
    """Fit phi^2 = (det h_target / det h_source)^(1/3) and measure how far
    target is from the gauge transform of source.  The h gap is taken over
    the three branches of the cube root."""
    ratio = target.h.det / source.h.det
    phi2 = ratio ** sp.Rational(1, 3)
    h_gap = nu_gap = 0.0
    dlog = DifferentialForm.one_form(source.chart, [sp.diff(ratio, x) / (3 * ratio) for x in source.chart.coords])
    nu_diff = target.nu - source.nu - dlog
    roots = np.exp(2j * np.pi * np.arange(3) / 3)
    for pt in points:
        p2 = evaluate(phi2, pt, params)
        ht = target.h.values(pt, params)
        hs = source.h.values(pt, params)
        # complex ratios: the principal cube root may be the wrong branch
        h_gap = max(h_gap, min(float(np.max(np.abs(ht - r * p2 * hs))) for r in roots))
        nu_gap = max(nu_gap, nu_diff.sup(pt, params))
    return GaugeFit(phi2, h_gap, nu_gap)


# -- (z, zt) <-> (t, u) ------------------------------------------------------------

@dataclass
class ChartMap:
    params: Params

    def forward(self, zv: complex, ztv: complex):
        """(z, zt) -> (t, u) on principal logarithm branches."""
        m, mt = complex(self.params.m), complex(self.params.mtilde)
        for val in (zv, ztv):
            if val.imag == 0 and val.real <= 0:
                raise DomainError(f"branch cut: log of non-positive real {val}")
        lz, lzt = np.log(complex(zv)), np.log(complex(ztv))
        return (lz / m + lzt / mt) / 2, (lz / m - lzt / mt) / 2

    def inverse(self, tv: complex, uv: complex):
        m, mt = complex(self.params.m), complex(self.params.mtilde)
        return np.exp(m * (tv + uv)), np.exp(mt * (tv - uv))

    def pushforward_killing(self, zv, ztv):
        """Components of K = m z d_z + mt zt d_zt in (t, u)."""
        m, mt = complex(self.params.m), complex(self.params.mtilde)
        Kz, Kzt = m * zv, mt * ztv
        # dt = (dz/(m z) + dzt/(mt zt))/2, du = (dz/(m z) - dzt/(mt zt))/2
        a, b = Kz / (m * zv), Kzt / (mt * ztv)
        return (a + b) / 2, (a - b) / 2


def chart_map_zu(params: Params) -> ChartMap:
    if params.m == 0 or params.mtilde == 0:
        raise DomainError("m and mt must be non-zero")
    return ChartMap(params)


# -- the (V, S, St) system ------------------------------------------------------

@dataclass
class TodFields:
    V: sp.Expr
    S: sp.Expr
    St: sp.Expr
    residuals: tuple


def todform_fields(d: ReducedData) -> TodFields:
    F = holomorphic_field(d)
    V, S, St = _fields(F)
    denom = sp.diff(S, wt) + sp.diff(St, w)
    r1 = V - (-sp.exp(2 * RHO * u) + S * St) * ETA / denom
    r2 = sp.diff(S, u) + ETA * S - 2 * sp.diff(V, w)
    r3 = -sp.diff(St, u) + ETA * St - 2 * sp.diff(V, wt)
    return TodFields(V, S, St, (r1, r2, r3))


# -- frame, structure equations and the congruence -----------------------------

@dataclass
class Frame3:
    e1: DifferentialForm
    e2: DifferentialForm
    e3: DifferentialForm
    V: sp.Expr
    omega: DifferentialForm
    S: sp.Expr
    Sbar: sp.Expr

    def metric(self) -> MetricTensor:
        E = [[e[(i,)] for i in range(3)] for e in (self.e1, self.e2, self.e3)]
        mat = sp.Matrix(3, 3, lambda i, k: sum(E[a][i] * E[a][k] for a in range(3)))
        vol = det(E)
        Einv = adjugate(E) / vol
        h = MetricTensor(EUCLID_CHART, mat, signature="euclidean", sqrt_det=ORIENTATION * vol)
        h._inverse = sp.Matrix(3, 3, lambda i, k: sum(Einv[i, a] * Einv[k, a] for a in range(3)))
        h._det = vol ** 2
        return h

    def dual(self) -> list:
        """The vector fields nabla_1, nabla_2, nabla_3 of the display."""
        m, mb = sp.exp(I * ALPHA), sp.exp(-I * ALPHA)
        a, ab = sp.exp(-I * m * v), sp.exp(I * mb * v)
        V, S, Sb = self.V, self.S, self.Sbar
        return [VectorField(EUCLID_CHART, [a, ab, I * (S * a - Sb * ab) / (2 * V)]),
                VectorField(EUCLID_CHART, [I * a, -I * ab, -(S * a + Sb * ab) / (2 * V)]),
                VectorField(EUCLID_CHART, [0, 0, 1 / V])]


# Global orientation of the Euclidean quotient: the volume form is
# ORIENTATION * e1^e2^e3.  Fixed so that twist * V = +cos(alpha) on the
# rozw2 background at alpha = -pi/4.
ORIENTATION = 1


@dataclass
class Structure:
    frame: Frame3
    af1: DifferentialForm
    af2: DifferentialForm
    twist: sp.Expr
    divergence: sp.Expr
    ew: WeylStructure

    def compact(self, f) -> sp.Expr:
        """``f`` rewritten as cancel(f V) / V; an exact rational rewrite that
        keeps later symbolic derivatives of twist and divergence small."""
        V = self.frame.V
        return sp.cancel(sp.together(sp.sympify(f) * V)) / V


def euclid_frame(d: ReducedData) -> Frame3:
    if d.form == "ewred":
        raise DomainError("the orthonormal frame needs Euclidean data")
    FE = d.field if d.form == "euclid" else alter_to_euclid(d.field)
    F = euclid_to_holomorphic(FE)
    V, S, St = (holomorphic_to_euclid(e) for e in _fields(F))
    Sb = -St
    ch = EUCLID_CHART
    m, mb = sp.exp(I * ALPHA), sp.exp(-I * ALPHA)
    a, ab = sp.exp(I * m * v), sp.exp(-I * mb * v)
    dw_, dwb_, dv_ = (DifferentialForm.coordinate(ch, c) for c in ch.coords)
    e1 = (a / 2) * dw_ + (ab / 2) * dwb_
    e2 = (I * ab / 2) * dwb_ + (-I * a / 2) * dw_
    e3 = V * dv_ + (-I * S / 2) * dw_ + (I * Sb / 2) * dwb_
    omega = (S / (2 * V)) * dw_ + (Sb / (2 * V)) * dwb_
    return Frame3(e1, e2, e3, V, omega, S, Sb)


def frame_and_structure(d: ReducedData, points=(), params=None) -> Structure:
    fr = euclid_frame(d)
    params = params or d.params
    for pt in points:
        val = evaluate(fr.V, pt, params)
        if not val.real > 0:
            raise DomainError(f"V is not positive at {pt}: {val}")
    c, V = sp.cos(ALPHA), fr.V
    e1, e2, e3, om = fr.e1, fr.e2, fr.e3, fr.omega
    af1 = exterior_d(e3) - c * wedge(om, e3) - (c / V) * wedge(e1, e2)
    E = e1 + I * e2
    m = sp.exp(I * ALPHA)
    af2 = exterior_d(E) - m * wedge(om, E) - (I * m / V) * wedge(e3, E)
    h = fr.metric()
    twist = hodge(wedge(e3, exterior_d(e3)), h).scalar()
    divergence = hodge(exterior_d(hodge(e3, h)), h).scalar()
    nu = 2 * c * om - (4 * sp.sin(ALPHA) / V) * e3
    return Structure(fr, af1, af2, twist, divergence, WeylStructure(h, nu))
