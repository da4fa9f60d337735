"""The four-dimensional side: metrics from a Kahler potential Omega on the
null chart (w, z, wt, zt), the first heavenly equation, the canonical
conformal Killing vector and the scalar wave operator."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import sympy as sp

from .exterior import DifferentialForm, MetricTensor, VectorField, lie_derivative, wedge
from .scalar import (COMPLEX, Chart, M, MT, Params, evaluate, evaluate_many, w, wb, wt, z, zb, zt)

NULL_CHART = Chart("null", (w, z, wt, zt), (COMPLEX,) * 4)
# Euclidean slice: wt = -conj(w), zt = conj(z)
EUCLIDEAN_NULL_CHART = Chart("null-euclidean", (w, z, wt, zt),
                             (("negconj", 2), ("conj", 3), ("negconj", 0), ("conj", 1)))
EUCLIDEAN_CHART = Chart("euclidean4", (w, z, wb, zb), (("conj", 2), ("conj", 3), ("conj", 0), ("conj", 1)))


@dataclass
class PlebanskiData:
    Omega: sp.Expr
    params: Params | None = None
    chart: Chart = NULL_CHART

    def __post_init__(self):
        self.Omega = sp.sympify(self.Omega)


def hessian(d: PlebanskiData) -> sp.Matrix:
    """Mixed block [[O_wwt, O_wzt], [O_zwt, O_zzt]]."""
    O = d.Omega
    return sp.Matrix([[sp.diff(O, w, wt), sp.diff(O, w, zt)], [sp.diff(O, z, wt), sp.diff(O, z, zt)]])


def heavenly_expression(d: PlebanskiData):
    H = hessian(d)
    return H[0, 1] * H[1, 0] - H[0, 0] * H[1, 1] - 1


def heavenly_residual(d: PlebanskiData, point) -> complex:
    return evaluate(heavenly_expression(d), point, d.params)


# Orientation of the null chart: the volume form is ORIENTATION * detH/4
# dw^dz^dwt^dzt.  +1 makes the Jones-Tod one-form of the canonical Killing
# vector agree with the closed-form one of the reduction; with this choice
# the Sigma basis below satisfies *Sigma = -Sigma.
ORIENTATION = 1


def plebanski_metric(d: PlebanskiData) -> MetricTensor:
    """ds^2 = O_wwt dw dwt + O_wzt dw dzt + O_zwt dz dwt + O_zzt dz dzt."""
    H = hessian(d)
    g = sp.zeros(4, 4)
    for a in range(2):
        for b in range(2):
            g[a, 2 + b] = g[2 + b, a] = H[a, b] / 2
    deth = H[0, 1] * H[1, 0] - H[0, 0] * H[1, 1]
    metric = MetricTensor(d.chart, g, signature="complex", sqrt_det=ORIENTATION * deth / 4)
    # block inverse [[0, 2 H^-T], [2 H^-1, 0]]
    Hinv = sp.Matrix([[H[1, 1], -H[0, 1]], [-H[1, 0], H[0, 0]]]) / (-deth)
    ginv = sp.zeros(4, 4)
    for a in range(2):
        for b in range(2):
            ginv[a, 2 + b] = 2 * Hinv[b, a]
            ginv[2 + b, a] = 2 * Hinv[b, a]
    metric._inverse = ginv
    metric._det = deth ** 2 / 16
    return metric


def canonical_killing(chart: Chart = NULL_CHART) -> VectorField:
    """K = eta(z d_z + zt d_zt) + rho(z d_z - zt d_zt) = m z d_z + mt zt d_zt."""
    comps = [0] * chart.dim
    comps[chart.index(z)] = M * z
    comps[chart.index(zt)] = MT * zt
    return VectorField(chart, comps)


def conformal_killing_residual(d: PlebanskiData, K: VectorField, eta, point) -> float:
    g = plebanski_metric(d)
    L = lie_derivative(K, g)
    diff = L.matrix - sp.sympify(eta) * g.matrix
    return float(np.max(np.abs(evaluate_many(list(diff), point, d.params))))


def wave_operator_4d(d: PlebanskiData, f) -> sp.Expr:
    """Box f = (1/sqrt g) d_a(sqrt g g^ab d_b f), i.e. d*d f / vol."""
    g = plebanski_metric(d)
    ginv, sq = g.inverse, g.sqrt_det
    coords = d.chart.coords
    df = [sp.diff(f, x) for x in coords]
    flux = [sq * sum(ginv[a, b] * df[b] for b in range(4)) for a in range(4)]
    return sum(sp.diff(flux[a], coords[a]) for a in range(4)) / sq


def norm_squared(d: PlebanskiData, f) -> sp.Expr:
    """|df|^2 = g^ab d_a f d_b f."""
    ginv = plebanski_metric(d).inverse
    df = [sp.diff(f, x) for x in d.chart.coords]
    return sum(ginv[a, b] * df[a] * df[b] for a in range(4) for b in range(4))


def sd_two_forms(d: PlebanskiData):
    """(Sigma^{0'0'}, Sigma^{1'1'}, Sigma^{1'0'})."""
    ch = d.chart
    H = hessian(d)
    dx = [DifferentialForm.coordinate(ch, c) for c in ch.coords]
    s00 = wedge(dx[2], dx[3])
    s11 = wedge(dx[0], dx[1])
    s10 = (H[0, 0] * wedge(dx[0], dx[2]) + H[0, 1] * wedge(dx[0], dx[3])
           + H[1, 0] * wedge(dx[1], dx[2]) + H[1, 1] * wedge(dx[1], dx[3]))
    return s00, s11, s10


def sd_wedge_identity(d: PlebanskiData):
    """Coefficient of dw^dz^dwt^dzt in 2 S00^S11 - S10^S10
    (equals -2 times the heavenly residual)."""
    s00, s11, s10 = sd_two_forms(d)
    form = 2 * wedge(s00, s11) - wedge(s10, s10)
    return form[(0, 1, 2, 3)]


def to_euclidean(expr):
    """Restrict to the Euclidean slice wt = -wb, zt = zb."""
    return sp.sympify(expr).xreplace({wt: -wb, zt: zb})


def euclidean_heavenly_expression(Omega_euclid):
    """O_wwb O_zzb - O_wzb O_zwb - 1 for Omega on (w, z, wb, zb)."""
    O = sp.sympify(Omega_euclid)
    return (sp.diff(O, w, wb) * sp.diff(O, z, zb) - sp.diff(O, w, zb) * sp.diff(O, z, wb) - 1)


def euclidean_point(wv: complex, zv: complex) -> dict:
    """A point of the null chart on the Euclidean slice."""
    return {w: complex(wv), z: complex(zv), wt: -complex(wv).conjugate(), zt: complex(zv).conjugate()}
