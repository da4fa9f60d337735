"""Named exact solutions and the claims each of them makes.

Fields are stored with parameter symbols (alpha, b, ...) left free; the
entry's ``params`` binds them at evaluation time.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import sympy as sp

from . import heavenly, reduction, twodim
from .exterior import DifferentialForm, MetricTensor, curvature
from .heavenly import EUCLIDEAN_CHART, NULL_CHART, PlebanskiData
from .reduction import EUCLID_CHART, EWRED_CHART
from .scalar import (ALPHA, B, REAL, RHO, Chart, DomainError, J, Params, j, parameter, phi,
                     psi, theta, u, v, w, wb, wt, z, zb, zt)
from .weyl import WeylStructure, ew_residual

I = sp.I
BERGER_CHART = Chart("berger", (theta, phi, psi), (REAL,) * 3)
BERGER_BOX = {"theta": (0.2, math.pi - 0.2), "phi": (0.0, 2 * math.pi), "psi": (0.0, 2 * math.pi)}
DEFAULT_BOX = {"w": (-0.8, 0.8), "wt": (-0.8, 0.8), "wb": (-0.8, 0.8), "v": (-1.0, 1.0),
               "u": (-0.5, 0.5), "z": (0.3, 1.0), "zt": (0.3, 1.0), "zb": (0.3, 1.0),
               "j": (0.2, 2.0), "J": (0.5, 2.0)}


@dataclass(frozen=True)
class Claim:
    """``kind`` names a residual; ``zero`` says whether it is claimed to vanish."""

    kind: str
    field: str
    zero: bool = True
    tol: float = 1e-10


@dataclass
class SolutionEntry:
    name: str
    chart: Chart
    fields: dict
    params: Params
    claims: list
    description: str = ""
    structure: WeylStructure | None = None
    box: dict = field(default_factory=dict)

    def sample(self, n: int, seed: int = 0):
        box = dict(DEFAULT_BOX)
        box.update(self.box)
        return self.chart.sample(n, seed=seed, box={k: val for k, val in box.items()
                                                     if k in {c.name for c in self.chart.coords}})

    def to_dict(self) -> dict:
        return {"name": self.name, "chart": [c.name for c in self.chart.coords],
                "fields": {k: str(val) for k, val in self.fields.items()},
                "params": {"alpha": self.params.alpha, "b": self.params.b,
                           **{k: _jsonable(val) for k, val in self.params.extra.items()}},
                "claims": [{"kind": c.kind, "field": c.field, "zero": c.zero, "tol": c.tol} for c in self.claims],
                "description": self.description}


def _jsonable(val):
    val = complex(val)
    return val.real if val.imag == 0 else [val.real, val.imag]


# -- residual evaluators ----------------------------------------------------------

def _null_omega(entry: SolutionEntry, name: str):
    """Euclidean potentials are moved to the null chart (wb = -wt, zb = zt)."""
    O = entry.fields[name]
    if entry.chart is EUCLIDEAN_CHART:
        O = O.xreplace({wb: -wt, zb: zt})
    return PlebanskiData(O, entry.params)


def _null_point(entry: SolutionEntry, point):
    if entry.chart is EUCLIDEAN_CHART:
        return heavenly.euclidean_point(point[w], point[z])
    return point


def _res_heavenly(entry, name, point):
    d = _null_omega(entry, name)
    return heavenly.heavenly_residual(d, _null_point(entry, point))


def _res_riemann(entry, name, point):
    d = _null_omega(entry, name)
    return float(np.max(np.abs(curvature(heavenly.plebanski_metric(d), _null_point(entry, point),
                                         entry.params).riemann)))


def _res_conformal_killing(entry, name, point):
    d = _null_omega(entry, name)
    K = heavenly.canonical_killing()
    return heavenly.conformal_killing_residual(d, K, entry.params.eta, point)


def _reduced(form):
    def res(entry, name, point):
        return reduction.reduced_residual(reduction.ReducedData(entry.fields[name], entry.params, form), point)
    return res


def _two_d(kind):
    def res(entry, name, point):
        return twodim.residual_2d(kind, entry.fields[name], entry.params, point)
    return res


def _res_chi(entry, name, point):
    return ew_residual(entry.structure, point, entry.params).sup


RESIDUALS: dict[str, Callable] = {
    "heavenly": _res_heavenly, "riemann": _res_riemann, "conformal_killing": _res_conformal_killing,
    "ewred": _reduced("ewred"), "euclid": _reduced("euclid"), "alterform": _reduced("alterform"),
    "liouville": _two_d("liouville"), "hypercr": _two_d("hypercr"), "toda": _two_d("toda"), "rjv": _two_d("rjv"), "chi": _res_chi,
}


def claim_residual(entry: SolutionEntry, claim: Claim, point) -> float:
    return float(abs(RESIDUALS[claim.kind](entry, claim.field, point)))


@dataclass
class ClaimReport:
    claim: Claim
    value: float

    @property
    def passed(self) -> bool:
        return (not self.claim.zero) or self.value < self.claim.tol


def check_claims(entry: SolutionEntry, n_points: int = 10, seed: int = 0, points=None) -> list[ClaimReport]:
    """Sup of every claimed residual over sampled points of the entry's chart."""
    pts = points if points is not None else entry.sample(n_points, seed)
    return [ClaimReport(c, max(claim_residual(entry, c, p) for p in pts)) for c in entry.claims]


# -- builders ------------------------------------------------------------------

def _flat4(params, **kw):
    return SolutionEntry("flat4", NULL_CHART, {"Omega": w * zt + z * wt}, params,
                         [Claim("heavenly", "Omega", tol=1e-13), Claim("riemann", "Omega")],
                         "flat Plebanski potential")


def _flat4_conformal(params, **kw):
    return SolutionEntry("flat4_conformal", NULL_CHART, {"Omega": 2 * (w + wt) * sp.sqrt(z * zt)}, params,
                         [Claim("heavenly", "Omega"), Claim("riemann", "Omega"),
                          Claim("conformal_killing", "Omega")],
                         "flat potential for which the canonical K is conformally Killing",
                         box={"w": (-0.8, 0.8), "wt": (-0.8, 0.8)})


def _flat_reduced(params, **kw):
    return SolutionEntry("flat_reduced", EWRED_CHART, {"F": 2 * (w + wt) * sp.exp(RHO * u)}, params,
                         [Claim("ewred", "F")], "reduction of flat4_conformal")


def rozw1_G():
    return 4 * B + w * wb / B


def rozw2_G():
    s = sp.sin(ALPHA)
    return sp.exp(v * s) * w * wb / B + 4 * sp.exp(-v * s) * B / (1 + 3 * s ** 2)


def _rozw1(params, **kw):
    return SolutionEntry("rozw1", EUCLID_CHART, {"G": rozw1_G(), "Psi": sp.log(rozw1_G())}, params,
                         [Claim("alterform", "G", tol=1e-12), Claim("liouville", "Psi", tol=1e-12)],
                         "v-independent alterform solution (Liouville reduction)")


def _rozw1_psi(params, **kw):
    return SolutionEntry("rozw1_psi", twodim.CHARTS["liouville"], {"Psi": sp.log(rozw1_G())}, params,
                         [Claim("liouville", "Psi", tol=1e-12)], "Liouville potential of rozw1")


def _rozw2(params, **kw):
    return SolutionEntry("rozw2", EUCLID_CHART, {"G": rozw2_G()}, params,
                         [Claim("alterform", "G", tol=1e-12)], "X3-invariant alterform solution")


def rozw2_omega():
    s, c = sp.sin(ALPHA), sp.cos(ALPHA)
    zz = z * zb
    return (zz ** (c ** 2 / 2) * (zb / z) ** (I * s * c / 2) * w * wb / B
            + zz ** ((1 + s ** 2) / 2) * (z / zb) ** (I * s * c / 2) * 4 * B / (1 + 3 * s ** 2))


def _rozw2_omega(params, **kw):
    return SolutionEntry("rozw2_omega", EUCLIDEAN_CHART, {"Omega": rozw2_omega()}, params,
                         [Claim("heavenly", "Omega"), Claim("riemann", "Omega", tol=1e-8)],
                         "Kahler potential of rozw2 (principal branch, z off the negative axis)",
                         box={"z": (0.3, 1.0)})


def berger_structure() -> WeylStructure:
    c2 = sp.cos(ALPHA) ** 2
    ct, st = sp.cos(theta), sp.sin(theta)
    mat = sp.Matrix([[1, 0, 0],
                     [0, st ** 2 + c2 * ct ** 2, -c2 * ct],
                     [0, -c2 * ct, c2]])
    h = MetricTensor(BERGER_CHART, mat, signature="euclidean", sqrt_det=sp.cos(ALPHA) * st)
    nu = DifferentialForm.one_form(BERGER_CHART, [0, sp.sin(2 * ALPHA) * ct, -sp.sin(2 * ALPHA)])
    return WeylStructure(h, nu)


def _berger(params, **kw):
    s = berger_structure()
    return SolutionEntry("berger", BERGER_CHART, {"h_psipsi": s.h.matrix[2, 2], "nu_psi": s.nu[(2,)]}, params,
                         [Claim("chi", "h", tol=1e-9)], "Einstein-Weyl Berger sphere",
                         structure=s, box=BERGER_BOX)


_X = sp.Symbol("X")


def liouville_psi(P):
    """e^Psi = 2(1 + P Pb)/sqrt(P_w Pb_wb) for holomorphic P(w)."""
    P = sp.sympify(P)
    Pb = sp.conjugate(P.xreplace({w: _X})).xreplace({sp.conjugate(_X): wb})
    return sp.log(2 * (1 + P * Pb) / sp.sqrt(sp.diff(P, w) * sp.diff(Pb, wb)))


def _liouville_general(params, P=None, **kw):
    P = w if P is None else sp.sympify(P)
    return SolutionEntry("liouville_general", twodim.CHARTS["liouville"], {"Psi": liouville_psi(P), "P": P},
                         params, [Claim("liouville", "Psi")], "general Liouville solution")


def _rjv_separable(params, **kw):
    a1, a2, a3 = (parameter(n) for n in ("alpha1", "alpha2", "alpha3"))
    R = a1 * v ** 2 + a2 * v + a1 * sp.atanh(sp.sqrt(4 / J ** 2 + 1)) + a3
    if not {"alpha1", "alpha2", "alpha3"} <= set(params.extra):
        params = params.with_extra(**{"alpha1": 0.3, "alpha2": 0.5, "alpha3": 0.1, **params.extra})
    return SolutionEntry("rjv_separable", twodim.CHARTS["rjv"], {"R": R}, params,
                         [Claim("rjv", "R", zero=False)], "separable R(J, v); residual reported only",
                         box={"J": (0.5, 2.0)})


def _hypercr_exponential(params, **kw):
    k = parameter("k")
    if "k" not in params.extra:
        params = params.with_extra(k=0.7)
    F = sp.exp(k * v) * w * wb / B + 4 * B * sp.exp(-k * v) / (1 + k ** 2)
    return SolutionEntry("hypercr_exponential", EUCLID_CHART, {"F": F}, params,
                         [Claim("hypercr", "F", tol=1e-12)],
                         "alpha = 0 solution with F_vw != 0 (a hyper-CR background)")


def _lebrun_ward_separable(params, **kw):
    a, c = parameter("a"), parameter("c")
    if not {"a", "c"} <= set(params.extra):
        params = params.with_extra(**{"a": 0.25, "c": 1.0, **params.extra})
    vf = sp.log(4 * (j ** 2 / 16 + a * j + c) / (1 + w * wb) ** 2) / 2
    return SolutionEntry("lebrun_ward_separable", twodim.CHARTS["toda"], {"v": vf}, params,
                         [Claim("toda", "v", tol=1e-12), Claim("chi", "v", tol=1e-8)],
                         "separable Toda solution and its LeBrun-Ward structure",
                         structure=twodim.lebrun_ward(vf), box={"j": (0.2, 2.0)})


_BUILDERS = {
    "flat4": _flat4, "flat4_conformal": _flat4_conformal, "flat_reduced": _flat_reduced,
    "rozw1": _rozw1, "rozw1_psi": _rozw1_psi, "rozw2": _rozw2, "rozw2_omega": _rozw2_omega,
    "berger": _berger, "liouville_general": _liouville_general, "rjv_separable": _rjv_separable,
    "lebrun_ward_separable": _lebrun_ward_separable, "hypercr_exponential": _hypercr_exponential,
}
NAMES = tuple(_BUILDERS)


def get(name: str, params: Params | None = None, **options) -> SolutionEntry:
    """Registered solution bound to ``params`` (default: Euclidean alpha = -pi/4, b = 1)."""
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise DomainError(f"unknown solution {name!r}; known: {', '.join(NAMES)}") from None
    if params is None:
        params = Params.euclidean()
    elif not isinstance(params, Params):
        raise DomainError("params must be a Params instance")
    if params.reality == "euclidean" and not -math.pi / 2 - 1e-12 <= params.alpha <= 1e-12:
        raise DomainError(f"alpha must lie in [-pi/2, 0], got {params.alpha}")
    return builder(params, **options)


def transform_solution(entry: SolutionEntry, Bc=1.0, C=0.0) -> SolutionEntry:
    """G -> Bc e^{v s}(G + g(v)) with
    g = -4b + 4b e^{-2 v s}/(Bc^2 (1 + 3 s^2)) + (C e^{i v c} + conj(C) e^{-i v c})/Bc,
    mapping v-independent alterform solutions to alterform solutions."""
    if "G" not in entry.fields or entry.chart is not EUCLID_CHART:
        raise DomainError("transform_solution needs an alterform entry")
    G = entry.fields["G"]
    if G.has(v):
        raise DomainError("transform_solution needs a v-independent solution")
    if abs(math.cos(entry.params.alpha)) < 1e-12:
        raise DomainError("the transformation degenerates at cos(alpha) = 0")
    s, c = sp.sin(ALPHA), sp.cos(ALPHA)
    Bs, Cs, Cbs = parameter("Btr"), parameter("Ctr"), parameter("Cbtr")
    g = (-4 * B + 4 * B * sp.exp(-2 * v * s) / (Bs ** 2 * (1 + 3 * s ** 2))
         + (Cs * sp.exp(I * v * c) + Cbs * sp.exp(-I * v * c)) / Bs)
    Gt = Bs * sp.exp(v * s) * (G + g)
    C = complex(C)
    params = entry.params.with_extra(Btr=float(Bc), Ctr=C, Cbtr=C.conjugate())
    return SolutionEntry(f"{entry.name}_transformed", EUCLID_CHART, {"G": Gt}, params,
                         [Claim("alterform", "G")], f"symmetry transform of {entry.name}")


def export_json(params: Params | None = None) -> str:
    return json.dumps([get(n, params).to_dict() for n in NAMES], indent=2, sort_keys=True)
