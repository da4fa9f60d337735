"""Exterior calculus and pointwise Riemannian curvature on a chart.

Forms keep their components on strictly increasing index tuples, so
``{(0, 2): f}`` is ``f dx0^dx2``.  All operations are symbolic except
:func:`curvature`, which contracts numerical derivative jets of the metric
at a point (symbolic inverses of 4x4 metrics built from fourth derivatives
of a potential are far too large to be useful).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping

import numpy as np
import sympy as sp

from .scalar import Chart, DomainError, EvaluationError, evaluate_many, jet


def _perm_sign(seq) -> int:
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for k in range(i + 1, len(seq)):
            if seq[i] > seq[k]:
                sign = -sign
            elif seq[i] == seq[k]:
                return 0
    return sign


def det(matrix) -> sp.Expr:
    """Leibniz determinant without any simplification (sympy's own methods
    run polynomial gcds that blow up on derivative-heavy entries)."""
    matrix = sp.Matrix(matrix)
    n = matrix.shape[0]
    if n == 0:
        return sp.Integer(1)
    total = 0
    for perm in itertools.permutations(range(n)):
        term = _perm_sign(perm)
        for r, c in enumerate(perm):
            term = term * matrix[r, c]
            if term == 0:
                break
        total += term
    return total


def adjugate(matrix) -> sp.Matrix:
    matrix = sp.Matrix(matrix)
    n = matrix.shape[0]
    adj = sp.zeros(n, n)
    for r in range(n):
        for c in range(n):
            minor = [[matrix[i, k] for k in range(n) if k != c] for i in range(n) if i != r]
            adj[c, r] = (-1) ** (r + c) * det(minor if minor else sp.zeros(0, 0))
    return adj


def _same_chart(a: Chart, b: Chart):
    if a.coords != b.coords:
        raise DomainError(f"chart mismatch: {a.name} vs {b.name}")


class VectorField:
    def __init__(self, chart: Chart, components):
        components = tuple(sp.sympify(c) for c in components)
        if len(components) != chart.dim:
            raise DomainError(f"vector field needs {chart.dim} components, got {len(components)}")
        self.chart = chart
        self.components = components

    def __call__(self, f):
        """Directional derivative X(f)."""
        return sum(c * sp.diff(f, x) for c, x in zip(self.components, self.chart.coords) if c != 0)

    def __add__(self, other):
        _same_chart(self.chart, other.chart)
        return VectorField(self.chart, [a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other):
        return self + (-1) * other

    def __rmul__(self, scalar):
        return VectorField(self.chart, [scalar * c for c in self.components])

    __mul__ = __rmul__

    def __neg__(self):
        return (-1) * self

    def values(self, point, params=None) -> np.ndarray:
        return evaluate_many(self.components, point, params)

    def __repr__(self):
        terms = [f"({c})*d_{x}" for c, x in zip(self.components, self.chart.coords) if c != 0]
        return " + ".join(terms) or "0"


class DifferentialForm:
    def __init__(self, chart: Chart, degree: int, components: Mapping | None = None):
        if not 0 <= degree <= chart.dim:
            raise DomainError(f"degree {degree} out of range on a {chart.dim}-dimensional chart")
        self.chart = chart
        self.degree = degree
        comps = {}
        for idx, val in (components or {}).items():
            idx = tuple(idx)
            if len(idx) != degree:
                raise DomainError(f"index {idx} does not match degree {degree}")
            sign = _perm_sign(idx)
            if sign == 0:
                continue
            key = tuple(sorted(idx))
            comps[key] = comps.get(key, 0) + sign * sp.sympify(val)
        self.components = {k: v for k, v in comps.items() if v != 0}

    @classmethod
    def function(cls, chart: Chart, f):
        return cls(chart, 0, {(): f})

    @classmethod
    def one_form(cls, chart: Chart, coefficients):
        return cls(chart, 1, {(i,): c for i, c in enumerate(coefficients)})

    @classmethod
    def coordinate(cls, chart: Chart, coord) -> "DifferentialForm":
        return cls(chart, 1, {(chart.index(coord),): 1})

    def __getitem__(self, idx):
        idx = tuple(idx)
        sign = _perm_sign(idx)
        if sign == 0:
            return sp.Integer(0)
        return sign * self.components.get(tuple(sorted(idx)), sp.Integer(0))

    def scalar(self):
        if self.degree != 0:
            raise DomainError("not a 0-form")
        return self.components.get((), sp.Integer(0))

    def __add__(self, other):
        _same_chart(self.chart, other.chart)
        if self.degree != other.degree:
            raise DomainError("cannot add forms of different degree")
        comps = dict(self.components)
        for k, v in other.components.items():
            comps[k] = comps.get(k, 0) + v
        return DifferentialForm(self.chart, self.degree, comps)

    def __sub__(self, other):
        return self + (-1) * other

    def __rmul__(self, scalar):
        return DifferentialForm(self.chart, self.degree, {k: scalar * v for k, v in self.components.items()})

    __mul__ = __rmul__

    def __truediv__(self, scalar):
        return (1 / sp.sympify(scalar)) * self

    def __neg__(self):
        return (-1) * self

    def __xor__(self, other):
        return wedge(self, other)

    def applyfunc(self, fn):
        return DifferentialForm(self.chart, self.degree, {k: fn(v) for k, v in self.components.items()})

    def values(self, point, params=None) -> dict:
        keys = list(self.components)
        vals = evaluate_many([self.components[k] for k in keys], point, params) if keys else []
        return dict(zip(keys, vals))

    def sup(self, point, params=None) -> float:
        vals = self.values(point, params)
        return max((abs(v) for v in vals.values()), default=0.0)

    def __repr__(self):
        names = [c.name for c in self.chart.coords]
        terms = [f"({v})*" + "^".join("d" + names[i] for i in k) for k, v in self.components.items()]
        return " + ".join(terms) or "0"


class MetricTensor:
    """Symmetric metric ``g_ij dx^i dx^j`` on a chart.

    ``sqrt_det`` fixes the volume form ``sqrt_det dx^1^...^dx^n`` and hence
    the orientation and the Hodge star.  When omitted it is the principal
    square root of the determinant, which is correct for real
    positive-definite metrics in real coordinates.
    """

    def __init__(self, chart: Chart, matrix, signature: str | None = None, sqrt_det=None):
        matrix = sp.Matrix(matrix)
        if matrix.shape != (chart.dim, chart.dim):
            raise DomainError(f"metric shape {matrix.shape} does not match chart dimension {chart.dim}")
        if any(matrix[i, k] != matrix[k, i] and sp.expand(matrix[i, k] - matrix[k, i]) != 0 for i in range(chart.dim) for k in range(i)):
            raise DomainError("metric components are not symmetric")
        self.chart = chart
        self.matrix = matrix
        self.dim = chart.dim
        self.signature = signature
        self._sqrt_det = sp.sympify(sqrt_det) if sqrt_det is not None else None
        self._det = None
        self._inverse = None

    @classmethod
    def from_line_element(cls, chart: Chart, one_forms_squared=(), products=(), **kw):
        """Build from a sum of ``c * a*b`` terms of one-forms.

        ``one_forms_squared`` holds ``(c, a)`` for ``c a^2``; ``products``
        holds ``(c, a, b)`` for the symmetric product ``c a b``.
        """
        n = chart.dim
        mat = sp.zeros(n, n)
        for c, a in one_forms_squared:
            products = tuple(products) + ((c, a, a),)
        for c, a, b in products:
            for i in range(n):
                for k in range(n):
                    mat[i, k] += c * (a[(i,)] * b[(k,)] + a[(k,)] * b[(i,)]) / 2
        return cls(chart, mat, **kw)

    @property
    def det(self):
        if self._det is None:
            self._det = det(self.matrix)
        return self._det

    @property
    def sqrt_det(self):
        return self._sqrt_det if self._sqrt_det is not None else sp.sqrt(self.det)

    @property
    def inverse(self):
        if self._inverse is None:
            self._inverse = adjugate(self.matrix) / self.det
        return self._inverse

    def __call__(self, X: VectorField, Y: VectorField):
        return sum(self.matrix[i, k] * X.components[i] * Y.components[k]
                   for i in range(self.dim) for k in range(self.dim))

    def lower(self, X: VectorField) -> DifferentialForm:
        return DifferentialForm.one_form(self.chart, [sum(self.matrix[i, k] * X.components[k] for k in range(self.dim))
                                                      for i in range(self.dim)])

    def scale(self, factor) -> "MetricTensor":
        sq = None
        if self._sqrt_det is not None:
            sq = self._sqrt_det * sp.sympify(factor) ** sp.Rational(self.dim, 2)
        return MetricTensor(self.chart, factor * self.matrix, self.signature, sq)

    def values(self, point, params=None) -> np.ndarray:
        return evaluate_many(list(self.matrix), point, params).reshape(self.dim, self.dim)

    def __repr__(self):
        return f"MetricTensor({self.chart.name}, {self.matrix.tolist()})"


# -- operations ---------------------------------------------------------------

def exterior_d(beta: DifferentialForm) -> DifferentialForm:
    if beta.degree >= beta.chart.dim:
        raise DomainError("exterior derivative of a top form")
    comps = {}
    for idx, val in beta.components.items():
        for i, x in enumerate(beta.chart.coords):
            if i in idx:
                continue
            dv = sp.diff(val, x)
            if dv != 0:
                key = (i,) + idx
                comps[key] = comps.get(key, 0) + dv
    return DifferentialForm(beta.chart, beta.degree + 1, comps)


def wedge(a: DifferentialForm, b: DifferentialForm) -> DifferentialForm:
    _same_chart(a.chart, b.chart)
    if a.degree + b.degree > a.chart.dim:
        return DifferentialForm(a.chart, a.chart.dim, {})
    comps = {}
    for ia, va in a.components.items():
        for ib, vb in b.components.items():
            if set(ia) & set(ib):
                continue
            key = ia + ib
            comps[key] = comps.get(key, 0) + va * vb
    return DifferentialForm(a.chart, a.degree + b.degree, comps)


def interior(X: VectorField, beta: DifferentialForm) -> DifferentialForm:
    _same_chart(X.chart, beta.chart)
    if beta.degree == 0:
        return DifferentialForm(beta.chart, 0, {})
    comps = {}
    for idx, val in beta.components.items():
        for pos, i in enumerate(idx):
            if X.components[i] == 0:
                continue
            key = idx[:pos] + idx[pos + 1:]
            comps[key] = comps.get(key, 0) + (-1) ** pos * X.components[i] * val
    return DifferentialForm(beta.chart, beta.degree - 1, comps)


def lie_bracket(X: VectorField, Y: VectorField) -> VectorField:
    _same_chart(X.chart, Y.chart)
    return VectorField(X.chart, [X(yc) - Y(xc) for xc, yc in zip(X.components, Y.components)])


def lie_derivative(X: VectorField, T):
    if isinstance(T, DifferentialForm):
        _same_chart(X.chart, T.chart)
        if T.degree == 0:
            return DifferentialForm(T.chart, 0, {(): X(T.scalar())})
        out = interior(X, exterior_d(T)) if T.degree < T.chart.dim else DifferentialForm(T.chart, T.degree, {})
        return out + exterior_d(interior(X, T))
    if isinstance(T, MetricTensor):
        _same_chart(X.chart, T.chart)
        n, g, xs = T.dim, T.matrix, T.chart.coords
        mat = sp.zeros(n, n)
        for i in range(n):
            for k in range(i, n):
                val = X(g[i, k])
                for l in range(n):
                    val += g[l, k] * sp.diff(X.components[l], xs[i]) + g[i, l] * sp.diff(X.components[l], xs[k])
                mat[i, k] = mat[k, i] = val
        return MetricTensor(T.chart, mat, T.signature)
    # plain scalar expression
    return X(T)


def hodge(beta: DifferentialForm, g: MetricTensor) -> DifferentialForm:
    """(*b)_J = (1/p!) sqrt_det b^I eps_IJ with indices raised by g."""
    _same_chart(beta.chart, g.chart)
    n, p = g.dim, beta.degree
    ginv = g.inverse
    sq = g.sqrt_det
    raised = {}
    for up in itertools.combinations(range(n), p):
        val = 0
        for low, comp in beta.components.items():
            # sum over ordered lower indices of the antisymmetric form equals
            # the determinant of the inverse-metric minor
            minor = [[ginv[up[r], low[c]] for c in range(p)] for r in range(p)]
            val += (det(minor) if p else 1) * comp
        if val != 0:
            raised[up] = val
    comps = {}
    for up, val in raised.items():
        rest = tuple(i for i in range(n) if i not in up)
        comps[rest] = comps.get(rest, 0) + _perm_sign(up + rest) * sq * val
    return DifferentialForm(beta.chart, n - p, comps)


def hodge_sign(g: MetricTensor, p: int):
    """Sign s in ``**b = s b`` for p-forms, as a symbolic expression."""
    n = g.dim
    return (-1) ** (p * (n - p)) * g.sqrt_det ** 2 / g.det


def volume_form(g: MetricTensor) -> DifferentialForm:
    return DifferentialForm(g.chart, g.dim, {tuple(range(g.dim)): g.sqrt_det})


def divergence(X: VectorField, g: MetricTensor):
    """(1/sqrt g) d_i (sqrt g X^i)."""
    sq = g.sqrt_det
    return sum(sp.diff(sq * c, x) for c, x in zip(X.components, g.chart.coords)) / sq


def gradient(f, g: MetricTensor) -> VectorField:
    ginv = g.inverse
    df = [sp.diff(f, x) for x in g.chart.coords]
    return VectorField(g.chart, [sum(ginv[i, k] * df[k] for k in range(g.dim)) for i in range(g.dim)])


# -- pullback -----------------------------------------------------------------

def _jacobian(target: Chart, source: Chart, mapping: Mapping):
    try:
        images = [sp.sympify(mapping[c]) for c in target.coords]
    except KeyError as exc:
        raise DomainError(f"pullback map is missing coordinate {exc}") from None
    return images, [[sp.diff(img, x) for x in source.coords] for img in images]


def pullback(obj, source: Chart, mapping: Mapping):
    """Pull a form or metric on ``obj.chart`` back along ``x -> mapping(x)``.

    ``mapping`` sends each coordinate of the target chart to an expression
    in the coordinates of ``source``.
    """
    target = obj.chart
    images, jac = _jacobian(target, source, mapping)
    subs = dict(zip(target.coords, images))
    if isinstance(obj, MetricTensor):
        n, m = target.dim, source.dim
        gm = obj.matrix.xreplace(subs)
        mat = sp.zeros(m, m)
        for i in range(m):
            for k in range(i, m):
                mat[i, k] = mat[k, i] = sum(jac[a][i] * gm[a, b] * jac[b][k]
                                            for a in range(n) for b in range(n)
                                            if gm[a, b] != 0 and jac[a][i] != 0 and jac[b][k] != 0)
        return MetricTensor(source, mat, obj.signature)
    if isinstance(obj, DifferentialForm):
        p = obj.degree
        comps = {}
        for idx in itertools.combinations(range(source.dim), p):
            val = 0
            for key, comp in obj.components.items():
                minor = [[jac[key[r]][idx[c]] for c in range(p)] for r in range(p)]
                val += comp.xreplace(subs) * (det(minor) if p else 1)
            if val != 0:
                comps[idx] = val
        return DifferentialForm(source, p, comps)
    return sp.sympify(obj).xreplace(subs)


# -- pointwise curvature ------------------------------------------------------

@dataclass
class Curvature:
    metric: np.ndarray
    inverse: np.ndarray
    christoffel: np.ndarray  # Gamma^a_{bc}
    riemann: np.ndarray  # R^a_{bcd}
    ricci: np.ndarray  # R_{bd} = R^a_{bad}
    scalar: complex
    dchristoffel: np.ndarray  # d_e Gamma^a_{bc}, last slot is the derivative


def _christoffel(ginv, dg):
    # t[d, b, c] = d_b g_dc + d_c g_db - d_d g_bc
    t = np.einsum("dcb->dbc", dg) + dg - np.einsum("bcd->dbc", dg)
    return 0.5 * np.einsum("ad,dbc->abc", ginv, t)


def curvature_from_jet(g0, dg, ddg) -> Curvature:
    """Curvature from g, dg[i,k,l] = d_l g_ik, ddg[i,k,l,m] = d_l d_m g_ik."""
    ginv = np.linalg.inv(g0)
    gam = _christoffel(ginv, dg)
    # d_e g^{ad} = -g^{ap} d_e g_pq g^{qd}
    dginv = -np.einsum("ap,pqe,qd->ade", ginv, dg, ginv)
    # dt[d, b, c, e] = d_e t[d, b, c]
    dt = np.einsum("dcbe->dbce", ddg) + ddg - np.einsum("bcde->dbce", ddg)
    t0 = np.einsum("dcb->dbc", dg) + dg - np.einsum("bcd->dbc", dg)
    dgam = 0.5 * (np.einsum("ade,dbc->abce", dginv, t0) + np.einsum("ad,dbce->abce", ginv, dt))
    riem = (np.einsum("adbc->abcd", dgam) - np.einsum("acbd->abcd", dgam)
            + np.einsum("ace,edb->abcd", gam, gam) - np.einsum("ade,ecb->abcd", gam, gam))
    ric = np.einsum("abad->bd", riem)
    scal = complex(np.einsum("bd,bd->", ginv, ric))
    return Curvature(g0, ginv, gam, riem, ric, scal, dgam)


def curvature(g: MetricTensor, point, params=None) -> Curvature:
    """Christoffel symbols, Riemann, Ricci and scalar curvature at a point."""
    n = g.dim
    D = jet(list(g.matrix), g.chart.coords, point, params, order=2)
    g0 = D[0].reshape(n, n)
    if abs(np.linalg.det(g0)) < 1e-12:
        raise EvaluationError(f"metric is singular at {point}")
    return curvature_from_jet(g0, D[1].reshape(n, n, n), D[2].reshape(n, n, n, n))


def curvature_fd(g: MetricTensor, point, params=None, step: float = 1e-3) -> Curvature:
    """Finite-difference oracle: Christoffels by differencing g, Riemann by
    differencing those Christoffels.  Coordinates are shifted along their
    real direction, so use points where the metric is holomorphic."""
    n = g.dim
    coords = g.chart.coords
    comps = list(g.matrix)

    def gval(pt):
        return evaluate_many(comps, pt, params).reshape(n, n)

    def shifted(pt, i, h):
        q = dict(pt)
        q[coords[i]] = complex(q[coords[i]]) + h
        return q

    def dgval(pt):
        out = np.empty((n, n, n), dtype=complex)
        for l in range(n):
            f = [gval(shifted(pt, l, k * step)) for k in (-2, -1, 1, 2)]
            out[:, :, l] = (f[0] - 8 * f[1] + 8 * f[2] - f[3]) / (12 * step)
        return out

    def gamma(pt):
        return _christoffel(np.linalg.inv(gval(pt)), dgval(pt))

    g0 = gval(point)
    gam = gamma(point)
    dgam = np.empty((n, n, n, n), dtype=complex)
    for e in range(n):
        f = [gamma(shifted(point, e, k * step)) for k in (-2, -1, 1, 2)]
        dgam[..., e] = (f[0] - 8 * f[1] + 8 * f[2] - f[3]) / (12 * step)
    riem = (np.einsum("adbc->abcd", dgam) - np.einsum("acbd->abcd", dgam)
            + np.einsum("ace,edb->abcd", gam, gam) - np.einsum("ade,ecb->abcd", gam, gam))
    ginv = np.linalg.inv(g0)
    ric = np.einsum("abad->bd", riem)
    return Curvature(g0, ginv, gam, riem, ric, complex(np.einsum("bd,bd->", ginv, ric)), dgam)


def metric_compatibility(g: MetricTensor, point, params=None) -> float:
    """sup |nabla_k g_ij| for the Levi-Civita connection at a point."""
    n = g.dim
    D = jet(list(g.matrix), g.chart.coords, point, params, order=1)
    g0, dg = D[0].reshape(n, n), D[1].reshape(n, n, n)
    gam = _christoffel(np.linalg.inv(g0), dg)
    nab = dg - np.einsum("lki,lj->ijk", gam, g0) - np.einsum("lkj,il->ijk", gam, g0)
    return float(np.max(np.abs(nab)))
