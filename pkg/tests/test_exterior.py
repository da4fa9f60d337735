import itertools

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from conftest import euclid_points
from ewreduce import catalog
from ewreduce.exterior import (DifferentialForm, MetricTensor, VectorField, adjugate, curvature, curvature_fd,
                               det, exterior_d, hodge, hodge_sign, interior, lie_bracket, lie_derivative,
                               metric_compatibility, pullback, wedge)
from ewreduce.heavenly import PlebanskiData, plebanski_metric
from ewreduce.scalar import REAL, Chart, DomainError, Params, evaluate, theta, x, y

X3 = sp.symbols("x1 x2 x3")
CH = Chart("r3", X3, (REAL,) * 3)
PTS = [dict(zip(X3, p)) for p in ([0.3, -0.2, 0.5], [0.1, 0.4, -0.6], [-0.5, 0.2, 0.1])]

polys = st.lists(st.integers(-3, 3), min_size=4, max_size=4)


def _field(c):
    a, b, k, e = c
    x1, x2, x3 = X3
    return a * sp.sin(x1 * x2) + b * sp.exp(x3 - x1) + k * x1 ** 2 * x3 + e * sp.cos(x2 + 2 * x3)


fields = polys.map(_field)


@given(st.lists(fields, min_size=3, max_size=3), st.sampled_from([0, 1]))
def test_d_squared_vanishes(cs, degree):
    if degree == 0:
        form = DifferentialForm.function(CH, cs[0])
    else:
        form = DifferentialForm.one_form(CH, cs)
    dd = exterior_d(exterior_d(form))
    assert all(dd.sup(p) < 1e-11 for p in PTS)


@given(st.lists(fields, min_size=9, max_size=9))
def test_jacobi_identity(cs):
    X, Y, Z = (VectorField(CH, cs[3 * i:3 * i + 3]) for i in range(3))
    J = lie_bracket(X, lie_bracket(Y, Z)) + lie_bracket(Y, lie_bracket(Z, X)) + lie_bracket(Z, lie_bracket(X, Y))
    assert all(np.max(np.abs(J.values(p))) < 1e-11 for p in PTS)


def _metric(signature="euclidean"):
    x1, x2, x3 = X3
    mat = sp.Matrix([[2 + x2 ** 2, x1 / 3, 0], [x1 / 3, 1 + sp.exp(x3) / 2, x2 / 5], [0, x2 / 5, 3]])
    return MetricTensor(CH, mat, signature)


@pytest.mark.parametrize("p", [0, 1, 2, 3])
def test_hodge_involution_sign(p):
    g = _metric()
    comps = {idx: _field([1, -1, 2, 1]) * (i + 1) for i, idx in enumerate(itertools.combinations(range(3), p))}
    beta = DifferentialForm(CH, p, comps)
    twice = hodge(hodge(beta, g), g)
    sign = hodge_sign(g, p)
    for pt in PTS:
        s = evaluate(sign, pt)
        assert abs(s - 1) < 1e-12  # Riemannian, n = 3: ** = +1
        diff = twice - s * beta
        assert diff.sup(pt) < 1e-11


def test_hodge_four_dimensional_sign():
    coords = sp.symbols("y0:4")
    ch = Chart("r4", coords, (REAL,) * 4)
    g = MetricTensor(ch, sp.diag(1 + coords[0] ** 2, 1, 2, 1 + coords[3] ** 2 / 2), "euclidean")
    beta = DifferentialForm(ch, 2, {(0, 1): coords[2], (1, 3): 1})
    twice = hodge(hodge(beta, g), g)
    pt = {c: 0.2 * (i + 1) for i, c in enumerate(coords)}
    assert (twice - beta).sup(pt) < 1e-12  # even degree in 4D Riemannian: +1


def test_det_and_adjugate_against_sympy():
    a = sp.symbols("a0:9")
    M = sp.Matrix(3, 3, a)
    assert sp.expand(det(M) - M.det()) == 0
    assert sp.expand(adjugate(M) - M.adjugate()) == sp.zeros(3, 3)


def test_wedge_and_interior():
    dx = [DifferentialForm.coordinate(CH, c) for c in X3]
    vol = wedge(wedge(dx[0], dx[1]), dx[2])
    assert vol[(0, 1, 2)] == 1 and vol[(1, 0, 2)] == -1
    assert wedge(dx[0], dx[0]).components == {}
    e1 = VectorField(CH, [1, 0, 0])
    assert interior(e1, vol)[(1, 2)] == 1
    with pytest.raises(DomainError):
        exterior_d(vol)


def test_cartan_formula_on_functions_and_forms():
    X = VectorField(CH, [X3[1], -X3[0], X3[2] ** 2])
    f = _field([1, 2, 0, -1])
    assert sp.simplify(lie_derivative(X, DifferentialForm.function(CH, f)).scalar() - X(f)) == 0
    beta = DifferentialForm.one_form(CH, [f, X3[0], 0])
    L = lie_derivative(X, beta)
    # compare with the coordinate formula (L_X b)_i = X(b_i) + b_k d_i X^k
    for i in range(3):
        expected = X(beta[(i,)]) + sum(beta[(k,)] * sp.diff(X.components[k], X3[i]) for k in range(3))
        assert abs(evaluate(L[(i,)] - expected, PTS[0])) < 1e-13


def test_pullback_of_metric_polar_coordinates():
    r, t = sp.symbols("r tt", positive=True)
    polar = Chart("polar", (r, t), (REAL, REAL))
    flat = MetricTensor(Chart("xy", (x, y), (REAL, REAL)), sp.eye(2))
    g = pullback(flat, polar, {x: r * sp.cos(t), y: r * sp.sin(t)})
    assert sp.simplify(g.matrix - sp.diag(1, r ** 2)) == sp.zeros(2, 2)


def test_curvature_matches_finite_difference_oracle():
    g = _metric()
    c = curvature(g, PTS[0])
    o = curvature_fd(g, PTS[0])
    assert np.max(np.abs(c.christoffel - o.christoffel)) < 1e-8
    assert np.max(np.abs(c.riemann - o.riemann)) < 1e-6
    assert abs(c.scalar - o.scalar) < 1e-6


def test_round_sphere_curvature():
    ph = sp.Symbol("ph")
    ch = Chart("s2", (theta, ph), (REAL, REAL))
    g = MetricTensor(ch, sp.diag(1, sp.sin(theta) ** 2))
    c = curvature(g, {theta: 1.0, ph: 0.3})
    assert abs(c.scalar - 2) < 1e-12


def test_metric_compatibility_catalog_metrics():
    p = Params.euclidean(alpha=-0.5)
    flat = plebanski_metric(PlebanskiData(catalog.get("flat4", p).fields["Omega"], p))
    from conftest import null_points
    for pt in null_points(3):
        assert metric_compatibility(flat, pt, p) < 1e-10
    from ewreduce.reduction import altermetric
    for name in ("rozw1", "rozw2"):
        h, _ = altermetric(catalog.get(name, p).fields["G"])
        for pt in euclid_points(3):
            assert metric_compatibility(h, pt, p) < 1e-10
    berger = catalog.berger_structure()
    for pt in catalog.get("berger", p).sample(3):
        assert metric_compatibility(berger.h, pt, p) < 1e-10


def test_vector_field_chart_mismatch():
    other = Chart("other", sp.symbols("q0:3"), (REAL,) * 3)
    with pytest.raises(DomainError):
        VectorField(CH, [1, 0, 0]) + VectorField(other, [1, 0, 0])
    with pytest.raises(DomainError):
        VectorField(CH, [1, 0])
