import numpy as np
import pytest
import sympy as sp

from conftest import euclid_points
from ewreduce import catalog
from ewreduce.exterior import DifferentialForm, MetricTensor
from ewreduce.reduction import altermetric
from ewreduce.scalar import REAL, Chart, DomainError, Params, phi, psi, theta, v, w, wb
from ewreduce.weyl import (WeylStructure, conformal_laplacian, ew_residual, gauge_transform, monopole_closedness,
                           weighted_laplacian, weyl_compatibility_residual, weyl_ricci)

P = Params.euclidean(alpha=-0.5, b=1.2)


def _rozw2():
    return WeylStructure(*altermetric(catalog.rozw2_G()))


def _random_structure():
    X = sp.symbols("x1 x2 x3")
    ch = Chart("r3", X, (REAL,) * 3)
    h = MetricTensor(ch, sp.Matrix([[2 + X[1] ** 2, X[0] / 4, 0], [X[0] / 4, 1, 0], [0, 0, 1 + X[2] ** 2]]))
    nu = DifferentialForm.one_form(ch, [X[1], sp.sin(X[2]), X[0] * X[1]])
    return WeylStructure(h, nu), [dict(zip(X, p)) for p in ([0.2, 0.3, -0.1], [-0.4, 0.1, 0.5])]


def test_chi_symmetric_and_trace_free():
    s, pts = _random_structure()
    for pt in pts:
        r = ew_residual(s, pt)
        assert r.sup > 1e-3  # generic structure is not Einstein-Weyl
        assert r.asymmetry < 1e-11 and r.trace < 1e-11


def test_scalar_relation_two_ways():
    s, pts = _random_structure()
    for pt in pts:
        _, trace, relation = weyl_ricci(s, pt)
        assert abs(trace - relation) < 1e-10


def test_compatibility_residual_and_sensitivity():
    s, pts = _random_structure()
    assert weyl_compatibility_residual(s, pts[0]) < 1e-12
    assert weyl_compatibility_residual(s, pts[0], perturbation={(0, 1, 2): 1e-3}) > 1e-4


@pytest.mark.parametrize("factor", [sp.exp(sp.Symbol("x1") / 3), 2 + sp.Symbol("x2") ** 2,
                                    1 + sp.cos(sp.Symbol("x3")) / 4])
def test_chi_gauge_covariance_generic(factor):
    s, pts = _random_structure()
    t = gauge_transform(s, factor, pts)
    for pt in pts:
        assert np.max(np.abs(ew_residual(s, pt).chi - ew_residual(t, pt).chi)) < 1e-9


@pytest.mark.parametrize("factor", [sp.exp(v / 3), 2 + w * wb, 1 + sp.cos(v) / 4 + w * wb / 5])
def test_ew_zero_preserved_under_gauge(factor):
    s = _rozw2()
    pts = euclid_points(3)
    t = gauge_transform(s, factor, pts, P)
    for pt in pts:
        assert ew_residual(s, pt, P).sup < 1e-12
        assert ew_residual(t, pt, P).sup < 1e-9


def test_berger_gauge_covariance():
    s = catalog.berger_structure()
    pts = catalog.get("berger", P).sample(3)
    t = gauge_transform(s, 1 + sp.sin(theta) ** 2 * sp.cos(phi) ** 2 / 3 + sp.sin(psi) / 5, pts, P)
    for pt in pts:
        assert ew_residual(t, pt, P).sup < 1e-9


def test_gauge_rejects_nonpositive_factor():
    s = _rozw2()
    with pytest.raises(DomainError):
        gauge_transform(s, v - 5, euclid_points(1), P)


def test_weighted_laplacian_reduces_to_conformal_laplacian():
    s = catalog.berger_structure()
    f = sp.sin(theta) * sp.cos(2 * phi) + sp.exp(sp.cos(psi) / 2)
    for pt in catalog.get("berger", P).sample(3):
        a = weighted_laplacian(s, f, -0.5, 0.125, pt, P)
        b = conformal_laplacian(s, f, pt, P)
        # weighted_laplacian returns lhs - rhs, the conformal Laplacian is nabla^2 phi - R phi / 8
        assert abs(a - b) < 1e-10


def test_monopole_closedness_of_constants():
    s = _rozw2()
    pts = euclid_points(2)
    # V = 0 is trivially a monopole
    assert monopole_closedness(s, sp.Integer(0), pts, P) == 0.0
    # a generic V is not
    assert monopole_closedness(s, sp.exp(w * wb + v), pts, P) > 1e-4


def test_nu_degree_and_chart_checked():
    s = _rozw2()
    with pytest.raises(DomainError):
        WeylStructure(s.h, DifferentialForm.function(s.chart, 1))
