import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from conftest import euclid_points
from ewreduce import catalog
from ewreduce import twodim as T
from ewreduce.reduction import alter_to_euclid, alterform_expression, euclid_expression
from ewreduce.scalar import DomainError, J, Params, evaluate, j, v, w, wb, xi
from ewreduce.weyl import ew_residual

P = Params.euclidean(alpha=-0.6)

coef = st.floats(-2, 2, allow_nan=False)


def _f2(a, b, c):
    return a * sp.sin(xi + v) + b * sp.exp(xi / 2) * v ** 2 + c * xi ** 3 * sp.cos(v)


@given(coef, coef, coef, coef, coef, coef, coef, coef)
def test_flinear_is_linear(a1, b1, c1, a2, b2, c2, s, t):
    f, g = _f2(a1, b1, c1), _f2(a2, b2, c2)
    pt = {xi: 0.2, v: -0.3}
    lhs = T.residual_2d("flinear", s * f + t * g, P, pt)
    rhs = s * T.residual_2d("flinear", f, P, pt) + t * T.residual_2d("flinear", g, P, pt)
    assert abs(lhs - rhs) < 1e-12 * max(1, abs(lhs))


def test_flinear_constants_solve():
    assert T.residual_2d("flinear", sp.Integer(3), P, {xi: 0.1, v: 0.2}) == 0


@given(st.integers(-3, 3), st.integers(-3, 3), st.floats(-1, 1))
def test_hypercr_equals_euclid_at_alpha_zero(a, b, k):
    p0 = Params.euclidean(alpha=0.0)
    F = (2 + w * wb) * sp.exp(k * v) + a * sp.sin(v) * w + b * wb ** 2 * sp.cos(2 * v)
    for pt in euclid_points(3):
        assert abs(T.residual_2d("hypercr", F, p0, pt) - evaluate(euclid_expression(F), pt, p0)) < 1e-12


@pytest.mark.parametrize("alpha", [0.0, -0.6, -1.3])
def test_rjv_and_mequation_related_by_substitution(alpha):
    p = Params.euclidean(alpha=alpha)
    Rf = sp.sin(J) * v ** 2 / 3 + sp.exp(-J * v / 4) + J ** 2 / 5
    Mf = T.m_from_r(Rf)
    rng = np.random.default_rng(1)
    for _ in range(20):
        Jv, vv = rng.uniform(0.5, 1.5), rng.uniform(-1, 1)
        r = T.residual_2d("rjv", Rf, p, {J: Jv, v: vv})
        m = T.residual_2d("mequation", Mf, p, {xi: math.log(Jv), v: vv})
        assert abs(r - m) < 1e-10


def test_x3full_is_alterform_in_log_coordinate():
    g = sp.exp(T.Rc / 3) * sp.cos(v) + T.Rc ** 2 * v
    G = T.x3_to_alter(g)
    for pt in euclid_points(5, seed=2):
        a = evaluate(alterform_expression(G), pt, P)
        x = T.residual_2d("x3full", g, P, {T.Rc: math.log(abs(pt[w]) ** 2), v: pt[v]})
        assert abs(x - abs(pt[w]) ** 2 * a) < 1e-10


def test_x3full_on_rozw2():
    s = math.sin(P.alpha)
    g = sp.exp(v * s) * sp.exp(T.Rc) + 4 * sp.exp(-v * s) / (1 + 3 * s ** 2)
    assert abs(T.residual_2d("x3full", g, P, {T.Rc: 0.3, v: 0.2})) < 1e-12


def test_liouville_rozw1_psi():
    e = catalog.get("rozw1", P)
    for pt in euclid_points(3):
        assert abs(T.residual_2d("liouville", e.fields["Psi"], e.params, pt)) < 1e-12


def test_unknown_kind():
    with pytest.raises(DomainError):
        T.residual_expression("nonsense", w)


def test_toda_chain_requires_alpha():
    with pytest.raises(DomainError):
        T.toda_reduction_chain(w, P, euclid_points(1)[0])


def test_toda_chain_on_solution_and_non_solution():
    p = Params.euclidean(alpha=-math.pi / 2, b=1.3)
    F = alter_to_euclid(catalog.rozw2_G())
    pts = euclid_points(4)
    for pt in pts:
        tp = T.toda_reduction_chain(F, p, pt)
        assert abs(tp.toda_residual) < 1e-10
        # oracle: j = F_v = 2 b e^{2v}, so v_j = 1/(2 j)
        assert abs(tp.v_j - 1 / (2 * tp.j)) < 1e-12
    bad = F + 0.3 * sp.exp(v) * (w * wb) ** 2
    assert max(abs(T.toda_reduction_chain(bad, p, pt).toda_residual) for pt in pts) > 1e-4


def test_lebrun_ward_separable_is_einstein_weyl():
    e = catalog.get("lebrun_ward_separable", P)
    for rep in catalog.check_claims(e, 5):
        assert rep.passed, rep
    s = T.lebrun_ward(e.fields["v"])
    pt = {j: 0.7, w: 0.3 + 0.2j, wb: 0.3 - 0.2j}
    assert ew_residual(s, pt, e.params).sup < 1e-8


def test_lebrun_ward_of_non_solution_is_not_einstein_weyl():
    vf = sp.log(1 + j ** 2) / 2 - sp.log(1 + w * wb)
    pt = {j: 0.7, w: 0.3 + 0.2j, wb: 0.3 - 0.2j}
    assert abs(T.residual_2d("toda", vf, P, pt)) > 1e-3
    assert ew_residual(T.lebrun_ward(vf), pt, P).sup > 1e-4
