import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from conftest import holo_points, null_points
from ewreduce import recursion as R
from ewreduce.scalar import DomainError, Params, evaluate, t, u, w, wt

P = Params.euclidean(alpha=-0.6)
F = R.FLAT_F
PTS = holo_points(4)

coef = st.floats(-2, 2, allow_nan=False)


def _dF(a, b, c):
    return a * sp.sin(w * u) + b * wt ** 2 * sp.exp(u) + c * w * wt * u ** 2


@given(coef, coef, coef, coef, coef, coef)
def test_linearization_is_additive(a1, b1, c1, a2, b2, c2):
    f, g = _dF(a1, b1, c1), _dF(a2, b2, c2)
    for pt in PTS[:2]:
        lhs = R.linearized_residual(F, f + g, pt, P)
        rhs = R.linearized_residual(F, f, pt, P) + R.linearized_residual(F, g, pt, P)
        assert abs(lhs - rhs) < 1e-12 * max(1, abs(lhs))


def test_linearization_matches_finite_difference():
    dF = _dF(1, 0.5, -0.3)
    for pt in PTS:
        assert abs(R.linearized_residual(F, dF, pt, P) - R.linearized_fd(F, dF, pt, P)) < 1e-4


def test_printed_operator_agrees_only_at_eta_one():
    dF = _dF(1, 0.5, -0.3)
    pt = PTS[0]
    p0 = Params.euclidean(alpha=0.0)
    F0 = 2 * (w + wt)
    gap0 = evaluate(R.printed_linear_operator(F0, dF) - R.linearized_expression(F0, dF), pt, p0)
    assert abs(gap0) < 1e-12
    gap = evaluate(R.printed_linear_operator(F, dF) - R.linearized_expression(F, dF), pt, P)
    assert abs(gap) > 1e-3


def test_linearized_requires_solution():
    with pytest.raises(DomainError):
        R.linearized_residual(w * wt * u, u, PTS[0], P)


def test_seeds_and_images_in_kernel():
    for expr in list(R.SEEDS.values()) + R.FLAT_IMAGES:
        for pt in PTS:
            assert abs(R.linearized_residual(F, expr, pt, P)) < 1e-12


def test_second_pair_passes_recursion():
    dF, RdF = R.FLAT_PAIRS[1]
    for pt in PTS:
        r = R.recursion_residual(F, dF, RdF, pt, P)
        assert abs(r["r1"]) < 1e-9 and abs(r["r2"]) < 1e-9


def test_kernel_closure_under_passing_pairs():
    for dF, RdF in R.FLAT_PAIRS:
        res = [R.recursion_residual(F, dF, RdF, pt, P) for pt in PTS]
        if all(abs(r["r1"]) < 1e-9 and abs(r["r2"]) < 1e-9 for r in res):
            assert max(abs(R.linearized_residual(F, RdF, pt, P)) for pt in PTS) < 1e-9


def test_first_pair_image_is_outside_the_kernel():
    # characterisation of the analysed failure: r2 holds, r1 = 2 e^{m u}
    dF, RdF = R.FLAT_PAIRS[0]
    for pt in PTS:
        r = R.recursion_residual(F, dF, RdF, pt, P)
        assert abs(r["r2"]) < 1e-12
        assert abs(r["r1"] - 2 * np.exp(P.m * pt[u])) < 1e-12


def test_consistency_vanishes_on_kernel_only():
    for seed in R.SEEDS.values():
        assert max(R.consistency_check(F, seed, pt, P) for pt in PTS) < 1e-10
    assert max(R.consistency_check(F, _dF(1, 1, 1), pt, P) for pt in PTS) > 1e-3


def test_four_d_link_on_kernel_elements():
    for expr in [R.SEEDS["exp(m u)"]] + R.FLAT_IMAGES:
        for pt in null_points(3):
            assert abs(R.four_d_residual(expr, pt, P)) < 1e-8
    assert abs(R.four_d_residual(_dF(1, 1, 1), null_points(1)[0], P)) > 1e-4


def test_hierarchy_levels():
    levels = R.hierarchy(F, 3, PTS, P)
    assert [lv.label for lv in levels] == ["T0", "T1", "T2", "T3"]
    assert levels[0].recursion is None
    for lv in levels:
        assert lv.linearized < 1e-9
        if lv.recursion:
            assert max(lv.recursion.values()) < 1e-9


def test_hierarchy_limits():
    with pytest.raises(R.UnsupportedDepth):
        R.hierarchy(F, R.MAX_DEPTH + 1, PTS, P)
    with pytest.raises(R.UnsupportedDepth):
        R.hierarchy(F * 2, 1, PTS, P)
    with pytest.raises(DomainError):
        R.hierarchy(F, -1, PTS, P)


def test_null_tetrad_nondegenerate():
    nt = R.null_tetrad(F)
    rng = np.random.default_rng(0)
    for pt in PTS:
        q = dict(pt)
        q[t] = complex(*rng.uniform(-0.5, 0.5, 2))
        assert abs(nt.volume(q, P)) > 1e-6
