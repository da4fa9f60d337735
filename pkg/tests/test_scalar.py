import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from ewreduce.scalar import (ALPHA, COMPLEX, REAL, Chart, DomainError, EvaluationError, Params, differentiate,
                             evaluate, evaluate_many, fd_check, jet, parameter, u, v, w, wb, wt)

COORDS = (w, wt, u)
ATOMS = [sp.sin, sp.cos, sp.exp, lambda e: 1 / (2 + e ** 2), lambda e: e ** 3]


@st.composite
def fields(draw):
    """Smooth random fields in (w, wt, u): sums of products of elementary functions."""
    expr = sp.Integer(0)
    for _ in range(draw(st.integers(1, 3))):
        a, b, c = (draw(st.integers(-3, 3)) for _ in range(3))
        f = ATOMS[draw(st.integers(0, len(ATOMS) - 1))]
        g = ATOMS[draw(st.integers(0, len(ATOMS) - 1))]
        expr += f(a * w + b * u / 2 + 1) * g(c * wt - u / 3)
    return expr


points = st.tuples(*(st.complex_numbers(max_magnitude=0.5, allow_nan=False, allow_infinity=False)
                     for _ in range(3))).map(lambda t: dict(zip(COORDS, t)))


@given(fields(), points, st.sampled_from([(0, 1), (0, 2), (1, 2)]))
def test_mixed_partials_commute(f, pt, pair):
    x, y = COORDS[pair[0]], COORDS[pair[1]]
    gap = evaluate(differentiate(differentiate(f, x), y) - differentiate(differentiate(f, y), x), pt)
    assert abs(gap) < 1e-13


@given(fields(), fields(), points, st.floats(-2, 2), st.floats(-2, 2))
def test_differentiate_is_linear(f, g, pt, a, b):
    lhs = evaluate(differentiate(a * f + b * g, w), pt)
    rhs = a * evaluate(differentiate(f, w), pt) + b * evaluate(differentiate(g, w), pt)
    assert abs(lhs - rhs) < 1e-13 * max(1.0, abs(lhs))


def test_wirtinger_convention():
    assert differentiate(w * wb, w) == wb
    assert differentiate(wb ** 2, w) == 0


def test_differentiate_rejects_parameters_and_bad_order():
    with pytest.raises(DomainError):
        differentiate(ALPHA * w, ALPHA)
    with pytest.raises(DomainError):
        differentiate(w, w, order=0)
    ch = Chart("c", (w, wt), (COMPLEX, COMPLEX))
    with pytest.raises(DomainError):
        differentiate(u * w, u, chart=ch)


def test_fd_check_fourth_order():
    f = sp.exp(w / 2) * sp.sin(3 * w) + w ** 5
    pt = {w: 0.3 + 0.2j}
    gaps = [fd_check(f, w, pt, step=h).gap for h in (1e-2, 5e-3, 2.5e-3)]
    orders = [math.log2(gaps[i] / gaps[i + 1]) for i in range(2)]
    assert all(3.5 < o < 4.5 for o in orders), orders


def test_evaluation_error_names_subtree():
    with pytest.raises(EvaluationError) as exc:
        evaluate(sp.log(w) + 1, {w: 0})
    assert exc.value.subtree is not None and exc.value.subtree.has(w)


def test_unbound_symbol():
    with pytest.raises(DomainError):
        evaluate(w + u, {w: 1.0})


def test_evaluate_many_matches_single():
    exprs = [sp.sin(w), sp.exp(wt) * u, w * wt]
    pt = {w: 0.1 + 0.2j, wt: -0.3, u: 0.5j}
    many = evaluate_many(exprs, pt)
    assert np.allclose(many, [evaluate(e, pt) for e in exprs])


def test_params_relations():
    for a in (0.0, -0.3, -math.pi / 2):
        p = Params.euclidean(alpha=a)
        assert abs(p.m * p.mtilde - 1) < 1e-15
        assert abs((p.m + p.mtilde) / 2 - p.eta) < 1e-15
        assert abs((p.m - p.mtilde) / 2 - p.rho) < 1e-15
    with pytest.raises(DomainError):
        Params.euclidean(alpha=0.5)


def test_params_bind_alpha():
    p = Params.euclidean(alpha=-0.4)
    assert abs(evaluate(sp.sin(ALPHA), {}, p) - math.sin(-0.4)) < 1e-15
    q = p.with_extra(C=0.25)
    assert abs(evaluate(parameter("C") * 2, {}, q) - 0.5) < 1e-15


def test_chart_validation_and_sampling():
    with pytest.raises(DomainError):
        Chart("bad", (w, w))
    with pytest.raises(DomainError):
        Chart("bad", (w, wb, v), (("conj", 1), REAL, REAL))
    ch = Chart("e", (w, wb, v), (("conj", 1), ("conj", 0), REAL))
    pts = ch.sample(20, seed=3, box={"w": (-1, 1), "v": (-2, 2)})
    assert len(pts) == 20
    for p in pts:
        assert p[wb] == p[w].conjugate()
        assert p[v].imag == 0 and -2 <= p[v].real <= 2
    assert pts == ch.sample(20, seed=3, box={"w": (-1, 1), "v": (-2, 2)})


def test_jet_symmetry_and_values():
    f = sp.exp(w) * wt ** 2
    D = jet([f], (w, wt), {w: 0.2, wt: 0.5})
    assert abs(D[1][0, 1] - 2 * 0.5 * math.exp(0.2)) < 1e-14
    assert abs(D[2][0, 0, 1] - D[2][0, 1, 0]) == 0
    assert abs(D[2][0, 1, 1] - 2 * math.exp(0.2)) < 1e-14
