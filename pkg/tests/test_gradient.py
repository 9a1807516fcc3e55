import random
from fractions import Fraction

import pytest

from riccilike.curvature import curvature_bundle
from riccilike.exprring import ScalarExpr, parse_expr
from riccilike.frame_tensor import FrameTensor, lie_derivative_metric
from riccilike.gradient import (
    gradient_field,
    gradient_soliton_check,
    hessian,
    hessian_forms,
    laplacian,
)
from riccilike.manifold_input import parse_manifest
from riccilike.reports import PreconditionError
from riccilike.soliton import EXACT, NO_FIT, soliton_fit

from conftest import load, loaded

FLAT_REALIZED = """
dim: 3
n: 1
frame: [e1, e2, e3]
coordinates: {names: [x1, x2, x3]}
frame_realization: [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
metric: [[1, 0, 0], [0, -1, 0], [0, 0, 1]]
phi: [[0, 1, 0], [-1, 0, 0], [0, 0, 0]]
xi: [0, 0, 1]
eta: [0, 0, 1]
functions: {q: x1^2 - x2*x3}
"""


def random_polys(table, count, seed):
    rng = random.Random(seed)
    names = ["x1", "x2", "x3", "sin3", "cos3"]
    out = []
    for _ in range(count):
        f = ScalarExpr.zero(table)
        for _ in range(4):
            term = ScalarExpr.constant(table, Fraction(rng.randint(-5, 5), rng.randint(1, 3)))
            for _ in range(rng.randint(0, 3)):
                term = term * ScalarExpr.symbol(table, rng.choice(names))
            f = f + term
        out.append(f)
    return out


def test_gradient_of_third_coordinate_is_reeb(ex2):
    spec, _ = ex2
    assert gradient_field(parse_expr("x3", spec.table), spec) == spec.xi_vector()


def test_gradient_of_constant_vanishes(ex2):
    spec, _ = ex2
    assert gradient_field(parse_expr("7/2", spec.table), spec).is_zero()


def test_gradient_needs_realization(ex1):
    spec, _ = ex1
    with pytest.raises(PreconditionError):
        gradient_field(ScalarExpr.constant(spec.table, 1), spec)


def test_gradient_is_dual_to_differential(ex2):
    spec, _ = ex2
    for f in random_polys(spec.table, 10, seed=1):
        grad = gradient_field(f, spec)
        for i in range(3):
            e = spec.frame.basis_vector(i)
            assert spec.metric.inner(grad, e) == spec.frame.derive(i, f)


def test_gradient_differs_from_euclidean_sum_in_the_timelike_slot(ex3):
    spec, _ = ex3
    f = spec.function("f")
    grad = gradient_field(f, spec)
    euclid = spec.vector_field("gradf_euclid")
    assert grad[0] == euclid[0] and grad[2] == euclid[2]
    assert grad[1] == -euclid[1] and not grad[1].is_zero()


def test_hessian_symmetric_and_two_forms_agree(ex2):
    spec, bundle = ex2
    for f in random_polys(spec.table, 10, seed=2):
        via_df, via_grad = hessian_forms(f, spec, bundle.conn)
        assert via_df == via_grad
        assert via_df == via_df.permute([1, 0])


def test_half_lie_derivative_of_metric_is_hessian(ex2):
    spec, bundle = ex2
    for f in random_polys(spec.table, 5, seed=3):
        grad = gradient_field(f, spec)
        lg = lie_derivative_metric(grad, bundle.conn, bundle.metric) * Fraction(1, 2)
        assert lg == hessian(f, spec, bundle.conn)


def test_laplacian_is_metric_trace(ex2):
    spec, bundle = ex2
    f = parse_expr("x1^2 + 3*x2^2 - x3^2", spec.table)
    h = hessian(f, spec, bundle.conn)
    G = spec.metric_matrix
    assert laplacian(h, spec) == h[0, 0] * G[0][0] + h[1, 1] * G[1][1] + h[2, 2] * G[2][2]
    # coordinate Laplace-Beltrami; the coordinate metric has constant determinant here
    A, Ginv = spec.realization, spec.metric.Ginv
    coord_lap = ScalarExpr.zero(spec.table)
    for a in range(3):
        for b in range(3):
            g_ab = sum((A[i][a] * A[j][b] * Ginv[i][j] for i in range(3) for j in range(3)), ScalarExpr.zero(spec.table))
            coord_lap = coord_lap + (g_ab * f.partial(b)).partial(a)
    assert laplacian(h, spec) == coord_lap


def test_hessian_of_constant_vanishes(ex2):
    spec, bundle = ex2
    assert hessian(ScalarExpr.constant(spec.table, 3), spec, bundle.conn).is_zero()


@pytest.mark.parametrize("t", [Fraction(-1, 3), 0, 5, Fraction(7, 2)])
def test_vertical_function_is_gradient_soliton(t):
    spec, bundle = loaded("example3", t=t)
    report = gradient_soliton_check(spec.function("h"), spec, bundle, "h")
    assert report.fit.status == EXACT
    assert report.fit.values() == (0, t, -t - 2)
    assert all(c.passed for c in report.checks), [c.line() for c in report.checks if not c.passed]
    assert report.trivial == (t == 0)
    assert report.accepted == (t != 0)


def test_fixture_function_is_not_a_gradient_soliton(ex3):
    spec, bundle = ex3
    report = gradient_soliton_check(spec.function("f"), spec, bundle, "f")
    assert report.fit.status == NO_FIT
    assert report.fit.witness[:2] == (0, 2)
    assert not report.accepted
    assert report.laplacian == 0
    passed = {c.name: c.passed for c in report.checks}
    assert passed["1/2 L_grad g = Hess"] and passed["Hess symmetric"]


def test_euclidean_gradient_field_is_a_non_gradient_soliton(ex3):
    spec, bundle = ex3
    fit = soliton_fit(spec.vector_field("gradf_euclid"), spec, bundle)
    assert fit.values() == (Fraction(3, 2), Fraction(-1, 3), -Fraction(3, 2) + Fraction(1, 3) - 2)


def test_constant_function_is_flagged_trivial(ex2):
    spec, bundle = ex2
    report = gradient_soliton_check(ScalarExpr.constant(spec.table, 4), spec, bundle, "c")
    assert report.trivial and not report.accepted
    assert report.fit.values() == (0, 0, -2)
    assert any("trivial" in w for w in report.warnings)


def test_non_sasaki_spec_restricts_checks():
    spec = parse_manifest(FLAT_REALIZED)
    bundle = curvature_bundle(spec)
    report = gradient_soliton_check(spec.function("q"), spec, bundle, "q")
    assert any("not Sasaki-like" in w for w in report.warnings)
    names = {c.name for c in report.checks}
    assert "tau = 2n" not in names
    assert report.laplacian == 2


def test_report_serialises(ex3):
    spec, bundle = ex3
    d = gradient_soliton_check(spec.function("h"), spec, bundle, "h").to_dict()
    assert d["accepted"] and d["grad"] == ["0", "0", "-1/3"]
