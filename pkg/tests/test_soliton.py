import itertools
from fractions import Fraction

import pytest

from riccilike.exprring import parse_expr
from riccilike.frame_tensor import FrameTensor, lie_derivative_metric
from riccilike.manifold_input import associated_metric
from riccilike.reports import PreconditionError
from riccilike.soliton import (
    EXACT,
    FUNCTION,
    NO_FIT,
    einstein_fit_for,
    einstein_like_fit,
    einstein_like_relations,
    fit_three,
    predicted_xi_soliton,
    soliton_fit,
    xi_soliton_bridge,
    soliton_identity_suite,
)

from conftest import loaded


def basis(spec):
    return spec.metric_tensor(), associated_metric(spec), spec.eta_eta()


def test_einstein_fit_first_example(ex1):
    spec, bundle = ex1
    fit = einstein_fit_for(spec, bundle)
    assert fit.status == EXACT and fit.values() == (0, 0, 4)
    assert "eta-Einstein" in fit.labels and "Einstein" not in fit.labels
    assert fit.residual.is_zero()


def test_einstein_fit_second_example(ex2):
    fit = einstein_fit_for(*ex2)
    assert fit.values() == (0, 0, 2)


def test_einstein_fit_of_metric_itself(ex2):
    spec, _ = ex2
    g, gt, ee = basis(spec)
    fit = einstein_like_fit(g, g, gt, ee)
    assert fit.values() == (1, 0, 0)
    assert fit.labels == ["Einstein-like", "eta-Einstein", "Einstein"]


def test_no_fit_gives_witness(ex2):
    spec, _ = ex2
    g, gt, ee = basis(spec)
    target = g + FrameTensor.from_function("dd", 3, spec.table, lambda i, j: parse_expr("cos3", spec.table) if (i, j) == (0, 2) else 0)
    fit = einstein_like_fit(target, g, gt, ee)
    assert fit.status == NO_FIT
    assert fit.witness == (0, 2, "cos3")
    assert fit.coefficients is None


def test_rank_deficient_basis(ex2):
    spec, _ = ex2
    g, _, ee = basis(spec)
    fit = fit_three(g * 2, [g, g, ee], ("a", "b", "c"))
    assert fit.status == NO_FIT and fit.witness is None
    assert fit.affine_dimension == 1


def test_function_fit(ex2):
    spec, _ = ex2
    g, gt, ee = basis(spec)
    x1 = parse_expr("x1", spec.table)
    fit = einstein_like_fit(g * x1 + ee * 3, g, gt, ee)
    assert fit.status == FUNCTION
    assert fit.coefficients == (x1, 0, 3)
    assert fit.residual.is_zero()
    assert "almost Einstein-like" in fit.labels


def test_function_fit_refuses_circular_coefficients(ex2):
    spec, _ = ex2
    g, gt, ee = basis(spec)
    fit = einstein_like_fit(g * parse_expr("cos3", spec.table), g, gt, ee)
    assert fit.status == NO_FIT


def test_xi_soliton_first_example(ex1):
    spec, bundle = ex1
    fit = soliton_fit(spec.xi_vector(), spec, bundle)
    assert fit.values() == (0, 1, -5)
    assert all(c.passed for c in fit.checks)


@pytest.mark.parametrize("c1, c2, c3", [(0, 0, 0), (1, 2, 3), (Fraction(-1, 2), 4, Fraction(7, 3)), (5, -5, 0)])
def test_potential_soliton_second_example(c1, c2, c3):
    spec, bundle = loaded("example2", c1=c1, c2=c2, c3=c3)
    fit = soliton_fit(spec.vector_field("v"), spec, bundle)
    assert fit.status == EXACT
    assert fit.values() == (c1, c2 + c3, -c1 - c2 - c3 - 2)


def test_zero_potential(ex2):
    spec, bundle = ex2
    fit = soliton_fit(FrameTensor.zeros("u", 3, spec.table), spec, bundle)
    assert fit.values() == (0, 0, -2)
    assert "eta-Ricci soliton" in fit.labels


@pytest.mark.parametrize("name", ["v", "xi", "v_shifted"])
def test_fit_soundness(ex2, name):
    spec, bundle = ex2
    v = spec.vector_field(name)
    fit = soliton_fit(v, spec, bundle)
    if fit.status != EXACT:
        return
    lam, mu, nu = fit.values()
    g, gt, ee = basis(spec)
    lhs = lie_derivative_metric(v, bundle.conn, bundle.metric) * Fraction(1, 2) + bundle.ricci + g * lam + gt * mu + ee * nu
    assert lhs.is_zero()


def test_perturbed_potential_has_no_fit(ex2):
    spec, bundle = ex2
    fit = soliton_fit(spec.vector_field("v_shifted"), spec, bundle)
    assert fit.status == NO_FIT
    i, j, mono = fit.witness
    assert (i, j) in {(1, 2), (2, 1), (0, 2), (2, 0)}
    assert not fit.residual.is_zero()


def test_bridge_first_example(ex1):
    spec, bundle = ex1
    bridge = xi_soliton_bridge(soliton_fit(spec.xi_vector(), spec, bundle), einstein_fit_for(spec, bundle), spec.n)
    assert bridge.report.accepted
    assert bridge.cases == ["(iii)"]


def test_predicted_xi_soliton(ex2):
    spec, bundle = ex2
    einstein = einstein_fit_for(spec, bundle)
    assert predicted_xi_soliton(einstein) == (0, 1, -3)
    assert soliton_fit(spec.xi_vector(), spec, bundle).values() == (0, 1, -3)


@pytest.mark.parametrize(
    "soliton, einstein, n, cases",
    [
        ((-4, 1, -1), (4, 0, 0), 2, ["(iii)", "(iv)"]),
        ((-2, 0, 0), (2, 1, -1), 1, ["(i)", "(ii)"]),
        ((3, 0, -5), (-3, 1, 4), 1, ["(i)"]),
    ],
)
def test_bridge_synthetic(soliton, einstein, n, cases):
    bridge = xi_soliton_bridge(soliton, einstein, n)
    assert bridge.report.accepted
    assert bridge.cases == cases


def test_bridge_detects_mismatch():
    bridge = xi_soliton_bridge((0, 1, -5), (0, 0, 3), 2)
    assert not bridge.report.accepted
    assert not bridge.report["c + nu + 1 = 0"].passed


def test_bridge_needs_constant_fits(ex2):
    spec, bundle = ex2
    bad = soliton_fit(spec.vector_field("v_shifted"), spec, bundle)
    with pytest.raises(PreconditionError):
        xi_soliton_bridge(bad, einstein_fit_for(spec, bundle), 1)


@pytest.mark.parametrize("name, potential", [("example2", "v"), ("example1", "xi"), ("example2", "xi")])
def test_theorem_suite(name, potential):
    spec, bundle = loaded(name)
    v = spec.vector_field(potential)
    report = soliton_identity_suite(v, spec, bundle, soliton_fit(v, spec, bundle))
    assert report.accepted, [c.line() for c in report.failed()]
    assert "(L_v nabla)(x, xi) = -2 Q phi x" in {c.name for c in report.checks}


def test_theorem_suite_zero_potential(ex2):
    spec, bundle = ex2
    zero = FrameTensor.zeros("u", 3, spec.table)
    fit = soliton_fit(zero, spec, bundle)
    report = soliton_identity_suite(zero, spec, bundle, fit)
    assert report.accepted
    assert sum(fit.values()) == -2


def test_theorem_suite_with_other_parameters():
    for c in itertools.product([0, 2], [-1, 3], [Fraction(1, 2)]):
        spec, bundle = loaded("example2", c1=c[0], c2=c[1], c3=c[2])
        v = spec.vector_field("v")
        assert soliton_identity_suite(v, spec, bundle, soliton_fit(v, spec, bundle)).accepted


def test_theorem_suite_preconditions(ex2, flat):
    spec, bundle = ex2
    bad = spec.vector_field("v_shifted")
    with pytest.raises(PreconditionError):
        soliton_identity_suite(bad, spec, bundle, soliton_fit(bad, spec, bundle))
    fspec, fbundle = flat
    xi = fspec.xi_vector()
    with pytest.raises(PreconditionError):
        soliton_identity_suite(xi, fspec, fbundle, soliton_fit(xi, fspec, fbundle))


@pytest.mark.parametrize("name", ["example1", "example2"])
def test_einstein_relations(name):
    spec, bundle = loaded(name)
    report = einstein_like_relations(einstein_fit_for(spec, bundle), bundle)
    assert report.accepted, [c.line() for c in report.failed()]


def test_fit_serialisation(ex2):
    spec, bundle = ex2
    d = soliton_fit(spec.vector_field("v_shifted"), spec, bundle).to_dict()
    assert d["status"] == NO_FIT and set(d["witness"]) == {"i", "j", "monomial"}
    d = soliton_fit(spec.xi_vector(), spec, bundle).to_dict()
    assert d["coefficients"] == {"lambda": "0", "mu": "1", "nu": "-3"}
