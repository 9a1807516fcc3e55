import pytest

from riccilike.acbm import (
    fundamental_tensor,
    sasaki_consequence_suite,
    sasaki_like_test,
    sasaki_residual,
)
from riccilike.frame_tensor import FrameTensor
from riccilike.reports import PreconditionError

from conftest import loaded


@pytest.mark.parametrize("params", [{}, {"p": 0, "q": 0}, {"p": -3, "q": 7}])
def test_first_example_is_sasaki_like(params):
    spec, bundle = loaded("example1", **params)
    report = sasaki_like_test(spec, bundle=bundle)
    assert report.is_sasaki_like
    assert report.failed_identity_list == []


def test_second_example_is_sasaki_like(ex2):
    spec, bundle = ex2
    report = sasaki_like_test(spec, bundle=bundle)
    assert report.is_sasaki_like and report.failed_identity_list == []
    # the consequence identities ran too
    names = {c.name for c in report.checks}
    assert {"R(x,y)xi", "rho(xi,xi)=2n", "nabla_xi_eq_-phi"} <= names


def test_flat_is_not_sasaki_like(flat):
    spec, bundle = flat
    report = sasaki_like_test(spec, bundle=bundle)
    assert not report.is_sasaki_like
    assert not report.residual.is_zero()
    assert report.failed_identity_list == ["sasaki_like_condition"]
    # structural symmetries of F still hold
    assert all(c.passed for c in report.checks if c.name.startswith(("F_", "nabla_eta")))


def test_fundamental_tensor_form_first_example(ex1):
    spec, bundle = ex1
    F = fundamental_tensor(spec, bundle.conn)
    G, eta = spec.metric_matrix, spec.eta
    expected = FrameTensor.from_function(
        "ddd", spec.dim, spec.table,
        lambda x, y, z: -G[x][y] * eta[z] - G[x][z] * eta[y] + 2 * eta[x] * eta[y] * eta[z],
    )
    assert F == expected


def test_fundamental_tensor_second_example(ex2):
    spec, bundle = ex2
    F = fundamental_tensor(spec, bundle.conn)
    assert F[2, 2, 2] == 0
    assert F == F.permute([0, 2, 1])


def test_residual_shape(ex2):
    spec, bundle = ex2
    r = sasaki_residual(spec, bundle.conn)
    assert r.variance == "dud" and r.is_zero()


@pytest.mark.parametrize("name", ["example1", "example2"])
def test_consequence_suite(name):
    spec, bundle = loaded(name)
    report = sasaki_consequence_suite(bundle)
    assert report.accepted, [c.line() for c in report.failed()]
    assert len(report.checks) == 12


def test_consequence_suite_values(ex1, ex2):
    # tau* from tau~ = -tau* + 2n
    assert ex1[1].tau_star == 0
    spec, bundle = ex2
    assert spec.frame.derivative_form(bundle.tau).insert(0, spec.xi_vector()).value() == 0
    Q_e1 = bundle.ricci_operator(spec.frame.basis_vector(0))
    assert spec.apply_phi(Q_e1).is_zero()
    assert bundle.ricci_operator(spec.apply_phi(spec.frame.basis_vector(0))).is_zero()


def test_consequence_suite_refuses_non_sasaki(flat):
    with pytest.raises(PreconditionError):
        sasaki_consequence_suite(flat[1])


def test_report_lines(flat):
    spec, bundle = flat
    lines = sasaki_like_test(spec, bundle=bundle).lines()
    assert lines[0] == "verdict: not Sasaki-like"
    assert lines[1].startswith("defining residual [")
