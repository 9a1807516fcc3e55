import random

import pytest
import yaml

from riccilike.acbm import with_phi
from riccilike.exprring import ScalarExpr, parse_expr
from riccilike.manifold_input import (
    ManifestError,
    associated_metric,
    dump_manifest,
    parse_manifest,
    validate_structure,
)

from conftest import load, manifest_path

FLAT_DOC = yaml.safe_load(manifest_path("flat").read_text())


def doc_with(**changes):
    d = dict(FLAT_DOC)
    d.update(changes)
    return d


def test_first_example_parses():
    spec = load("example1")
    assert spec.dim == 5 and spec.n == 2
    assert spec.params == {"p": 1, "q": 2}


def test_second_example_binds_circular_pair_to_third_coordinate():
    spec = load("example2")
    assert spec.dim == 3 and spec.n == 1
    assert spec.table.circular_pairs == (("sin3", "cos3", 2),)
    assert spec.realization is not None


@pytest.mark.parametrize("name, params", [("example1", {}), ("example1", {"p": 0, "q": 0}), ("example2", {}), ("example3", {}), ("flat", {})])
def test_valid_manifests_are_accepted(name, params):
    report = validate_structure(load(name, **params))
    assert report.accepted, [c.line() for c in report.failed()]


def test_realized_brackets_are_checked():
    report = validate_structure(load("example2"))
    assert report["realization_brackets"].passed
    assert report["realization_invertible"].passed


def test_broken_jacobi_rejected_with_indices():
    report = validate_structure(load("broken_jacobi"))
    assert not report.accepted
    jac = report["jacobi"]
    assert not jac.passed
    assert jac.residual.startswith("[0,1,2,")


def test_wrong_reeb_norm_fails_signature():
    spec = parse_manifest(doc_with(metric=[[1, 0, 0], [0, -1, 0], [0, 0, -1]]))
    report = validate_structure(spec)
    assert not report["signature"].passed
    assert not report.accepted


def test_flat_parses_and_validates():
    spec = parse_manifest(FLAT_DOC)
    assert validate_structure(spec).accepted
    assert all(x == 0 for plane in spec.structure_constants for row in plane for x in row)


def test_brackets_filled_by_antisymmetry():
    spec = load("example2")
    c = spec.structure_constants
    assert c[2][0][1] == 1 and c[0][2][1] == -1
    assert c[2][1][0] == -1 and c[1][2][0] == 1


def test_parameter_override():
    spec = load("example2", c1=5)
    assert spec.params["c1"] == 5 and spec.params["c2"] == 2


@pytest.mark.parametrize(
    "changes, field",
    [
        ({"dim": 5}, "dim"),
        ({"colour": "red"}, "colour"),
        ({"brackets": [{"i": 0, "j": 3, "k": 1, "coeff": 1}]}, "brackets[0].j"),
        ({"brackets": [{"i": "e1", "j": "e9", "k": "e2", "coeff": 1}]}, "brackets[0].j"),
        ({"brackets": [{"i": 0, "j": 1, "k": 2, "coeff": 1}, {"i": 0, "j": 1, "k": 2, "coeff": 2}]}, "brackets[1]"),
        ({"metric": [[0.5, 0, 0], [0, -1, 0], [0, 0, 1]]}, "metric"),
        ({"metric": [[1, 0], [0, 1]]}, "metric"),
        ({"functions": {"f": "x1"}}, "functions.f"),
        ({"vector_fields": {"xi": [0, 0, 1]}}, "vector_fields.xi"),
    ],
)
def test_manifest_errors_name_the_field(changes, field):
    with pytest.raises(ManifestError) as err:
        parse_manifest(doc_with(**changes))
    assert err.value.field.startswith(field)


def test_missing_field():
    d = dict(FLAT_DOC)
    del d["phi"]
    with pytest.raises(ManifestError, match="phi"):
        parse_manifest(d)


def test_yaml_syntax_error_reports_line():
    with pytest.raises(ManifestError) as err:
        parse_manifest("dim: 3\nn: 1\nframe: [e1, e2\nmetric: 1\n")
    assert err.value.field.startswith("line")


def test_unknown_symbol_in_expression():
    text = manifest_path("example3").read_text().replace("t*x3\n", "t*x4\n", 1)
    with pytest.raises(Exception, match="x4"):
        parse_manifest(text)


@pytest.mark.parametrize("name", ["example1", "example2", "example3", "flat", "broken_jacobi"])
def test_round_trip(name):
    spec = load(name)
    again = parse_manifest(dump_manifest(spec))
    assert dump_manifest(again) == dump_manifest(spec)
    assert again.structure_constants == spec.structure_constants
    assert again.metric_matrix == spec.metric_matrix
    assert again.vector_fields == spec.vector_fields
    assert again.functions == spec.functions
    assert again.realization == spec.realization


def _random_poly(table, rng):
    names = ["x1", "x2", "x3", "sin3", "cos3"]
    f = ScalarExpr.zero(table)
    for _ in range(4):
        term = ScalarExpr.constant(table, rng.randint(-3, 3))
        for _ in range(rng.randint(0, 3)):
            term = term * ScalarExpr.symbol(table, rng.choice(names))
        f = f + term
    return f


def test_frame_derivation_commutator_matches_brackets():
    spec = load("example2")
    frame, c = spec.frame, spec.structure_constants
    rng = random.Random(11)
    for _ in range(10):
        f = _random_poly(spec.table, rng)
        for i in range(3):
            for j in range(3):
                lhs = frame.derive(i, frame.derive(j, f)) - frame.derive(j, frame.derive(i, f))
                rhs = sum((frame.derive(k, f) * c[i][j][k] for k in range(3)), ScalarExpr.zero(spec.table))
                assert lhs == rhs


def test_associated_metric_entries():
    spec = load("example2")
    gt = associated_metric(spec)
    assert gt[0, 1] == -1 and gt[1, 0] == -1 and gt[2, 2] == 1
    assert gt[0, 0] == 0 and gt[1, 1] == 0
    xi = spec.xi_vector()
    assert gt.insert(0, xi) == spec.eta_form()
    spec1 = load("example1")
    assert associated_metric(spec1)[1, 3] == -1


def test_associated_metric_is_b_metric():
    for name in ("example1", "example2"):
        spec = load(name)
        gt = associated_metric(spec)
        phi = spec.phi_tensor()
        assert gt == gt.permute([1, 0])
        assert with_phi(with_phi(gt, 0, phi), 1, phi) == -gt + spec.eta_eta()


def test_parse_expr_rejects_params_clashing_with_symbols():
    text = manifest_path("example2").read_text().replace("params: {c1: 1", "params: {x1: 1, c1: 1")
    with pytest.raises(ManifestError, match="params"):
        parse_manifest(text)
    assert parse_expr("c1", load("example2").table, {"c1": 3}) == 3
