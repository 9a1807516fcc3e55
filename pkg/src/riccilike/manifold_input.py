"""Manifold manifests: parsing, validation and the associated B-metric.

A manifest is a YAML (or JSON) mapping with the fields ``dim``, ``n``,
``frame``, ``brackets``, ``metric``, ``phi``, ``xi``, ``eta`` and optionally
``coordinates``, ``frame_realization``, ``vector_fields``, ``functions``,
``params``.  Layout conventions:

* ``brackets`` entries ``{i, j, k, coeff}`` mean ``[e_i, e_j]`` has
  ``coeff`` on ``e_k``; indices are frame names or 0-based positions.  The
  reversed entry ``[e_j, e_i]`` is filled in by antisymmetry unless listed.
* ``phi`` row ``j`` lists the frame components of ``phi(e_j)``.
* ``frame_realization`` row ``i`` lists the coordinate components of
  ``e_i``, i.e. ``e_i = sum_a A[i][a] d/dx^a``.
* ``vector_fields`` give frame components; ``xi`` is always available.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping

import numpy as np
import yaml

from .exprring import ExprSyntaxError, ScalarExpr, SymbolTable, parse_expr, parse_rational
from .frame_tensor import Frame, FrameTensor, MetricData
from .ratlinalg import inertia
from .reports import Check, ValidationReport, check_zero


class ManifestError(ValueError):
    """Input error in a manifest; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass(eq=False)
class ManifoldSpec:
    n: int
    frame_names: tuple[str, ...]
    structure_constants: tuple  # c[i][j][k]
    metric_matrix: tuple  # G[i][j]
    phi_images: tuple  # phi_images[j][k] = (phi e_j)^k
    xi: tuple
    eta: tuple
    table: SymbolTable = field(default_factory=SymbolTable)
    realization: tuple | None = None
    vector_fields: dict[str, tuple[ScalarExpr, ...]] = field(default_factory=dict)
    functions: dict[str, ScalarExpr] = field(default_factory=dict)
    params: dict[str, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        self.frame = Frame(self.table, self.structure_constants, self.realization)
        self._metric: MetricData | None = None

    @property
    def dim(self) -> int:
        return 2 * self.n + 1

    @property
    def metric(self) -> MetricData:
        if self._metric is None:
            self._metric = MetricData.from_matrix(self.metric_matrix)
        return self._metric

    # structure tensors --------------------------------------------------

    def metric_tensor(self) -> FrameTensor:
        return FrameTensor.from_array("dd", self.metric_matrix, self.table)

    def phi_tensor(self) -> FrameTensor:
        """``phi[k, j] = (phi e_j)^k``."""
        return FrameTensor.from_function("ud", self.dim, self.table, lambda k, j: self.phi_images[j][k])

    def xi_vector(self) -> FrameTensor:
        return FrameTensor.from_array("u", self.xi, self.table)

    def eta_form(self) -> FrameTensor:
        return FrameTensor.from_array("d", self.eta, self.table)

    def eta_eta(self) -> FrameTensor:
        return self.eta_form().tensor(self.eta_form())

    def identity(self) -> FrameTensor:
        return FrameTensor.from_function("ud", self.dim, self.table, lambda k, j: int(k == j))

    def vector_field(self, name: str) -> FrameTensor:
        if name == "xi":
            return self.xi_vector()
        try:
            comps = self.vector_fields[name]
        except KeyError:
            raise KeyError(f"no vector field named {name!r}") from None
        return FrameTensor.from_array("u", comps, self.table)

    def function(self, name: str) -> ScalarExpr:
        try:
            return self.functions[name]
        except KeyError:
            raise KeyError(f"no function named {name!r}") from None

    def apply_phi(self, x: FrameTensor) -> FrameTensor:
        return self.phi_tensor().insert(1, x)

    def eta_of(self, x: FrameTensor) -> ScalarExpr:
        return self.eta_form().insert(0, x).value()


# parsing -------------------------------------------------------------------

_REQUIRED = ("dim", "n", "frame", "metric", "phi", "xi", "eta")
_KNOWN = set(_REQUIRED) | {
    "brackets", "coordinates", "frame_realization", "vector_fields", "functions", "params", "name", "description",
}


def _rational(value, where: str) -> Fraction:
    try:
        return parse_rational(value)
    except (ValueError, ZeroDivisionError) as exc:
        raise ManifestError(where, f"not an exact rational: {value!r} ({exc})") from None


def _const(value, where: str, table: SymbolTable, params) -> Fraction:
    if isinstance(value, (int, Fraction)) and not isinstance(value, bool):
        return Fraction(value)
    if isinstance(value, float):
        raise ManifestError(where, f"floating-point value {value!r} is not exact; write 'p/q'")
    try:
        e = parse_expr(str(value), table, params)
    except ExprSyntaxError as exc:
        raise ManifestError(where, str(exc)) from None
    if not e.is_constant():
        raise ManifestError(where, f"expected a rational constant, got {e}")
    return e.constant_value()


def _expr(value, where: str, table: SymbolTable, params) -> ScalarExpr:
    if isinstance(value, float):
        raise ManifestError(where, f"floating-point value {value!r} is not exact")
    try:
        return parse_expr(value if isinstance(value, int) else str(value), table, params)
    except ExprSyntaxError as exc:
        raise ManifestError(where, str(exc)) from None


def _matrix(value, dim: int, where: str, conv) -> tuple:
    if not isinstance(value, list) or len(value) != dim:
        raise ManifestError(where, f"expected {dim} rows")
    rows = []
    for i, row in enumerate(value):
        if not isinstance(row, list) or len(row) != dim:
            raise ManifestError(f"{where}[{i}]", f"expected {dim} entries")
        rows.append(tuple(conv(x, f"{where}[{i}][{j}]") for j, x in enumerate(row)))
    return tuple(rows)


def _vector(value, dim: int, where: str, conv) -> tuple:
    if not isinstance(value, list) or len(value) != dim:
        raise ManifestError(where, f"expected a list of {dim} entries")
    return tuple(conv(x, f"{where}[{i}]") for i, x in enumerate(value))


def _frame_index(value, names: tuple[str, ...], where: str) -> int:
    if isinstance(value, bool):
        raise ManifestError(where, "boolean is not a frame index")
    if isinstance(value, int):
        if not 0 <= value < len(names):
            raise ManifestError(where, f"frame index {value} exceeds dimension {len(names)}")
        return value
    if isinstance(value, str) and value in names:
        return names.index(value)
    raise ManifestError(where, f"unknown frame vector {value!r}")


def _symbol_table(doc) -> SymbolTable:
    coords = doc.get("coordinates")
    if coords is None:
        return SymbolTable()
    if isinstance(coords, list):
        coords = {"names": coords}
    names = coords.get("names", [])
    if not isinstance(names, list):
        raise ManifestError("coordinates.names", "expected a list")
    pairs = []
    for p, entry in enumerate(coords.get("circular", []) or []):
        where = f"coordinates.circular[{p}]"
        try:
            bound = entry["of"]
            sin_name, cos_name = entry["sin"], entry["cos"]
        except (KeyError, TypeError):
            raise ManifestError(where, "needs keys 'sin', 'cos', 'of'") from None
        if bound not in names:
            raise ManifestError(where, f"unknown coordinate {bound!r}")
        pairs.append((str(sin_name), str(cos_name), names.index(bound)))
    try:
        return SymbolTable(tuple(str(n) for n in names), tuple(pairs))
    except ValueError as exc:
        raise ManifestError("coordinates", str(exc)) from None


def parse_manifest(document: str | Mapping[str, Any], params: Mapping[str, Any] | None = None) -> ManifoldSpec:
    """Build a :class:`ManifoldSpec` from manifest text or an already-loaded mapping.

    ``params`` override the manifest's own ``params`` block.
    """
    if isinstance(document, str):
        try:
            doc = yaml.safe_load(document)
        except yaml.YAMLError as exc:
            mark = getattr(exc, "problem_mark", None)
            loc = f"line {mark.line + 1}" if mark is not None else "document"
            raise ManifestError(loc, f"syntax error: {getattr(exc, 'problem', exc)}") from None
    else:
        doc = dict(document)
    if not isinstance(doc, dict):
        raise ManifestError("document", "top level must be a mapping")
    for key in _REQUIRED:
        if key not in doc:
            raise ManifestError(key, "missing required field")
    unknown = set(doc) - _KNOWN
    if unknown:
        raise ManifestError(sorted(unknown)[0], "unknown field")

    merged = {str(k): _rational(v, f"params.{k}") for k, v in (doc.get("params") or {}).items()}
    for k, v in (params or {}).items():
        merged[str(k)] = _rational(v, f"params.{k}")

    n = doc["n"]
    dim = doc["dim"]
    if not isinstance(n, int) or n < 1:
        raise ManifestError("n", "must be a positive integer")
    if dim != 2 * n + 1:
        raise ManifestError("dim", f"dim {dim} != 2n+1 = {2 * n + 1}")
    frame = doc["frame"]
    if not isinstance(frame, list) or len(frame) != dim:
        raise ManifestError("frame", f"expected {dim} frame names")
    names = tuple(str(f) for f in frame)
    if len(set(names)) != dim:
        raise ManifestError("frame", "frame names must be unique")

    table = _symbol_table(doc)
    overlap = set(merged) & set(table.names)
    if overlap:
        raise ManifestError("params", f"parameter names clash with symbols: {sorted(overlap)}")
    const = lambda v, w: _const(v, w, table, merged)  # noqa: E731
    expr = lambda v, w: _expr(v, w, table, merged)  # noqa: E731

    c = [[[Fraction(0)] * dim for _ in range(dim)] for _ in range(dim)]
    listed = set()
    for b, entry in enumerate(doc.get("brackets") or []):
        where = f"brackets[{b}]"
        if not isinstance(entry, dict) or set(entry) != {"i", "j", "k", "coeff"}:
            raise ManifestError(where, "expected keys i, j, k, coeff")
        i = _frame_index(entry["i"], names, where + ".i")
        j = _frame_index(entry["j"], names, where + ".j")
        k = _frame_index(entry["k"], names, where + ".k")
        if (i, j, k) in listed:
            raise ManifestError(where, "duplicate bracket entry")
        listed.add((i, j, k))
        c[i][j][k] = const(entry["coeff"], where + ".coeff")
    for i, j, k in list(listed):
        if (j, i, k) not in listed:
            c[j][i][k] = -c[i][j][k]
    structure = tuple(tuple(tuple(row) for row in plane) for plane in c)

    metric = _matrix(doc["metric"], dim, "metric", const)
    phi = _matrix(doc["phi"], dim, "phi", const)
    xi = _vector(doc["xi"], dim, "xi", const)
    eta = _vector(doc["eta"], dim, "eta", const)

    realization = None
    if doc.get("frame_realization") is not None:
        if not table.coordinates:
            raise ManifestError("frame_realization", "requires a coordinates block")
        m = table.n_coordinates
        rows = doc["frame_realization"]
        if not isinstance(rows, list) or len(rows) != dim:
            raise ManifestError("frame_realization", f"expected {dim} rows")
        realization = []
        for i, row in enumerate(rows):
            if not isinstance(row, list) or len(row) != m:
                raise ManifestError(f"frame_realization[{i}]", f"expected {m} entries")
            realization.append(tuple(expr(x, f"frame_realization[{i}][{a}]") for a, x in enumerate(row)))
        realization = tuple(realization)

    fields = {}
    for name, comps in (doc.get("vector_fields") or {}).items():
        if name == "xi":
            raise ManifestError("vector_fields.xi", "'xi' is reserved for the Reeb field")
        fields[str(name)] = _vector(comps, dim, f"vector_fields.{name}", expr)
    functions = {str(k): expr(v, f"functions.{k}") for k, v in (doc.get("functions") or {}).items()}

    if realization is None:
        for name, comps in fields.items():
            if not all(x.is_constant() for x in comps):
                raise ManifestError(f"vector_fields.{name}", "non-constant components need a frame_realization")
        for name, f in functions.items():
            if not f.is_constant():
                raise ManifestError(f"functions.{name}", "non-constant functions need a frame_realization")

    return ManifoldSpec(
        n=n,
        frame_names=names,
        structure_constants=structure,
        metric_matrix=metric,
        phi_images=phi,
        xi=xi,
        eta=eta,
        table=table,
        realization=realization,
        vector_fields=fields,
        functions=functions,
        params=merged,
    )


def load_manifest(path: str | Path, params: Mapping[str, Any] | None = None) -> ManifoldSpec:
    return parse_manifest(Path(path).read_text(encoding="utf-8"), params)


def _frac_str(x: Fraction) -> str | int:
    return int(x) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def to_document(spec: ManifoldSpec) -> dict[str, Any]:
    """Canonical manifest mapping; parameters are already substituted."""
    dim = spec.dim
    doc: dict[str, Any] = {"dim": dim, "n": spec.n, "frame": list(spec.frame_names)}
    doc["brackets"] = [
        {"i": spec.frame_names[i], "j": spec.frame_names[j], "k": spec.frame_names[k], "coeff": _frac_str(c)}
        for i, j, k in itertools.product(range(dim), repeat=3)
        if (c := spec.structure_constants[i][j][k])
    ]
    doc["metric"] = [[_frac_str(x) for x in row] for row in spec.metric_matrix]
    doc["phi"] = [[_frac_str(x) for x in row] for row in spec.phi_images]
    doc["xi"] = [_frac_str(x) for x in spec.xi]
    doc["eta"] = [_frac_str(x) for x in spec.eta]
    if spec.table.coordinates:
        doc["coordinates"] = {
            "names": list(spec.table.coordinates),
            "circular": [
                {"sin": s, "cos": c, "of": spec.table.coordinates[k]} for s, c, k in spec.table.circular_pairs
            ],
        }
    if spec.realization is not None:
        doc["frame_realization"] = [[str(a) for a in row] for row in spec.realization]
    if spec.vector_fields:
        doc["vector_fields"] = {k: [str(x) for x in v] for k, v in spec.vector_fields.items()}
    if spec.functions:
        doc["functions"] = {k: str(v) for k, v in spec.functions.items()}
    return doc


def dump_manifest(spec: ManifoldSpec) -> str:
    return yaml.safe_dump(to_document(spec), sort_keys=False)


# validation ----------------------------------------------------------------


def _rational_tensor(spec: ManifoldSpec, variance: str, fn) -> FrameTensor:
    return FrameTensor.from_function(variance, spec.dim, spec.table, fn)


def _realization_checks(spec: ManifoldSpec, rng_seed: int = 0) -> list[Check]:
    A = spec.realization
    dim, m = spec.dim, spec.table.n_coordinates
    c = spec.structure_constants
    if m != dim:
        return [Check("realization_square", False, detail=f"{m} coordinates for a {dim}-dimensional frame")]
    worst = None
    for i, j in itertools.combinations(range(dim), 2):
        for a in range(m):
            lhs = ScalarExpr.zero(spec.table)
            for b in range(m):
                lhs = lhs + A[i][b] * A[j][a].partial(b) - A[j][b] * A[i][a].partial(b)
            rhs = ScalarExpr.zero(spec.table)
            for k in range(dim):
                if c[i][j][k]:
                    rhs = rhs + A[k][a] * c[i][j][k]
            diff = lhs - rhs
            if not diff.is_zero() and worst is None:
                worst = f"[{i},{j}] along {spec.table.coordinates[a]}: {diff}"
    checks = [Check("realization_brackets", worst is None, worst)]
    rng = np.random.default_rng(rng_seed)
    bad = None
    for _ in range(5):
        point = {name: float(v) for name, v in zip(spec.table.coordinates, rng.uniform(-2, 2, m))}
        mat = np.array([[a.evaluate(point) for a in row] for row in A])
        det = np.linalg.det(mat)
        if abs(det) < 1e-9:
            bad = f"det {det:.3g} at {point}"
            break
    checks.append(Check("realization_invertible", bad is None, bad))
    return checks


def validate_structure(spec: ManifoldSpec) -> ValidationReport:
    """Check the Lie-algebra data and the almost contact B-metric axioms exactly."""
    dim, n = spec.dim, spec.n
    c = spec.structure_constants
    report = ValidationReport(title="structure")

    anti = _rational_tensor(spec, "ddu", lambda i, j, k: c[i][j][k] + c[j][i][k])
    report.add(check_zero("antisymmetry", anti))

    def jacobi(i, j, k, l):
        total = Fraction(0)
        for a, b, d in ((i, j, k), (j, k, i), (k, i, j)):
            total += sum(c[a][b][m] * c[m][d][l] for m in range(dim))
        return total

    report.add(check_zero("jacobi", _rational_tensor(spec, "dddu", jacobi)))

    G = spec.metric_matrix
    sym = all(G[i][j] == G[j][i] for i in range(dim) for j in range(dim))
    if not sym:
        report.add(Check("signature", False, detail="metric matrix is not symmetric"))
        metric_ok = False
    else:
        pos, neg, zero = inertia(G)
        metric_ok = zero == 0
        report.add(
            Check(
                "signature",
                (pos, neg, zero) == (n + 1, n, 0),
                detail=f"(+{pos}, -{neg}, 0:{zero}), expected (+{n + 1}, -{n})",
            )
        )

    g = spec.metric_tensor()
    phi = spec.phi_tensor()
    xi = spec.xi_vector()
    eta = spec.eta_form()
    ident = spec.identity()

    report.add(check_zero("phi_xi_zero", phi.insert(1, xi)))
    P = spec.phi_images
    phi2 = _rational_tensor(spec, "ud", lambda k, j: sum(P[j][m] * P[m][k] for m in range(dim)))
    report.add(check_zero("phi_squared", phi2 + ident - xi.tensor(eta)))
    report.add(check_zero("eta_phi_zero", phi.insert(0, eta)))
    report.add(check_zero("eta_xi_one", eta.insert(0, xi).value() - 1))
    report.add(check_zero("g_phi_phi", _two_phi(spec) + g - eta.tensor(eta)))
    report.add(check_zero("g_xi_eta", g.insert(1, xi) - eta))
    g_phi = _g_phi(spec)  # g(x, phi y)
    report.add(check_zero("g_phi_symmetric", g_phi - g_phi.permute([1, 0])))

    if spec.realization is not None:
        report.extend(_realization_checks(spec))
    if not metric_ok:
        report.add(Check("metric_nondegenerate", False, detail="metric matrix is singular"))
    return report


def _g_phi(spec: ManifoldSpec) -> FrameTensor:
    """``B[x, y] = g(x, phi y)``."""
    G, P = spec.metric_matrix, spec.phi_images
    dim = spec.dim
    return _rational_tensor(spec, "dd", lambda i, j: sum(G[i][k] * P[j][k] for k in range(dim)))


def _two_phi(spec: ManifoldSpec) -> FrameTensor:
    """``g(phi x, phi y)``."""
    G, P = spec.metric_matrix, spec.phi_images
    dim = spec.dim
    return _rational_tensor(
        spec, "dd", lambda i, j: sum(P[i][a] * G[a][b] * P[j][b] for a in range(dim) for b in range(dim))
    )


def associated_metric(spec: ManifoldSpec) -> FrameTensor:
    """``g~(x, y) = g(x, phi y) + eta(x) eta(y)``."""
    return _g_phi(spec) + spec.eta_eta()


def associated_metric_data(spec: ManifoldSpec) -> MetricData:
    gt = associated_metric(spec)
    return MetricData.from_matrix([[gt[i, j].constant_value() for j in range(spec.dim)] for i in range(spec.dim)])
