"""Levi-Civita connection, curvature, Ricci data and sectional curvature.

The connection is computed in the frame from structure constants via the
Koszul formula.  An independent coordinate-chart finite-difference oracle is
provided for specs with a coordinate realization.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .exprring import ScalarExpr
from .frame_tensor import (
    Connection,
    Frame,
    FrameTensor,
    MetricData,
    contract,
    covariant_derivative,
)
from .manifold_input import ManifoldSpec, associated_metric_data
from .reports import Check, ValidationReport, check_zero

DEFAULT_STEP = 1e-4
DEFAULT_TOLERANCE = 1e-5


class DegeneratePlaneError(ValueError):
    pass


def koszul_connection(spec: ManifoldSpec, metric: MetricData | None = None) -> Connection:
    """Levi-Civita connection of a constant frame metric.

    ``2 g(nabla_i e_j, e_k) = g([e_i,e_j],e_k) - g([e_j,e_k],e_i) + g([e_k,e_i],e_j)``;
    the derivative terms of the general formula vanish for constant ``G``.
    """
    metric = metric or spec.metric
    return koszul_from_frame(spec.frame, metric)


def koszul_from_frame(frame: Frame, metric: MetricData) -> Connection:
    dim = frame.dim
    c, G, Ginv = frame.c, metric.G, metric.Ginv
    table = frame.table
    gamma = np.empty((dim, dim, dim), dtype=object)
    for i, j in itertools.product(range(dim), repeat=2):
        low = [
            sum(c[i][j][m] * G[m][k] - c[j][k][m] * G[m][i] + c[k][i][m] * G[m][j] for m in range(dim)) / 2
            for k in range(dim)
        ]
        for l in range(dim):
            gamma[i, j, l] = ScalarExpr.constant(table, sum(Ginv[l][k] * low[k] for k in range(dim)))
    return Connection(gamma, frame)


def riemann_13(conn: Connection) -> FrameTensor:
    """``R13[l, i, j, k] = (R(e_i, e_j) e_k)^l``."""
    frame, gamma = conn.frame, conn.gamma
    dim, c = frame.dim, frame.c
    table = frame.table
    out = np.empty((dim,) * 4, dtype=object)
    for i, j, k in itertools.product(range(dim), repeat=3):
        for l in range(dim):
            val = frame.derive(i, gamma[j, k, l]) - frame.derive(j, gamma[i, k, l])
            for p in range(dim):
                val = val + gamma[j, k, p] * gamma[i, p, l] - gamma[i, k, p] * gamma[j, p, l]
            for m in range(dim):
                if c[i][j][m]:
                    val = val - gamma[m, k, l] * c[i][j][m]
            out[l, i, j, k] = val
    return FrameTensor("uddd", out, table)


def lower_first(R13: FrameTensor, metric: MetricData) -> FrameTensor:
    """``R04[i, j, k, l] = g(R(e_i, e_j) e_k, e_l)``."""
    g = metric.tensor(R13.table)
    # contract the output slot of R13 with g's first slot
    t = g.tensor(R13)  # [a, l, p, i, j, k]
    lowered = contract(t, 0, 2)  # [l, i, j, k]
    return lowered.permute([1, 2, 3, 0])


@dataclass(eq=False)
class CurvatureBundle:
    spec: ManifoldSpec
    metric: MetricData
    conn: Connection
    R13: FrameTensor
    R04: FrameTensor
    ricci: FrameTensor
    ricci_star: FrameTensor
    Q: FrameTensor
    tau: ScalarExpr
    tau_tilde: ScalarExpr
    tau_star: ScalarExpr
    tilde_metric: MetricData = field(repr=False)
    tilde_conn: Connection = field(repr=False)
    tilde_R04: FrameTensor = field(repr=False)
    tilde_ricci: FrameTensor = field(repr=False)

    @property
    def n(self) -> int:
        return self.spec.n

    def ricci_operator(self, x: FrameTensor) -> FrameTensor:
        return self.Q.insert(1, x)


def ricci_and_scalar(R04: FrameTensor, metric: MetricData) -> tuple[FrameTensor, ScalarExpr]:
    ricci = contract(R04, 0, 3, metric)
    return ricci, contract(ricci, 0, 1, metric).value()


def curvature_bundle(spec: ManifoldSpec, conn: Connection | None = None) -> CurvatureBundle:
    conn = conn or koszul_connection(spec)
    metric = spec.metric
    R13 = riemann_13(conn)
    R04 = lower_first(R13, metric)
    ricci, tau = ricci_and_scalar(R04, metric)
    phi = spec.phi_tensor()
    # R(e_i, y, z, phi e_j) as [i, y, z, j]
    R04_phi = R04.tensor(phi)  # [i,y,z,m, m', j]
    R04_phi = contract(R04_phi, 3, 4)
    ricci_star = contract(R04_phi, 0, 3, metric)
    ricci_phi = contract(ricci.tensor(phi), 1, 2)  # rho(e_i, phi e_j)
    tau_star = contract(ricci_phi, 0, 1, metric).value()
    Q = contract(metric.inverse_tensor(spec.table).tensor(ricci), 1, 2)  # [k, j]

    tilde = associated_metric_data(spec)
    tilde_conn = koszul_connection(spec, tilde)
    tilde_R04 = lower_first(riemann_13(tilde_conn), tilde)
    tilde_ricci, tau_tilde = ricci_and_scalar(tilde_R04, tilde)
    return CurvatureBundle(
        spec=spec,
        metric=metric,
        conn=conn,
        R13=R13,
        R04=R04,
        ricci=ricci,
        ricci_star=ricci_star,
        Q=Q,
        tau=tau,
        tau_tilde=tau_tilde,
        tau_star=tau_star,
        tilde_metric=tilde,
        tilde_conn=tilde_conn,
        tilde_R04=tilde_R04,
        tilde_ricci=tilde_ricci,
    )


# invariants ----------------------------------------------------------------


def connection_checks(spec: ManifoldSpec, conn: Connection, metric: MetricData | None = None) -> list[Check]:
    metric = metric or spec.metric
    c = spec.structure_constants
    torsion = FrameTensor.from_function(
        "ddu", spec.dim, spec.table, lambda i, j, k: conn.gamma[i, j, k] - conn.gamma[j, i, k] - c[i][j][k]
    )
    nabla_g = covariant_derivative(metric.tensor(spec.table), conn)
    return [check_zero("torsion_free", torsion), check_zero("metric_compatible", nabla_g)]


def torsion(conn: Connection, x: FrameTensor, y: FrameTensor) -> FrameTensor:
    """``nabla_x y - nabla_y x - [x, y]`` for vector fields."""
    return conn.nabla(x, y) - conn.nabla(y, x) - conn.frame.bracket(x, y)


def curvature_symmetry_checks(bundle: CurvatureBundle) -> list[Check]:
    R = bundle.R04
    bianchi = R + R.permute([1, 2, 0, 3]) + R.permute([2, 0, 1, 3])
    return [
        check_zero("R_antisym_12", R + R.permute([1, 0, 2, 3])),
        check_zero("R_antisym_34", R + R.permute([0, 1, 3, 2])),
        check_zero("R_pair_symmetry", R - R.permute([2, 3, 0, 1])),
        check_zero("first_bianchi", bianchi),
        check_zero("ricci_symmetric", bundle.ricci - bundle.ricci.permute([1, 0])),
        check_zero("ricci_star_symmetric", bundle.ricci_star - bundle.ricci_star.permute([1, 0])),
    ]


def contracted_bianchi_check(bundle: CurvatureBundle) -> Check:
    """``d tau = 2 div rho``."""
    spec = bundle.spec
    d_tau = spec.frame.derivative_form(bundle.tau)
    div_rho = contract(covariant_derivative(bundle.ricci, bundle.conn), 0, 1, bundle.metric)
    return check_zero("d_tau_eq_2_div_rho", d_tau - div_rho * 2)


def tilde_inverse_check(bundle: CurvatureBundle) -> Check:
    """``g~^{ij} = -phi^j_k g^{ik} + xi^i xi^j`` against exact matrix inversion."""
    spec = bundle.spec
    dim = spec.dim
    Ginv = bundle.metric.Ginv
    P = spec.phi_images  # P[k][j] = phi^j_k
    xi = spec.xi

    def formula(i, j):
        return -sum(P[k][j] * Ginv[i][k] for k in range(dim)) + xi[i] * xi[j]

    diff = FrameTensor.from_function(
        "uu", dim, spec.table, lambda i, j: formula(i, j) - bundle.tilde_metric.Ginv[i][j]
    )
    return check_zero("tilde_inverse_formula", diff)


# sectional curvature -------------------------------------------------------


def sectional_curvature(bundle: CurvatureBundle, x: FrameTensor, y: FrameTensor) -> ScalarExpr:
    """``R(x, y, y, x) / (g(x,x) g(y,y) - g(x,y)^2)``; the plane must be non-degenerate."""
    metric = bundle.metric
    denom = metric.inner(x, x) * metric.inner(y, y) - metric.inner(x, y) ** 2
    if denom.is_zero():
        raise DegeneratePlaneError("degenerate plane: g(x,x)g(y,y) - g(x,y)^2 = 0")
    if not denom.is_constant():
        raise DegeneratePlaneError(f"plane degeneracy depends on the point: {denom}")
    num = bundle.R04.insert(0, x).insert(0, y).insert(0, y).insert(0, x).value()
    return num / denom


@dataclass
class SectionEntry:
    kind: str  # "phi-holomorphic" or "xi-section"
    generator: str
    curvature: ScalarExpr

    def to_dict(self):
        return {"kind": self.kind, "generator": self.generator, "k": str(self.curvature)}


@dataclass
class SectionsReport:
    phi_holomorphic: list[SectionEntry]
    xi_sections: list[SectionEntry]
    checks: list[Check]

    def lines(self) -> list[str]:
        out = [f"{e.kind} <{e.generator}>: k = {e.curvature}" for e in self.phi_holomorphic + self.xi_sections]
        return out + [c.line() for c in self.checks]


def special_sections_report(
    bundle: CurvatureBundle, spec: ManifoldSpec | None = None, *, soliton_exists: bool = False,
    is_sasaki_like: bool | None = None,
) -> SectionsReport:
    """Curvatures of the frame-generated phi-holomorphic and xi-sections.

    The 3-dimensional values (-1 and +1) are only asserted when the manifold is
    3-dimensional, Sasaki-like and admits a Ricci-like soliton.
    """
    spec = spec or bundle.spec
    xi = spec.xi_vector()
    phi_list, xi_list = [], []
    for i, name in enumerate(spec.frame_names):
        e = spec.frame.basis_vector(i)
        px = spec.apply_phi(e)
        ppx = spec.apply_phi(px)
        try:
            phi_list.append(SectionEntry("phi-holomorphic", f"phi {name}, phi^2 {name}", sectional_curvature(bundle, px, ppx)))
        except DegeneratePlaneError:
            pass
        try:
            xi_list.append(SectionEntry("xi-section", f"{name}, xi", sectional_curvature(bundle, e, xi)))
        except DegeneratePlaneError:
            pass
    checks = []
    if spec.dim == 3 and soliton_exists and is_sasaki_like:
        checks.append(
            check_zero("dim3_phi_holomorphic_eq_-1", [e.curvature + 1 for e in phi_list], "Ricci-like soliton, dim 3")
        )
        checks.append(check_zero("dim3_xi_sections_eq_1", [e.curvature - 1 for e in xi_list], "Ricci-like soliton, dim 3"))
    return SectionsReport(phi_list, xi_list, checks)


# numeric oracle ------------------------------------------------------------


def _point_dict(spec: ManifoldSpec, point) -> dict[str, float]:
    coords = spec.table.coordinates
    if isinstance(point, Mapping):
        return {str(k): float(v) for k, v in point.items()}
    values = list(point)
    if len(values) != len(coords):
        raise ValueError(f"expected {len(coords)} coordinate values")
    return dict(zip(coords, map(float, values)))


def _frame_matrix(spec: ManifoldSpec, pt: Mapping[str, float]) -> np.ndarray:
    return np.array([[a.evaluate(pt) for a in row] for row in spec.realization], dtype=float)


def coordinate_metric(spec: ManifoldSpec, point) -> np.ndarray:
    """``g(d_a, d_b)`` at a point, from the frame metric and the realization."""
    if spec.realization is None:
        raise ValueError("spec has no coordinate realization")
    pt = _point_dict(spec, point)
    Ainv = np.linalg.inv(_frame_matrix(spec, pt))
    G = np.array(spec.metric_matrix, dtype=float)
    return Ainv @ G @ Ainv.T


def numeric_curvature_oracle(spec: ManifoldSpec, point, step: float = DEFAULT_STEP) -> np.ndarray:
    """Frame components ``R(e_i, e_j, e_k, e_l)`` by central differences in the chart."""
    if spec.realization is None:
        raise ValueError("spec has no coordinate realization")
    pt = _point_dict(spec, point)
    coords = spec.table.coordinates
    m = len(coords)
    base = np.array([pt[c] for c in coords])

    def metric_at(x):
        return coordinate_metric(spec, x)

    def dmetric(x):
        out = np.empty((m, m, m))  # [d, a, b] = d_d g_ab
        for d in range(m):
            h = np.zeros(m)
            h[d] = step
            out[d] = (metric_at(x + h) - metric_at(x - h)) / (2 * step)
        return out

    def christoffel(x):
        dg = dmetric(x)
        ginv = np.linalg.inv(metric_at(x))
        # low[c, a, b] = 1/2 (d_a g_cb + d_b g_ca - d_c g_ab)
        low = 0.5 * (np.einsum("acb->cab", dg) + np.einsum("bca->cab", dg) - dg)
        return np.einsum("dc,cab->dab", ginv, low)  # Gamma^d_{ab}

    gam = christoffel(base)
    dgam = np.empty((m, m, m, m))  # [e, d, a, b] = d_e Gamma^d_{ab}
    for e in range(m):
        h = np.zeros(m)
        h[e] = step
        dgam[e] = (christoffel(base + h) - christoffel(base - h)) / (2 * step)
    # Rup[d, c, a, b] = (R(d_a, d_b) d_c)^d
    Rup = (
        np.einsum("adbc->dcab", dgam)
        - np.einsum("bdac->dcab", dgam)
        + np.einsum("dae,ebc->dcab", gam, gam)
        - np.einsum("dbe,eac->dcab", gam, gam)
    )
    g = metric_at(base)
    Rlow = np.einsum("dcab,de->abce", Rup, g)  # g(R(d_a,d_b)d_c, d_e)
    A = _frame_matrix(spec, pt)
    return np.einsum("ia,jb,kc,le,abce->ijkl", A, A, A, A, Rlow)


def oracle_deviation(bundle: CurvatureBundle, point, step: float = DEFAULT_STEP) -> float:
    """Max |numeric - exact| over frame curvature components at ``point``."""
    spec = bundle.spec
    numeric = numeric_curvature_oracle(spec, point, step)
    exact = bundle.R04.evaluate(_point_dict(spec, point))
    return float(np.max(np.abs(numeric - exact)))


def oracle_check(
    bundle: CurvatureBundle, points: Sequence, step: float = DEFAULT_STEP, tol: float = DEFAULT_TOLERANCE
) -> Check:
    worst = max(oracle_deviation(bundle, p, step) for p in points)
    return Check("numeric_oracle", worst <= tol, detail=f"max deviation {worst:.3e} (tol {tol:g}, step {step:g})")


def random_points(spec: ManifoldSpec, count: int = 5, seed: int = 0, scale: float = 2.0) -> list[dict[str, float]]:
    rng = np.random.default_rng(seed)
    coords = spec.table.coordinates
    return [dict(zip(coords, map(float, rng.uniform(-scale, scale, len(coords))))) for _ in range(count)]


def curvature_report(bundle: CurvatureBundle) -> ValidationReport:
    report = ValidationReport(title="curvature invariants")
    report.extend(connection_checks(bundle.spec, bundle.conn))
    report.extend(curvature_symmetry_checks(bundle))
    report.add(contracted_bianchi_check(bundle))
    report.add(tilde_inverse_check(bundle))
    return report
