"""Structure-level geometry of almost contact B-metric manifolds.

Computes the fundamental tensor ``F(x,y,z) = g((nabla_x phi) y, z)``,
decides the Sasaki-like condition exactly and runs the identity suites that
hold on Sasaki-like manifolds.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .curvature import CurvatureBundle
from .frame_tensor import Connection, FrameTensor, contract, covariant_derivative
from .manifold_input import ManifoldSpec
from .reports import Check, PreconditionError, ValidationReport, check_zero


def with_phi(t: FrameTensor, slot: int, phi: FrameTensor) -> FrameTensor:
    """``t`` with ``phi`` applied to the vector entering covariant ``slot``."""
    r = t.rank
    joined = contract(t.tensor(phi), slot, r)
    order = list(range(slot)) + [r - 1] + list(range(slot, r - 1))
    return joined.permute(order)


def nabla_phi(spec: ManifoldSpec, conn: Connection) -> FrameTensor:
    """``[i, k, j] = ((nabla_{e_i} phi) e_j)^k``."""
    return covariant_derivative(spec.phi_tensor(), conn)


def fundamental_tensor(spec: ManifoldSpec, conn: Connection) -> FrameTensor:
    """``F[i, j, k] = g((nabla_{e_i} phi) e_j, e_k)``."""
    dphi = nabla_phi(spec, conn)  # [i, l, j]
    g = spec.metric_tensor()  # [l, k]
    return contract(dphi.tensor(g), 1, 3)


def fundamental_tensor_checks(spec: ManifoldSpec, conn: Connection, F: FrameTensor | None = None) -> list[Check]:
    """Symmetries of F valid on every almost contact B-metric manifold."""
    F = F if F is not None else fundamental_tensor(spec, conn)
    phi = spec.phi_tensor()
    xi, eta = spec.xi_vector(), spec.eta_form()
    F_phiphi = with_phi(with_phi(F, 1, phi), 2, phi)
    F_xi_mid = F.insert(1, xi)  # F(x, xi, z) as [x, z]
    F_xi_last = F.insert(2, xi)  # F(x, y, xi) as [x, y]
    decomposition = (
        F
        - F_phiphi
        - eta.tensor(F_xi_mid).permute([1, 0, 2])
        - F_xi_last.tensor(eta)
    )
    dxi = covariant_derivative(xi, conn)  # [i, k] = (nabla_i xi)^k
    g_dxi = contract(dxi.tensor(spec.metric_tensor()), 1, 2)  # g(nabla_x xi, y)
    deta = covariant_derivative(eta, conn)
    return [
        check_zero("F_symmetric_23", F - F.permute([0, 2, 1])),
        check_zero("F_phi_decomposition", decomposition),
        check_zero("F_phi_y_xi_eq_g_nabla_xi", with_phi(F, 1, phi).insert(2, xi) - g_dxi),
        check_zero("nabla_eta_eq_g_nabla_xi", deta - g_dxi),
    ]


@dataclass
class StructureReport:
    is_sasaki_like: bool
    F: FrameTensor
    residual: FrameTensor
    checks: list[Check] = field(default_factory=list)

    @property
    def failed_identity_list(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def lines(self) -> list[str]:
        verdict = "Sasaki-like" if self.is_sasaki_like else "not Sasaki-like"
        out = [f"verdict: {verdict}"]
        worst = self.residual.worst_component()
        if worst is not None:
            idx, expr = worst
            out.append(f"defining residual [{','.join(map(str, idx))}] = {expr}")
        return out + [c.line() for c in self.checks]


def sasaki_residual(spec: ManifoldSpec, conn: Connection) -> FrameTensor:
    """``(nabla_x phi) y + g(x,y) xi + eta(y) x - 2 eta(x) eta(y) xi`` as ``[x, k, y]``."""
    G, xi, eta = spec.metric_matrix, spec.xi, spec.eta
    dim = spec.dim

    def rhs(i, k, j):
        return -G[i][j] * xi[k] - eta[j] * int(k == i) + 2 * eta[i] * eta[j] * xi[k]

    return nabla_phi(spec, conn) - FrameTensor.from_function("dud", dim, spec.table, rhs)


def sasaki_identity_checks(spec: ManifoldSpec, bundle: CurvatureBundle) -> list[Check]:
    """Consequences of the Sasaki-like condition for xi, eta, R and rho."""
    conn = bundle.conn
    n, dim, table = spec.n, spec.dim, spec.table
    G, P = spec.metric_matrix, spec.phi_images
    xi_v, eta_f = spec.xi_vector(), spec.eta_form()
    xi, eta = spec.xi, spec.eta
    phi = spec.phi_tensor()
    delta = lambda a, b: int(a == b)  # noqa: E731

    dxi = covariant_derivative(xi_v, conn)  # [i, k]
    deta = covariant_derivative(eta_f, conn)  # [i, j]
    g_x_phiy = FrameTensor.from_function("dd", dim, table, lambda i, j: sum(G[i][k] * P[j][k] for k in range(dim)))
    R_xi = bundle.R13.insert(3, xi_v)  # [l, i, j] = (R(e_i, e_j) xi)^l
    R_xi_rhs = FrameTensor.from_function(
        "udd", dim, table, lambda l, i, j: eta[j] * delta(l, i) - eta[i] * delta(l, j)
    )
    R_from_xi = bundle.R13.insert(1, xi_v)  # [l, j, k] = (R(xi, e_j) e_k)^l
    R_from_xi_rhs = FrameTensor.from_function(
        "udd", dim, table, lambda l, j, k: G[j][k] * xi[l] - eta[k] * delta(l, j)
    )
    rho_xi = bundle.ricci.insert(1, xi_v)
    rho_xixi = rho_xi.insert(0, xi_v).value()
    return [
        check_zero("nabla_xi_eq_-phi", dxi + phi.permute([1, 0])),
        check_zero("nabla_eta_eq_-g(x,phi y)", deta + g_x_phiy),
        check_zero("R(x,y)xi", R_xi - R_xi_rhs),
        check_zero("rho(x,xi)=2n eta", rho_xi - eta_f * (2 * n)),
        check_zero("R(xi,y)z", R_from_xi - R_from_xi_rhs),
        check_zero("rho(xi,xi)=2n", rho_xixi - 2 * n),
    ]


def sasaki_like_test(spec: ManifoldSpec, conn: Connection | None = None, bundle: CurvatureBundle | None = None) -> StructureReport:
    """Exact Sasaki-like decision; on success the consequence identities are also checked."""
    if conn is None:
        if bundle is None:
            from .curvature import koszul_connection

            conn = koszul_connection(spec)
        else:
            conn = bundle.conn
    F = fundamental_tensor(spec, conn)
    residual = sasaki_residual(spec, conn)
    verdict = residual.is_zero()
    checks = [check_zero("sasaki_like_condition", residual)]
    checks += fundamental_tensor_checks(spec, conn, F)
    if verdict:
        if bundle is None:
            from .curvature import curvature_bundle

            bundle = curvature_bundle(spec, conn)
        checks += sasaki_identity_checks(spec, bundle)
    return StructureReport(verdict, F, residual, checks)


def sasaki_consequence_suite(bundle: CurvatureBundle, structure: StructureReport | None = None) -> ValidationReport:
    """Ricci-operator and scalar-curvature identities of Sasaki-like manifolds."""
    spec = bundle.spec
    structure = structure or sasaki_like_test(spec, bundle=bundle)
    if not structure.is_sasaki_like:
        raise PreconditionError("the manifold is not Sasaki-like; consequence suite does not apply")
    n, dim, table = spec.n, spec.dim, spec.table
    G, P = spec.metric_matrix, spec.phi_images
    eta = spec.eta
    xi_v, eta_f = spec.xi_vector(), spec.eta_form()
    phi = spec.phi_tensor()
    g = spec.metric_tensor()
    g_phi = with_phi(g, 1, phi)  # g(y, phi z)
    rho, Q = bundle.ricci, bundle.Q
    report = ValidationReport(title="Sasaki-like consequences")

    report.add(check_zero("rho_star_relation", bundle.ricci_star - with_phi(rho, 1, phi) - g_phi * (2 * n - 1)))

    R = bundle.R04

    def h(a, b):
        return G[a][b] - 2 * eta[a] * eta[b]

    def gp(a, b):  # g(e_a, phi e_b)
        return sum(G[a][k] * P[b][k] for k in range(dim))

    rhs = FrameTensor.from_function(
        "dddd",
        dim,
        table,
        lambda x, y, z, w: h(y, z) * gp(x, w) + h(y, w) * gp(x, z) - h(x, z) * gp(y, w) - h(x, w) * gp(y, z),
    )
    report.add(check_zero("phi_curvature_identity", with_phi(R, 2, phi) - with_phi(R, 3, phi) - rhs))
    report.add(check_zero("tau_tilde_eq_-tau_star+2n", bundle.tau_tilde + bundle.tau_star - 2 * n))

    Q_phi = contract(Q.tensor(phi), 1, 2)  # [k, j] = (Q phi e_j)^k
    phi_Q = contract(phi.tensor(Q), 1, 2)
    report.add(check_zero("Q_phi_eq_phi_Q", Q_phi - phi_Q))

    dQ = covariant_derivative(Q, bundle.conn)  # [i, k, j] = ((nabla_i Q) e_j)^k
    dQ_xi = dQ.insert(2, xi_v)  # [i, k] = ((nabla_{e_i} Q) xi)^k
    report.add(
        check_zero(
            "(nabla_x Q)xi = Q phi x - 2n phi x",
            dQ_xi - Q_phi.permute([1, 0]) + phi.permute([1, 0]) * (2 * n),
        )
    )
    dxi_Q = dQ.insert(0, xi_v)  # [k, j] = ((nabla_xi Q) e_j)^k
    report.add(check_zero("(nabla_xi Q)y = 2 Q phi y", dxi_Q - Q_phi * 2))
    report.add(check_zero("eta((nabla_x Q)xi) = 0", dQ_xi.insert(1, eta_f)))
    report.add(check_zero("eta((nabla_xi Q)y) = 0", dxi_Q.insert(0, eta_f)))

    frame = spec.frame
    d_tau = frame.derivative_form(bundle.tau)
    d_tt = frame.derivative_form(bundle.tau_tilde)
    tau, tt = bundle.tau, bundle.tau_tilde
    report.add(check_zero("d tau(xi) = 2(tau~ - 2n)", d_tau.insert(0, xi_v).value() - (tt - 2 * n) * 2))
    report.add(check_zero("d tau~(xi) = -2(tau - 2n)", d_tt.insert(0, xi_v).value() + (tau - 2 * n) * 2))
    d_tau_phi = phi.insert(0, d_tau)  # (d tau o phi)_j
    d_tt_phi = phi.insert(0, d_tt)
    report.add(check_zero("d tau o phi = d tau~ + 2(tau - 2n) eta", d_tau_phi - d_tt - eta_f * ((tau - 2 * n) * 2)))
    report.add(check_zero("d tau~ o phi = -d tau + 2(tau~ - 2n) eta", d_tt_phi + d_tau - eta_f * ((tt - 2 * n) * 2)))
    return report
