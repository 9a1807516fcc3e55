"""Exact fitting of Einstein-like and Ricci-like soliton constants.

Both problems are ``target = u1*g + u2*g~ + u3*eta(x)eta`` with unknowns over Q.
The system is assembled by equating the coefficient of every monomial of every
frame component and solved by Gaussian elimination.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .acbm import sasaki_residual, with_phi
from .curvature import CurvatureBundle
from .exprring import ScalarExpr
from .frame_tensor import (
    FrameTensor,
    contract,
    covariant_derivative,
    lie_derivative,
    lie_derivative_connection,
    lie_derivative_metric,
    lie_derivative_sym2,
)
from .manifold_input import ManifoldSpec, associated_metric
from .ratlinalg import IncrementalSolver, inverse
from .reports import Check, PreconditionError, ValidationReport, check_zero

EXACT = "exact-constant-fit"
FUNCTION = "exact-function-fit"
NO_FIT = "no-fit"


@dataclass
class FitResult:
    status: str
    names: tuple[str, str, str]
    coefficients: tuple[ScalarExpr, ScalarExpr, ScalarExpr] | None
    residual: FrameTensor
    witness: tuple[int, int, str] | None = None
    rank: int = 3
    labels: list[str] = field(default_factory=list)
    checks: list[Check] = field(default_factory=list)

    @property
    def is_constant(self) -> bool:
        return self.status == EXACT

    @property
    def affine_dimension(self) -> int | None:
        """Dimension of the solution set when consistent but rank deficient."""
        return 3 - self.rank if self.status == NO_FIT and self.witness is None else None

    def values(self) -> tuple[Fraction, Fraction, Fraction]:
        if not self.is_constant:
            raise ValueError(f"fit status is {self.status}")
        return tuple(c.constant_value() for c in self.coefficients)

    def to_dict(self) -> dict:
        out = {"status": self.status, "labels": self.labels}
        if self.coefficients is not None:
            out["coefficients"] = {n: str(c) for n, c in zip(self.names, self.coefficients)}
        if self.witness is not None:
            i, j, mono = self.witness
            out["witness"] = {"i": i, "j": j, "monomial": mono}
        if self.affine_dimension:
            out["affine_dimension"] = self.affine_dimension
        worst = self.residual.worst_component()
        out["residual"] = "0" if worst is None else f"[{','.join(map(str, worst[0]))}] {worst[1]}"
        out["checks"] = [c.to_dict() for c in self.checks]
        return out

    def lines(self) -> list[str]:
        out = [f"status: {self.status}"]
        if self.coefficients is not None:
            out.append("(" + ", ".join(f"{n}={c}" for n, c in zip(self.names, self.coefficients)) + ")")
        if self.labels:
            out.append("labels: " + ", ".join(self.labels))
        if self.witness is not None:
            i, j, mono = self.witness
            out.append(f"no-fit witness: component ({i},{j}), monomial {mono}")
        if self.affine_dimension:
            out.append(f"rank-deficient basis: solution set has dimension {self.affine_dimension}")
        worst = self.residual.worst_component()
        if worst is not None:
            out.append(f"residual [{','.join(map(str, worst[0]))}] = {worst[1]}")
        return out + [c.line() for c in self.checks]


def _monomial_name(table, mono) -> str:
    parts = [n if e == 1 else f"{n}^{e}" for n, e in zip(table.names, mono) if e]
    return "*".join(parts) or "1"


def fit_three(target: FrameTensor, basis: Sequence[FrameTensor], names: tuple[str, str, str]) -> FitResult:
    """Solve ``target = sum_k u_k basis[k]`` exactly."""
    table = target.table
    dim = target.dim
    pairs = list(itertools.product(range(dim), repeat=2))
    solver = IncrementalSolver(3)
    for i, j in pairs:
        monos = set(target[i, j].terms)
        for b in basis:
            monos |= set(b[i, j].terms)
        for mono in sorted(monos, reverse=True):
            solver.add_row(
                [b[i, j].coefficient(mono) for b in basis],
                target[i, j].coefficient(mono),
                tag=(i, j, _monomial_name(table, mono)),
            )

    def residual_for(coeffs):
        out = target
        for c, b in zip(coeffs, basis):
            out = out - b * c
        return out

    if solver.consistent:
        sol = solver.solution()
        if sol is None:
            return FitResult(NO_FIT, names, None, target, None, solver.rank)
        coeffs = tuple(ScalarExpr.constant(table, x) for x in sol)
        res = residual_for(coeffs)
        assert res.is_zero()
        return FitResult(EXACT, names, coeffs, res, None, 3)

    witness = solver.inconsistent_tag
    func = _function_fit(target, basis, pairs)
    if func is not None:
        coeffs, res = func
        if res.is_zero() and all(c.circular_degree() == 0 for c in coeffs):
            return FitResult(FUNCTION, names, coeffs, res, None, 3)
        return FitResult(NO_FIT, names, None, res, witness, 3)
    return FitResult(NO_FIT, names, None, target, witness, solver.rank)


def _function_fit(target, basis, pairs):
    """Pointwise solve with ScalarExpr coefficients; needs a constant basis of rank 3."""
    if not all(b.is_constant() for b in basis):
        return None
    chosen, probe = [], IncrementalSolver(3)
    for i, j in pairs:
        row = [b[i, j].constant_value() for b in basis]
        before = probe.rank
        probe.add_row(row, 0)
        if probe.rank > before:
            chosen.append((i, j))
        if len(chosen) == 3:
            break
    if len(chosen) < 3:
        return None
    M = [[b[i, j].constant_value() for b in basis] for i, j in chosen]
    Minv = inverse(M)
    rhs = [target[i, j] for i, j in chosen]
    coeffs = tuple(sum((rhs[c] * Minv[r][c] for c in range(3)), ScalarExpr.zero(target.table)) for r in range(3))
    res = target
    for c, b in zip(coeffs, basis):
        res = res - b.map(lambda x, c=c: x * c)
    return coeffs, res


# Einstein-like -------------------------------------------------------------


def einstein_like_fit(rho: FrameTensor, g: FrameTensor, g_tilde: FrameTensor, eta_eta: FrameTensor) -> FitResult:
    """``rho = a g + b g~ + c eta(x)eta``."""
    fit = fit_three(rho, [g, g_tilde, eta_eta], ("a", "b", "c"))
    if fit.status == EXACT:
        a, b, c = fit.values()
        fit.labels.append("Einstein-like")
        if b == 0:
            fit.labels.append("eta-Einstein")
            if c == 0:
                fit.labels.append("Einstein")
    elif fit.status == FUNCTION:
        a, b, c = fit.coefficients
        fit.labels.append("almost Einstein-like")
        if b.is_zero():
            fit.labels.append("almost eta-Einstein")
            if c.is_zero():
                fit.labels.append("almost Einstein")
    return fit


def einstein_fit_for(spec: ManifoldSpec, bundle: CurvatureBundle) -> FitResult:
    return einstein_like_fit(bundle.ricci, spec.metric_tensor(), associated_metric(spec), spec.eta_eta())


def einstein_like_relations(fit: FitResult, bundle: CurvatureBundle) -> ValidationReport:
    """Relations between (a, b, c), tau and tau~ on an Einstein-like Sasaki-like manifold."""
    spec = bundle.spec
    if not fit.is_constant:
        raise PreconditionError("relations need an exact constant Einstein-like fit")
    if not sasaki_residual(spec, bundle.conn).is_zero():
        raise PreconditionError("relations need a Sasaki-like manifold")
    n = spec.n
    a, b, c = fit.values()
    tau, tt = bundle.tau, bundle.tau_tilde
    g, gt, ee = spec.metric_tensor(), associated_metric(spec), spec.eta_eta()
    r = ValidationReport(title="Einstein-like relations")
    r.add(check_zero("tau = (2n+1)a + b + c", tau - ((2 * n + 1) * a + b + c)))
    r.add(check_zero("tau~ = 2n(b+1)", tt - 2 * n * (b + 1)))
    r.add(check_zero("a + b + c = 2n", a + b + c - 2 * n))
    r.add(check_zero("tau = 2n(a+1)", tau - 2 * n * (a + 1)))
    two_n = 2 * n
    rebuilt = g * (tau / two_n - 1) + gt * (tt / two_n - 1) + ee * (2 * (n + 1) - (tau + tt) / two_n)
    r.add(check_zero("rho from tau and tau~", bundle.ricci - rebuilt))
    # constant scalar curvatures, tau~ = 2n, eta-Einstein with (tau/2n - 1, 0, 2n+1 - tau/2n)
    frame = spec.frame
    r.add(check_zero("d tau = 0", frame.derivative_form(tau)))
    r.add(check_zero("tau~ = 2n", tt - 2 * n))
    r.add(
        check_zero(
            "(a,b,c) = (tau/2n - 1, 0, 2n+1 - tau/2n)",
            [a - (tau / two_n - 1), ScalarExpr.constant(spec.table, b), c - (2 * n + 1 - tau / two_n)],
        )
    )
    return r


# Ricci-like solitons -------------------------------------------------------


def soliton_target(v: FrameTensor, spec: ManifoldSpec, bundle: CurvatureBundle) -> FrameTensor:
    """``-(1/2 L_v g + rho)``."""
    lvg = lie_derivative_metric(v, bundle.conn, bundle.metric)
    return -(lvg * Fraction(1, 2) + bundle.ricci)


def _soliton_labels(fit: FitResult) -> None:
    if fit.status == EXACT:
        lam, mu, nu = fit.values()
        fit.labels.append("Ricci-like soliton")
        if mu == 0:
            fit.labels.append("eta-Ricci soliton")
            if nu == 0:
                kind = "shrinking" if lam < 0 else "expanding" if lam > 0 else "steady"
                fit.labels.append(f"{kind} Ricci soliton")
    elif fit.status == FUNCTION:
        lam, mu, nu = fit.coefficients
        fit.labels.append("almost Ricci-like soliton")
        if mu.is_zero():
            fit.labels.append("almost eta-Ricci soliton")
            if nu.is_zero():
                fit.labels.append("almost Ricci soliton")


def fit_soliton_target(target: FrameTensor, spec: ManifoldSpec, is_sasaki_like: bool) -> FitResult:
    fit = fit_three(target, [spec.metric_tensor(), associated_metric(spec), spec.eta_eta()], ("lambda", "mu", "nu"))
    _soliton_labels(fit)
    if fit.status == EXACT and is_sasaki_like:
        lam, mu, nu = fit.values()
        fit.checks.append(check_zero("lambda + mu + nu = -2n", ScalarExpr.constant(spec.table, lam + mu + nu + 2 * spec.n)))
    return fit


def soliton_fit(v: FrameTensor, spec: ManifoldSpec, bundle: CurvatureBundle) -> FitResult:
    """Fit ``1/2 L_v g + rho + lambda g + mu g~ + nu eta(x)eta = 0``."""
    sasaki = sasaki_residual(spec, bundle.conn).is_zero()
    return fit_soliton_target(soliton_target(v, spec, bundle), spec, sasaki)


def _triple(x) -> tuple[Fraction, Fraction, Fraction]:
    if isinstance(x, FitResult):
        return x.values()
    return tuple(Fraction(t) for t in x)


def predicted_xi_soliton(einstein) -> tuple[Fraction, Fraction, Fraction]:
    """Soliton constants for potential xi matching an Einstein-like triple."""
    a, b, c = _triple(einstein)
    return (-a, 1 - b, -1 - c)


@dataclass
class BridgeReport:
    report: ValidationReport
    cases: list[str]

    def lines(self) -> list[str]:
        return self.report.lines() + [f"applicable cases: {', '.join(self.cases) or 'none'}"]


def xi_soliton_bridge(fit_xi, einstein, n: int) -> BridgeReport:
    """Correspondence between a potential-xi soliton and an Einstein-like triple.

    Accepts FitResults (must be exact constant fits) or plain triples.
    """
    for f in (fit_xi, einstein):
        if isinstance(f, FitResult) and not f.is_constant:
            raise PreconditionError("bridge needs exact constant fits")
    lam, mu, nu = _triple(fit_xi)
    a, b, c = _triple(einstein)
    r = ValidationReport(title="potential-xi soliton vs Einstein-like")
    for name, val in (
        ("a + lambda = 0", a + lam),
        ("b + mu - 1 = 0", b + mu - 1),
        ("c + nu + 1 = 0", c + nu + 1),
        ("a + b + c = 2n", a + b + c - 2 * n),
        ("lambda + mu + nu = -2n", lam + mu + nu + 2 * n),
    ):
        r.add(Check(name, val == 0, None if val == 0 else str(val)))
    cases = []
    if mu == 0:
        cases.append("(i)")
        r.add(Check("case (i): einstein = (-lambda, 1, lambda+2n-1)", (a, b, c) == (-lam, 1, lam + 2 * n - 1)))
    if (lam, mu, nu) == (-2 * n, 0, 0) or (a, b, c) == (2 * n, 1, -1):
        cases.append("(ii)")
        r.add(Check("case (ii): shrinking Ricci soliton <-> (2n, 1, -1)", (lam, mu, nu) == (-2 * n, 0, 0) and (a, b, c) == (2 * n, 1, -1)))
    if b == 0:
        cases.append("(iii)")
        r.add(Check("case (iii): soliton = (-a, 1, a-2n-1)", (lam, mu, nu) == (-a, 1, a - 2 * n - 1)))
    if (a, b, c) == (2 * n, 0, 0) or (lam, mu, nu) == (-2 * n, 1, -1):
        cases.append("(iv)")
        r.add(Check("case (iv): Einstein 2n <-> (-2n, 1, -1)", (a, b, c) == (2 * n, 0, 0) and (lam, mu, nu) == (-2 * n, 1, -1)))
    return BridgeReport(r, cases)


def lie_rho_xi_closed_form(v: FrameTensor, spec: ManifoldSpec, bundle: CurvatureBundle) -> FrameTensor:
    """``2n (-g(phi x, v) + eta(nabla_x v))``, valid when ``rho = 2n eta(x)eta``."""
    n = spec.n
    g = spec.metric_tensor()
    phi = spec.phi_tensor()
    g_phix_v = with_phi(g, 0, phi).insert(1, v)  # [x]
    dv = covariant_derivative(v, bundle.conn)  # [x, k]
    eta_dv = dv.insert(1, spec.eta_form())
    return (eta_dv - g_phix_v) * (2 * n)


def soliton_identity_suite(v: FrameTensor, spec: ManifoldSpec, bundle: CurvatureBundle, fit: FitResult,
                    einstein: FitResult | None = None) -> ValidationReport:
    """Identities forced by a Ricci-like soliton with potential ``v`` on a Sasaki-like manifold."""
    if not sasaki_residual(spec, bundle.conn).is_zero():
        raise PreconditionError("theorem suite needs a Sasaki-like manifold")
    if not fit.is_constant:
        raise PreconditionError(f"theorem suite needs an exact constant soliton fit (got {fit.status})")
    n, table = spec.n, spec.table
    conn = bundle.conn
    xi = spec.xi_vector()
    eta = spec.eta_form()
    phi = spec.phi_tensor()
    lam, mu, nu = fit.values()
    r = ValidationReport(title="Ricci-like soliton identities")

    r.add(check_zero("lambda + mu + nu = -2n", ScalarExpr.constant(table, lam + mu + nu + 2 * n)))
    dv = covariant_derivative(v, conn)  # [x, k]
    r.add(check_zero("nabla_xi v = -phi v", dv.insert(0, xi) + spec.apply_phi(v)))
    bracket = spec.frame.bracket(v, xi)
    r.add(check_zero("L_v xi = [v, xi] = 0", bracket))
    r.add(check_zero("L_v xi: bracket vs connection formula", lie_derivative(xi, v, conn) - bracket))

    lvrho = lie_derivative_sym2(bundle.ricci, v, conn)
    lvrho_xi = lvrho.insert(1, xi)
    r.add(check_zero("(L_v rho)(x, xi) = 0", lvrho_xi))
    r.add(check_zero("L_v rho: sym2 formula vs general formula", lvrho - lie_derivative(bundle.ricci, v, conn)))
    rho_is_vertical = (bundle.ricci - spec.eta_eta() * (2 * n)).is_zero()
    if rho_is_vertical:
        r.add(check_zero("(L_v rho)(x, xi) closed form", lvrho_xi - lie_rho_xi_closed_form(v, spec, bundle)))
    r.add(check_zero("tau = 2n", bundle.tau - 2 * n))
    r.add(check_zero("tau~ constant", spec.frame.derivative_form(bundle.tau_tilde)))

    # Yano-type spot checks
    lv_conn = lie_derivative_connection(v, conn, bundle.R13)  # [x, y, k]
    Q_phi = contract(bundle.Q.tensor(phi), 1, 2)  # [k, x]
    r.add(check_zero("L_v nabla symmetric", lv_conn - lv_conn.permute([1, 0, 2])))
    r.add(check_zero("(L_v nabla)(x, xi) = -2 Q phi x", lv_conn.insert(1, xi) + Q_phi.permute([1, 0]) * 2))
    lvg = lie_derivative_metric(v, conn, bundle.metric)
    d_lvg = covariant_derivative(lvg, conn)  # [x, y, z] = (nabla_x L_v g)(y, z)
    g_lv_conn = contract(lv_conn.tensor(spec.metric_tensor()), 2, 3)  # [x, y, z] = g((L_v nabla)(x,y), z)
    r.add(
        check_zero(
            "2 g((L_v nabla)(x,y), z) from nabla L_v g",
            g_lv_conn * 2 - d_lvg - d_lvg.permute([1, 0, 2]) + d_lvg.permute([1, 2, 0]),
        )
    )
    lvR = lie_derivative(bundle.R13, v, conn)  # [k, x, y, z]
    d_lv_conn = covariant_derivative(lv_conn, conn)  # [x, y, z, k] = (nabla_x L_v nabla)(y, z)^k
    r.add(
        check_zero(
            "(L_v R)(x,y)z = (nabla_x L_v nabla)(y,z) - (nabla_y L_v nabla)(x,z)",
            lvR - (d_lv_conn - d_lv_conn.permute([1, 0, 2, 3])).permute([3, 0, 1, 2]),
        )
    )

    einstein = einstein if einstein is not None else einstein_fit_for(spec, bundle)
    if einstein.is_constant:
        r.add(check_zero("Einstein-like => rho = 2n eta(x)eta", bundle.ricci - spec.eta_eta() * (2 * n)))
        r.add(check_zero("Einstein-like => tau = tau~ = 2n", [bundle.tau - 2 * n, bundle.tau_tilde - 2 * n]))
        a, b, c = einstein.values()
        r.add(Check("Einstein-like => (a,b,c) = (0,0,2n)", (a, b, c) == (0, 0, 2 * n), detail=f"({a}, {b}, {c})"))
        xi_fit = soliton_fit(xi, spec, bundle)
        ok = xi_fit.is_constant and xi_fit.values() == (0, 1, -2 * n - 1)
        got = "(" + ", ".join(map(str, xi_fit.values())) + ")" if xi_fit.is_constant else xi_fit.status
        r.add(Check("potential xi soliton = (0, 1, -2n-1)", ok, detail=got))
    return r
