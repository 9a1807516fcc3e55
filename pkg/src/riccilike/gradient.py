"""Gradient fields, Hessians and gradient Ricci-like soliton checks."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .acbm import sasaki_residual
from .curvature import CurvatureBundle
from .exprring import ScalarExpr
from .frame_tensor import Connection, FrameTensor, contract, covariant_derivative, lie_derivative_metric
from .manifold_input import ManifoldSpec
from .reports import Check, PreconditionError, check_zero
from .soliton import EXACT, FUNCTION, FitResult, fit_soliton_target, soliton_fit


def _require_realization(spec: ManifoldSpec) -> None:
    if spec.realization is None:
        raise PreconditionError("gradient computations need a coordinate realization of the frame")


def gradient_field(f: ScalarExpr, spec: ManifoldSpec) -> FrameTensor:
    """``(grad f)^i = G^{ij} e_j(f)``."""
    _require_realization(spec)
    return spec.metric.raise_index(spec.frame.derivative_form(f))


def hessian_forms(f: ScalarExpr, spec: ManifoldSpec, conn: Connection) -> tuple[FrameTensor, FrameTensor]:
    """The Hessian computed as ``nabla df`` and as ``g(nabla grad f, .)``."""
    _require_realization(spec)
    via_df = covariant_derivative(spec.frame.derivative_form(f), conn)
    d_grad = covariant_derivative(gradient_field(f, spec), conn)  # [i, k]
    via_grad = contract(d_grad.tensor(spec.metric_tensor()), 1, 2)
    return via_df, via_grad


def hessian(f: ScalarExpr, spec: ManifoldSpec, conn: Connection) -> FrameTensor:
    via_df, via_grad = hessian_forms(f, spec, conn)
    if not (via_df - via_grad).is_zero():
        raise ArithmeticError("Hessian forms disagree; the connection is not metric")
    return via_df


def laplacian(hess: FrameTensor, spec: ManifoldSpec) -> ScalarExpr:
    """Trace of the Hessian with respect to g."""
    Ginv = spec.metric.Ginv
    out = ScalarExpr.zero(spec.table)
    for i in range(spec.dim):
        for j in range(spec.dim):
            if Ginv[i][j]:
                out = out + hess[i, j] * Ginv[i][j]
    return out


@dataclass
class GradientSolitonReport:
    potential_function: str
    grad_v: FrameTensor
    hess: FrameTensor
    laplacian: ScalarExpr
    fit: FitResult
    checks: list[Check] = field(default_factory=list)
    trivial: bool = False
    warnings: list[str] = field(default_factory=list)

    @property
    def accepted(self) -> bool:
        return self.fit.status == EXACT and not self.trivial and all(c.passed for c in self.checks)

    def lines(self) -> list[str]:
        out = [f"function: {self.potential_function}"]
        out += [f"grad {line}" for line in self.grad_v.format(self.potential_function)]
        out.append(f"laplacian: {self.laplacian}")
        out += self.fit.lines()
        out += [c.line() for c in self.checks]
        out += [f"warning: {w}" for w in self.warnings]
        return out

    def to_dict(self) -> dict:
        return {
            "function": self.potential_function,
            "grad": [str(c) for c in self.grad_v.components],
            "laplacian": str(self.laplacian),
            "trivial": self.trivial,
            "fit": self.fit.to_dict(),
            "checks": [c.to_dict() for c in self.checks],
            "warnings": self.warnings,
            "accepted": self.accepted,
        }


def gradient_soliton_check(f: ScalarExpr, spec: ManifoldSpec, bundle: CurvatureBundle, name: str = "f") -> GradientSolitonReport:
    """Fit ``Hess f + rho + lambda g + mu g~ + nu eta(x)eta = 0`` and check its consequences."""
    _require_realization(spec)
    conn, n = bundle.conn, spec.n
    grad = gradient_field(f, spec)
    via_df, via_grad = hessian_forms(f, spec, conn)
    hess = via_df
    lap = laplacian(hess, spec)
    sasaki = sasaki_residual(spec, conn).is_zero()
    fit = fit_soliton_target(-(hess + bundle.ricci), spec, sasaki)

    checks = [
        check_zero("Hess via nabla df = Hess via nabla grad f", via_df - via_grad),
        check_zero("Hess symmetric", hess - hess.permute([1, 0])),
        check_zero("1/2 L_grad g = Hess", lie_derivative_metric(grad, conn, bundle.metric) * Fraction(1, 2) - hess),
        check_zero("laplacian = div grad", lap - contract(covariant_derivative(grad, conn), 0, 1).value()),
    ]
    warnings = []
    trivial = grad.is_zero()
    if trivial:
        warnings.append(f"trivial: {name} is constant")
    if not sasaki:
        warnings.append("not Sasaki-like: only the Hessian and Laplacian equations are checked")

    wit = ""
    if fit.witness is not None:
        i, j, mono = fit.witness
        wit = f"witness ({i},{j}) {mono}"
    checks.append(Check("exact constant fit", fit.status == EXACT, None, f"{fit.status} {wit}".strip()))

    if fit.status in (EXACT, FUNCTION):
        lam, mu, nu = fit.coefficients
        checks.append(check_zero("laplacian equation", lap + bundle.tau + lam * (2 * n + 1) + mu + nu))
    if fit.status == EXACT and sasaki:
        lam, mu, nu = fit.values()
        xi, eta = spec.xi, spec.eta
        Q, phi = bundle.Q, spec.phi_tensor()
        rhs = FrameTensor.from_function(
            "du", spec.dim, spec.table,
            lambda i, k: -Q[k, i] - lam * int(i == k) - mu * phi[k, i] - (mu + nu) * eta[i] * xi[k],
        )
        checks.append(check_zero("nabla_x grad f = -Qx - lambda x - mu phi x - (mu+nu) eta(x) xi", covariant_derivative(grad, conn) - rhs))
        checks.append(check_zero("lambda + mu + nu = -2n", ScalarExpr.constant(spec.table, lam + mu + nu + 2 * n)))
        checks.append(check_zero("tau = 2n", bundle.tau - 2 * n))
        checks.append(check_zero("tau~ = 2n", bundle.tau_tilde - 2 * n))
        checks.append(check_zero("rho = 2n eta(x)eta", bundle.ricci - spec.eta_eta() * (2 * n)))
        cross = soliton_fit(grad, spec, bundle)
        agree = cross.status == EXACT and cross.values() == (lam, mu, nu)
        checks.append(Check("agrees with soliton fit of grad f", agree, None, cross.status))
    return GradientSolitonReport(name, grad, hess, lap, fit, checks, trivial, warnings)
