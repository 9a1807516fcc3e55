"""Check results and reports shared by validation and theorem suites."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .exprring import ScalarExpr
from .frame_tensor import FrameTensor


class PreconditionError(RuntimeError):
    """An operation was called on data that does not meet its hypotheses."""


@dataclass
class Check:
    name: str
    passed: bool
    residual: str | None = None  # worst nonzero residual, as "idx: expr"
    detail: str | None = None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"identity": self.name, "pass": self.passed}
        if self.residual is not None:
            out["residual"] = self.residual
        if self.detail is not None:
            out["detail"] = self.detail
        return out

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        extra = ""
        if self.detail:
            extra += f"  {self.detail}"
        if self.residual:
            extra += f"  residual {self.residual}"
        return f"[{mark}] {self.name}{extra}"


def check_zero(name: str, residual, detail: str | None = None) -> Check:
    """Pass iff ``residual`` (tensor, expression or list of them) is exactly zero."""
    if isinstance(residual, FrameTensor):
        worst = residual.worst_component()
        if worst is None:
            return Check(name, True, detail=detail)
        idx, expr = worst
        return Check(name, False, f"[{','.join(map(str, idx))}] {expr}", detail)
    if isinstance(residual, ScalarExpr):
        return Check(name, residual.is_zero(), None if residual.is_zero() else str(residual), detail)
    if isinstance(residual, (list, tuple)):
        for k, r in enumerate(residual):
            sub = check_zero(name, r, detail)
            if not sub.passed:
                sub.residual = f"#{k} {sub.residual}"
                return sub
        return Check(name, True, detail=detail)
    if residual == 0:
        return Check(name, True, detail=detail)
    return Check(name, False, str(residual), detail)


@dataclass
class ValidationReport:
    checks: list[Check] = field(default_factory=list)
    title: str = ""

    def add(self, check: Check) -> Check:
        self.checks.append(check)
        return check

    def extend(self, checks) -> None:
        self.checks.extend(checks)

    @property
    def accepted(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_list(self) -> list[dict[str, Any]]:
        return [c.to_dict() for c in self.checks]

    def lines(self) -> list[str]:
        return [c.line() for c in self.checks]
