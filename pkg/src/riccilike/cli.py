"""Command-line front end.

Exit codes: 0 when every applicable check passes, 1 on a failed check,
2 on an input error (unreadable or malformed manifest, unknown name).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable

import yaml

from . import __version__
from .acbm import sasaki_consequence_suite, sasaki_like_test
from .curvature import (
    DEFAULT_STEP,
    DEFAULT_TOLERANCE,
    CurvatureBundle,
    curvature_bundle,
    curvature_report,
    oracle_check,
    random_points,
    special_sections_report,
)
from .exprring import ExprSyntaxError, ScalarExpr
from .frame_tensor import FrameTensor
from .gradient import gradient_soliton_check
from .manifold_input import ManifestError, ManifoldSpec, load_manifest, validate_structure
from .reports import Check, PreconditionError
from .soliton import (
    FitResult,
    einstein_fit_for,
    einstein_like_relations,
    soliton_fit,
    xi_soliton_bridge,
    soliton_identity_suite,
)

OK, CHECK_FAILED, INPUT_ERROR = 0, 1, 2


class InputError(Exception):
    pass


@dataclass
class RunReport:
    manifest: str
    command: str
    values: dict[str, Any] = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    numeric: dict[str, Any] | None = None
    _raw: dict[str, Any] = field(default_factory=dict, repr=False)

    def put(self, key: str, value) -> None:
        self._raw[key] = value
        self.values[key] = exact_value(value)

    def section(self, prefix: str, checks) -> None:
        for c in checks:
            self.checks.append(Check(f"{prefix}: {c.name}", c.passed, c.residual, c.detail))

    @property
    def exit_status(self) -> int:
        return OK if all(c.passed for c in self.checks) else CHECK_FAILED

    def evaluate_at(self, point: dict[str, float]) -> None:
        self.numeric = {"point": point, "values": {}}
        for key, raw in self._raw.items():
            num = numeric_value(raw, point)
            if num is not None:
                self.numeric["values"][key] = num

    def to_dict(self) -> dict[str, Any]:
        out = {
            "manifest": self.manifest,
            "command": self.command,
            "values": self.values,
            "checks": [c.to_dict() for c in self.checks],
            "notes": self.notes,
            "exit_status": self.exit_status,
        }
        if self.numeric is not None:
            out["numeric"] = self.numeric
        return out

    def render_text(self) -> str:
        lines = [f"manifest: {self.manifest}", f"command: {self.command}"]
        for key, val in self.values.items():
            lines += _text_value(key, val)
        lines += [c.line() for c in self.checks]
        lines += [f"note: {n}" for n in self.notes]
        if self.numeric is not None:
            pt = ", ".join(f"{k}={v:g}" for k, v in self.numeric["point"].items())
            lines.append(f"numeric values at ({pt}):")
            for key, val in self.numeric["values"].items():
                lines += ["  " + s for s in _text_value(key, val)]
        passed = sum(c.passed for c in self.checks)
        lines.append(f"summary: {passed}/{len(self.checks)} checks passed")
        lines.append(f"exit status: {self.exit_status}")
        return "\n".join(lines)


def _text_value(key: str, val) -> list[str]:
    if isinstance(val, dict):
        if not val:
            return [f"{key}: 0"]
        out = [f"{key}:"]
        for k, v in val.items():
            out += ["  " + s for s in _text_value(str(k), v)]
        return out
    if isinstance(val, list):
        return [f"{key}: [" + ", ".join(map(str, val)) + "]"]
    return [f"{key}: {val}"]


def exact_value(obj):
    if isinstance(obj, ScalarExpr):
        return str(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, FrameTensor):
        if obj.rank == 0:
            return str(obj.value())
        return {",".join(map(str, idx)): str(e) for idx, e in obj.nonzero_items()}
    if isinstance(obj, FitResult):
        d = obj.to_dict()
        d.pop("checks")
        return d
    if isinstance(obj, dict):
        return {k: exact_value(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [exact_value(o) for o in obj]
    return obj


def numeric_value(obj, point):
    if isinstance(obj, ScalarExpr):
        return obj.evaluate(point)
    if isinstance(obj, FrameTensor):
        vals = obj.evaluate(point)
        return {",".join(map(str, idx)): float(vals[idx]) for idx, _ in obj.nonzero_items()}
    if isinstance(obj, FitResult) and obj.coefficients is not None:
        return {n: c.evaluate(point) for n, c in zip(obj.names, obj.coefficients)}
    if isinstance(obj, dict):
        out = {k: numeric_value(v, point) for k, v in obj.items()}
        return out if all(v is not None for v in out.values()) else None
    return None


# helpers -------------------------------------------------------------------


def _parse_params(items: list[str] | None) -> dict[str, str]:
    out = {}
    for item in items or []:
        name, sep, value = item.partition("=")
        if not sep or not name.strip():
            raise InputError(f"--param expects NAME=VALUE, got {item!r}")
        out[name.strip()] = value.strip()
    return out


def _load(args) -> ManifoldSpec:
    try:
        return load_manifest(args.manifest, _parse_params(args.param))
    except OSError as exc:
        raise InputError(f"cannot read {args.manifest}: {exc.strerror or exc}") from exc
    except (ManifestError, ExprSyntaxError, yaml.YAMLError) as exc:
        raise InputError(f"{args.manifest}: {exc}") from exc


def _parse_point(text: str, spec: ManifoldSpec) -> dict[str, float]:
    coords = spec.table.coordinates
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise InputError(f"--numeric expects comma separated numbers, got {text!r}") from exc
    if len(values) != len(coords):
        raise InputError(f"--numeric needs {len(coords)} values ({', '.join(coords) or 'no coordinates'})")
    return dict(zip(coords, values))


def _lookup(getter: Callable, name: str, what: str):
    try:
        return getter(name)
    except KeyError as exc:
        raise InputError(f"unknown {what} {name!r}") from exc


def _validated(spec: ManifoldSpec, report: RunReport) -> bool:
    v = validate_structure(spec)
    report.section("structure", v.checks)
    return v.accepted


def _put_scalars(report: RunReport, bundle: CurvatureBundle) -> None:
    report.put("tau", bundle.tau)
    report.put("tau_tilde", bundle.tau_tilde)
    report.put("tau_star", bundle.tau_star)


# commands ------------------------------------------------------------------


def cmd_validate(spec: ManifoldSpec, args, report: RunReport) -> None:
    _validated(spec, report)


def cmd_classify(spec: ManifoldSpec, args, report: RunReport) -> None:
    if not _validated(spec, report):
        return
    bundle = curvature_bundle(spec)
    structure = sasaki_like_test(spec, bundle=bundle)
    report.put("sasaki_like", structure.is_sasaki_like)
    if not structure.is_sasaki_like:
        report.put("sasaki_residual", structure.residual)
    ein = einstein_fit_for(spec, bundle)
    report.put("einstein_like", ein)
    _put_scalars(report, bundle)


def cmd_curvature(spec: ManifoldSpec, args, report: RunReport) -> None:
    if not _validated(spec, report):
        return
    bundle = curvature_bundle(spec)
    report.put("connection", FrameTensor("ddu", bundle.conn.gamma, spec.table))
    report.put("R", bundle.R04)
    report.put("ricci", bundle.ricci)
    _put_scalars(report, bundle)
    report.section("curvature", curvature_report(bundle).checks)


def _soliton_exists(spec, bundle, sasaki: bool, potential: str | None) -> bool:
    names = [potential] if potential else []
    if sasaki:
        names.append("xi")
    return any(soliton_fit(spec.vector_field(n), spec, bundle).is_constant for n in names)


def cmd_sections(spec: ManifoldSpec, args, report: RunReport) -> None:
    if not _validated(spec, report):
        return
    bundle = curvature_bundle(spec)
    sasaki = sasaki_like_test(spec, bundle=bundle).is_sasaki_like
    if args.potential:
        _lookup(spec.vector_field, args.potential, "vector field")
    exists = _soliton_exists(spec, bundle, sasaki, args.potential)
    sections = special_sections_report(bundle, soliton_exists=exists, is_sasaki_like=sasaki)
    report.put("phi_holomorphic_sections", {e.generator: e.curvature for e in sections.phi_holomorphic})
    report.put("xi_sections", {e.generator: e.curvature for e in sections.xi_sections})
    report.section("sections", sections.checks)


def _soliton_block(spec, bundle, name: str, report: RunReport, einstein: FitResult | None = None) -> FitResult:
    v = _lookup(spec.vector_field, name, "vector field")
    fit = soliton_fit(v, spec, bundle)
    report.put(f"soliton[{name}]", fit)
    report.section(f"soliton[{name}]", fit.checks)
    report.checks.append(Check(f"soliton[{name}]: exact constant fit", fit.is_constant, detail=fit.status))
    sasaki = sasaki_like_test(spec, bundle=bundle).is_sasaki_like
    if fit.is_constant and sasaki:
        report.section(f"soliton[{name}]", soliton_identity_suite(v, spec, bundle, fit, einstein).checks)
    elif not sasaki:
        report.notes.append(f"soliton[{name}]: not Sasaki-like, theorem suite skipped")
    return fit


def cmd_soliton_fit(spec: ManifoldSpec, args, report: RunReport) -> None:
    if not args.potential:
        raise InputError("soliton-fit needs --potential")
    if not _validated(spec, report):
        return
    _soliton_block(spec, curvature_bundle(spec), args.potential, report)


def _gradient_block(spec, bundle, name: str, report: RunReport) -> None:
    f = _lookup(spec.function, name, "function")
    try:
        g = gradient_soliton_check(f, spec, bundle, name)
    except PreconditionError as exc:
        raise InputError(str(exc)) from exc
    report.put(f"grad {name}", g.grad_v)
    report.put(f"hess {name}", g.hess)
    report.put(f"laplacian {name}", g.laplacian)
    report.put(f"gradient_soliton[{name}]", g.fit)
    report.section(f"gradient[{name}]", g.checks)
    report.checks.append(Check(f"gradient[{name}]: non-trivial", not g.trivial))
    report.notes += [f"gradient[{name}]: {w}" for w in g.warnings]


def cmd_grad_soliton(spec: ManifoldSpec, args, report: RunReport) -> None:
    if not args.function:
        raise InputError("grad-soliton needs --function")
    if not _validated(spec, report):
        return
    _gradient_block(spec, curvature_bundle(spec), args.function, report)


def cmd_check_theorems(spec: ManifoldSpec, args, report: RunReport) -> None:
    if not _validated(spec, report):
        return
    bundle = curvature_bundle(spec)
    report.section("curvature", curvature_report(bundle).checks)
    structure = sasaki_like_test(spec, bundle=bundle)
    report.put("sasaki_like", structure.is_sasaki_like)
    _put_scalars(report, bundle)
    einstein = einstein_fit_for(spec, bundle)
    report.put("einstein_like", einstein)
    if not structure.is_sasaki_like:
        report.notes.append("not Sasaki-like: Sasaki-like suites skipped")
        if args.potential:
            _soliton_block(spec, bundle, args.potential, report)
        if args.function:
            _gradient_block(spec, bundle, args.function, report)
        return
    report.section("sasaki", structure.checks)
    report.section("sasaki", sasaki_consequence_suite(bundle, structure).checks)
    if einstein.is_constant:
        report.section("einstein", einstein_like_relations(einstein, bundle).checks)
    xi_fit = _soliton_block(spec, bundle, "xi", report, einstein)
    if xi_fit.is_constant and einstein.is_constant:
        bridge = xi_soliton_bridge(xi_fit, einstein, spec.n)
        report.section("bridge", bridge.report.checks)
        report.put("bridge_cases", bridge.cases)
    if args.potential and args.potential != "xi":
        _soliton_block(spec, bundle, args.potential, report, einstein)
    exists = _soliton_exists(spec, bundle, True, args.potential)
    sections = special_sections_report(bundle, soliton_exists=exists, is_sasaki_like=True)
    report.section("sections", sections.checks)
    if args.function:
        _gradient_block(spec, bundle, args.function, report)


def cmd_oracle(spec: ManifoldSpec, args, report: RunReport) -> None:
    if spec.realization is None:
        raise InputError("oracle needs a coordinate realization (frame_realization)")
    bundle = curvature_bundle(spec)
    if args.numeric:
        points = [_parse_point(args.numeric, spec)]
    else:
        points = random_points(spec, args.points, args.seed)
    report.put("points", [{k: round(v, 6) for k, v in p.items()} for p in points])
    report.checks.append(oracle_check(bundle, points, args.step, args.tol))


COMMANDS = {
    "validate": (cmd_validate, "parse the manifest and check the structure axioms"),
    "classify": (cmd_classify, "Sasaki-like verdict, Einstein-like fit and scalar curvatures"),
    "curvature": (cmd_curvature, "connection, curvature, Ricci tensor and their invariants"),
    "sections": (cmd_sections, "curvatures of phi-holomorphic sections and xi-sections"),
    "soliton-fit": (cmd_soliton_fit, "fit Ricci-like soliton constants for a potential"),
    "grad-soliton": (cmd_grad_soliton, "gradient Ricci-like soliton check for a function"),
    "check-theorems": (cmd_check_theorems, "run every applicable identity suite"),
    "oracle": (cmd_oracle, "compare curvature with a finite-difference computation"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="riccilike", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--manifest", required=True, help="manifest YAML file")
        p.add_argument("--param", action="append", metavar="NAME=VALUE", help="override a manifest parameter")
        p.add_argument("--potential", help="named vector field (xi is always available)")
        p.add_argument("--function", help="named function")
        p.add_argument("--numeric", metavar="X1,..,XM", help="also evaluate results at this coordinate point")
        p.add_argument("--report", choices=("text", "structured"), default="text")
        if name == "oracle":
            p.add_argument("--step", type=float, default=DEFAULT_STEP)
            p.add_argument("--tol", type=float, default=DEFAULT_TOLERANCE)
            p.add_argument("--points", type=int, default=5)
            p.add_argument("--seed", type=int, default=0)
    return parser


def run(argv: list[str] | None = None) -> tuple[int, RunReport | None, str]:
    """Run a command; returns (exit status, report, rendered output)."""
    parser = build_parser()
    args = parser.parse_args(argv)
    report = RunReport(args.manifest, args.command)
    try:
        spec = _load(args)
        COMMANDS[args.command][0](spec, args, report)
        if args.numeric and args.command != "oracle":
            report.evaluate_at(_parse_point(args.numeric, spec))
    except InputError as exc:
        msg = f"error: {exc}"
        if args.report == "structured":
            msg = json.dumps({"manifest": args.manifest, "command": args.command, "error": str(exc), "exit_status": INPUT_ERROR})
        return INPUT_ERROR, None, msg
    if args.report == "structured":
        text = json.dumps(report.to_dict(), indent=2, sort_keys=False)
    else:
        text = report.render_text()
    return report.exit_status, report, text


def main(argv: list[str] | None = None) -> int:
    try:
        status, _, text = run(argv)
    except SystemExit as exc:  # argparse usage errors
        return INPUT_ERROR if exc.code else OK
    stream = sys.stderr if status == INPUT_ERROR else sys.stdout
    print(text, file=stream)
    return status


if __name__ == "__main__":
    sys.exit(main())
