"""Command-line interface.

Exit codes: 0 success, 1 verification failure or validation diagnostics,
2 usage error or unreadable input, 3 domain error (singular point or matrix).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import coord_systems as cs
from . import field_ops as fo
from . import index_lang as il
from . import matrix_ops as mo
from .dense_tensor import CO, DenseTensor, einsum_eval, load_tensor, transform
from .errors import DomainError, ParseError, ShapeError, ValidationError

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_DOMAIN = 0, 1, 2, 3


@dataclass(frozen=True)
class CliConfig:
    command: str
    tolerance: float = 1e-5
    seed: int = 42
    points: int = 100
    output: str = "json"

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance}")
        if self.points < 1:
            raise ValueError(f"points must be >= 1, got {self.points}")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.output not in ("json", "table"):
            raise ValueError(f"output must be json or table, got {self.output!r}")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# Input helpers
# ---------------------------------------------------------------------------


def _read_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from None


def _read_tensor(path: str) -> DenseTensor:
    doc = _read_json(path)
    if isinstance(doc, dict):
        return DenseTensor.from_dict(doc)
    arr = np.asarray(doc, dtype=float)
    if arr.ndim == 0:
        raise UsageError(f"{path} does not hold a tensor")
    return DenseTensor(arr.shape[0], CO * arr.ndim, arr)


def _read_matrix(path: str) -> np.ndarray:
    t = _read_tensor(path)
    if t.rank != 2:
        raise ShapeError(f"{path} holds a rank-{t.rank} tensor; a matrix is required")
    return np.array(t.components)


def _parse_point(text: str, system: cs.CoordinateSystem) -> np.ndarray:
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if parts and all("=" not in p for p in parts):
        try:
            values = [float(p) for p in parts]
        except ValueError:
            raise UsageError(f"cannot parse point {text!r}") from None
        if len(values) != system.dim:
            raise UsageError(f"point needs {system.dim} coordinates, got {len(values)}")
        return np.array(values)
    assignments = {}
    for p in parts:
        name, sep, value = p.partition("=")
        if not sep:
            raise UsageError(f"expected name=value in {text!r}")
        try:
            assignments[name.strip()] = float(value)
        except ValueError:
            raise UsageError(f"cannot parse {value!r} as a number") from None
    try:
        return system.parse_point(assignments)
    except ShapeError as exc:
        raise UsageError(str(exc)) from None


def _load_system(source: str) -> cs.CoordinateSystem:
    if source in cs.BUILTIN_NAMES:
        return cs.builtin_system(source)
    try:
        return cs.load_coordinate_system(source)
    except OSError as exc:
        raise UsageError(f"{source!r} is neither a built-in system nor a readable descriptor: "
                         f"{exc.strerror or exc}") from None
    except (json.JSONDecodeError, ValueError) as exc:
        raise UsageError(f"bad coordinate descriptor {source!r}: {exc}") from None


def _parse_binding(text: str):
    name, sep, path = text.partition("=")
    if not sep or not name or not path:
        raise UsageError(f"--bind expects name=file, got {text!r}")
    return name.strip(), _read_tensor(path.strip())


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, float):
        return f"{v:.12g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def _table_rows(rows: list[dict]) -> str:
    cols = []
    for r in rows:
        for k in r:
            if k not in cols:
                cols.append(k)
    cells = [[_fmt(r.get(c, "")) for c in cols] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(cols)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(cols, widths)).rstrip(),
             "  ".join("-" * w for w in widths)]
    lines += ["  ".join(x.ljust(w) for x, w in zip(row, widths)).rstrip() for row in cells]
    return "\n".join(lines)


def render_table(obj) -> str:
    """Aligned key/value lines; lists of records become column tables."""
    if isinstance(obj, list) and obj and all(isinstance(r, dict) for r in obj):
        return _table_rows(obj)
    if not isinstance(obj, dict):
        return _fmt(obj)
    scalars = {k: v for k, v in obj.items() if not (isinstance(v, list) and v and isinstance(v[0], dict))}
    blocks = []
    if scalars:
        width = max(len(k) for k in scalars)
        blocks.append("\n".join(f"{k.ljust(width)}  {_fmt(v)}" for k, v in sorted(scalars.items())))
    for k, v in sorted(obj.items()):
        if k not in scalars:
            blocks.append(f"{k}:\n" + _table_rows(v))
    return "\n\n".join(blocks)


def _emit(result, config: CliConfig) -> None:
    if config.output == "table":
        print(render_table(result))
    else:
        print(json.dumps(result, sort_keys=True, indent=2))


def _tensor_doc(t: DenseTensor) -> dict:
    doc = t.to_dict()
    doc["shape"] = [t.dim] * t.rank
    return doc


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_validate(args, config):
    report = il.validate(args.expression, args.mode)
    _emit(report.to_dict(), config)
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_eval(args, config):
    bind = dict(_parse_binding(b) for b in args.bind)
    result = einsum_eval(args.expression, bind, dim=args.dim, mode=args.mode)
    _emit(_tensor_doc(result), config)
    return EXIT_OK


def cmd_transform(args, config):
    t = _read_tensor(args.tensor)
    if args.weight is not None:
        t = DenseTensor(t.dim, t.variance, t.components, args.weight)
    jac = _read_matrix(args.jacobian)
    inv = _read_matrix(args.inverse_jacobian) if args.inverse_jacobian else None
    _emit(_tensor_doc(transform(t, jac, inv)), config)
    return EXIT_OK


def cmd_det(args, config):
    A = _read_matrix(args.matrix)
    methods = mo.DET_METHODS if args.method == "all" else (args.method,)
    _emit({m: mo.det_epsilon(A, m) for m in methods}, config)
    return EXIT_OK


def cmd_inverse(args, config):
    _emit(_tensor_doc(mo.inverse_epsilon(_read_tensor(args.matrix))), config)
    return EXIT_OK


def cmd_invariants(args, config):
    A = _read_matrix(args.matrix)
    result = mo.invariants(A).as_dict()
    if args.with_matrix:
        B = _read_matrix(args.with_matrix)
        result = {"invariants": result, "joint": mo.joint_invariants(A, B)}
    _emit(result, config)
    return EXIT_OK


def cmd_christoffel(args, config):
    system = _load_system(args.system)
    point = _parse_point(args.at, system)
    gamma = cs.christoffel2(system, point, use_analytic=not args.fd)
    entries = [{"k": k + 1, "i": i + 1, "j": j + 1, "value": v}
               for k, i, j, v in gamma.nonzero(args.zero_tol)]
    result = {
        "system": system.name,
        "coords": list(system.coord_names),
        "point": [float(x) for x in point],
        "partials": "finite-difference" if args.fd else "analytic",
        "nonzero": entries,
    }
    _emit(result, config)
    return EXIT_OK


def cmd_covderiv(args, config):
    system = _load_system(args.system)
    point = _parse_point(args.at, system)
    if args.tensor:
        t = _read_tensor(args.tensor)
        fld = cs.TensorField(t.dim, t.variance, lambda x, c=t.components: c)
    else:
        fld = cs.metric_field(system)
    result = cs.covariant_derivative(fld, system, point, use_analytic_metric=not args.fd)
    _emit(_tensor_doc(result), config)
    return EXIT_OK


def cmd_verify_identities(args, config):
    cases = [args.only] if args.only else list(fo.CASE_IDS)
    reports = [fo.verify_identity(c, points=config.points, seed=config.seed, tol=config.tolerance,
                                  degree=args.degree, trig=args.trig) for c in cases]
    if config.output == "table":
        print(render_table(reports))
    else:
        print(json.dumps(reports, sort_keys=True, indent=2))
    return EXIT_OK if all(r["pass"] for r in reports) else EXIT_FAIL


def cmd_verify_integral(args, config):
    rng = np.random.default_rng(config.seed)
    results = []
    for k in range(args.fields):
        A = fo.random_polynomial_field(rng, rank=1, degree=args.degree)
        if args.theorem in ("divergence", "both"):
            r = fo.divergence_theorem_check(A, (0.0, 1.0), args.N)
            results.append({"theorem": "divergence", "field": k, **r})
        if args.theorem in ("stokes", "both"):
            r = fo.stokes_check(A, fo.Rectangle(), args.N)
            results.append({"theorem": "stokes", "field": k, **r})
    for r in results:
        r["tol"] = config.tolerance
        r["pass"] = bool(r["rel_error"] < config.tolerance)
    if config.output == "table":
        print(render_table(results))
    else:
        print(json.dumps(results, sort_keys=True, indent=2))
    return EXIT_OK if all(r["pass"] for r in results) else EXIT_FAIL


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", choices=("json", "table"), default="json",
                        help="result format (default: json)")

    parser = argparse.ArgumentParser(prog="tensorkit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("validate", parents=[common], help="check index-notation legitimacy")
    p.add_argument("expression")
    p.add_argument("--mode", choices=(il.STRICT, il.CARTESIAN), default=il.STRICT)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("eval", parents=[common], help="evaluate an expression by the summation convention")
    p.add_argument("expression")
    p.add_argument("--bind", action="append", default=[], metavar="NAME=FILE",
                   help="bind a tensor name to a tensor file (repeatable)")
    p.add_argument("--dim", type=int, default=3)
    p.add_argument("--mode", choices=(il.STRICT, il.CARTESIAN), default=il.CARTESIAN)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("transform", parents=[common], help="change coordinates of a tensor")
    p.add_argument("tensor")
    p.add_argument("--jacobian", required=True, help="matrix file, d(xbar^i)/d(x^j)")
    p.add_argument("--inverse-jacobian", help="matrix file, d(x^i)/d(xbar^j) (default: inverted)")
    p.add_argument("--weight", type=int, help="override the tensor weight")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("det", parents=[common], help="determinant through the permutation symbol")
    p.add_argument("matrix")
    p.add_argument("--method", choices=mo.DET_METHODS + ("all",), default="by_row")
    p.set_defaults(func=cmd_det)

    p = sub.add_parser("inverse", parents=[common], help="3x3 inverse through the permutation symbol")
    p.add_argument("matrix")
    p.set_defaults(func=cmd_inverse)

    p = sub.add_parser("invariants", parents=[common], help="scalar invariants of a 3x3 tensor")
    p.add_argument("matrix")
    p.add_argument("--with", dest="with_matrix", metavar="FILE", help="second tensor for joint invariants")
    p.set_defaults(func=cmd_invariants)

    p = sub.add_parser("christoffel", parents=[common], help="Christoffel symbols of the second kind")
    p.add_argument("system", help="cartesian, cylindrical, spherical or a descriptor file")
    p.add_argument("--at", required=True, help="point, e.g. r=2,theta=1.047,phi=0 (radians)")
    p.add_argument("--fd", action="store_true", help="finite-difference metric partials")
    p.add_argument("--zero-tol", type=float, default=1e-12, help="entries at or below this are omitted")
    p.set_defaults(func=cmd_christoffel)

    p = sub.add_parser("covderiv", parents=[common], help="covariant derivative at a point")
    p.add_argument("system")
    p.add_argument("--at", required=True)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--field", choices=("metric",), default="metric")
    group.add_argument("--tensor", metavar="FILE", help="constant-component tensor field")
    p.add_argument("--fd", action="store_true", help="finite-difference metric partials")
    p.set_defaults(func=cmd_covderiv)

    p = sub.add_parser("verify-identities", parents=[common], help="numerically verify the identity catalog")
    p.add_argument("--points", type=int, default=100)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--tol", type=float, default=1e-5)
    p.add_argument("--degree", type=int, default=3)
    p.add_argument("--trig", action="store_true", help="add sine perturbations to the fields")
    p.add_argument("--only", choices=fo.CASE_IDS, help="run a single identity")
    p.set_defaults(func=cmd_verify_identities)

    p = sub.add_parser("verify-integral", parents=[common], help="divergence and Stokes theorem checks")
    p.add_argument("--theorem", choices=("divergence", "stokes", "both"), default="both")
    p.add_argument("--N", type=int, default=64, help="quadrature points per axis")
    p.add_argument("--fields", type=int, default=3, help="number of random fields")
    p.add_argument("--degree", type=int, default=3)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--tol", type=float, default=1e-3)
    p.set_defaults(func=cmd_verify_integral)
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        config = CliConfig(
            command=args.command,
            tolerance=getattr(args, "tol", 1e-5),
            seed=getattr(args, "seed", 42),
            points=getattr(args, "points", 100),
            output=args.output,
        )
        return args.func(args, config)
    except DomainError as exc:
        print(f"tensorkit: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (UsageError, ParseError, ShapeError, ValidationError, ValueError, KeyError) as exc:
        print(f"tensorkit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
