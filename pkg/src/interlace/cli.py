"""Command-line interface: ``interlace {select,bound,verify}``.

Reads matrices from CSV or Matrix Market files and writes one JSON report.
Exit codes: 0 success, 1 a verified property failed, 2 invalid input,
3 numerical or conditioning failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from . import expected as ex
from .bounds import bound_gcss, bound_submatrix
from .errors import InterlaceError, InvalidInputError, ParseError
from .oracle import enumerate_optimum, random_problem
from .polynomial import maxroot, rel_diff
from .problem import GcrssProblem
from .selection import SelectionConfig, select_gcrss, select_submatrix

MODES = ("gcrss", "gcss", "css", "submatrix")
COMMANDS = ("select", "bound", "verify")


# matrix input ---------------------------------------------------------------


def _number(token: str, line: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise ParseError(f"not a number: {token!r}", line) from None
    if not math.isfinite(value):
        raise InvalidInputError(f"line {line}: non-finite entry {token!r}")
    return value


def _parse_csv(text: str) -> np.ndarray:
    rows: list[list[float]] = []
    for lineno, row in enumerate(csv.reader(text.splitlines()), start=1):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if row[0].lstrip().startswith("#"):
            continue
        values = [_number(tok.strip(), lineno) for tok in row]
        if rows and len(values) != len(rows[0]):
            raise ParseError(f"expected {len(rows[0])} entries, found {len(values)}", lineno)
        rows.append(values)
    if not rows:
        raise ParseError("no data rows", None)
    return np.array(rows, dtype=np.float64)


def _parse_matrix_market(text: str) -> np.ndarray:
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty file", 1)
    header = lines[0].split()
    if len(header) != 5 or header[0].lower() != "%%matrixmarket" or header[1].lower() != "matrix":
        raise ParseError("bad Matrix Market header", 1)
    layout, field, symmetry = (h.lower() for h in header[2:])
    if layout not in ("array", "coordinate") or field not in ("real", "integer", "double"):
        raise ParseError(f"unsupported format {layout} {field}", 1)
    if symmetry != "general":
        raise ParseError(f"unsupported symmetry {symmetry}", 1)
    body = [
        (i, ln.split()) for i, ln in enumerate(lines[1:], start=2) if ln.strip() and not ln.startswith("%")
    ]
    if not body:
        raise ParseError("missing size line", len(lines))
    size_line, size = body[0]
    want = 2 if layout == "array" else 3
    if len(size) != want:
        raise ParseError("bad size line", size_line)
    try:
        dims = [int(t) for t in size]
    except ValueError:
        raise ParseError("bad size line", size_line) from None
    rows, cols = dims[0], dims[1]
    if rows <= 0 or cols <= 0:
        raise ParseError("matrix dimensions must be positive", size_line)
    M = np.zeros((rows, cols))
    entries = body[1:]
    if layout == "array":
        if len(entries) != rows * cols:
            last = entries[-1][0] if entries else size_line
            raise ParseError(f"expected {rows * cols} entries, found {len(entries)}", last)
        flat = []
        for lineno, toks in entries:
            if len(toks) != 1:
                raise ParseError("expected one value per line", lineno)
            flat.append(_number(toks[0], lineno))
        return np.array(flat).reshape((cols, rows)).T.copy()
    if len(entries) != dims[2]:
        last = entries[-1][0] if entries else size_line
        raise ParseError(f"expected {dims[2]} entries, found {len(entries)}", last)
    for lineno, toks in entries:
        if len(toks) != 3:
            raise ParseError("expected 'row col value'", lineno)
        try:
            i, j = int(toks[0]), int(toks[1])
        except ValueError:
            raise ParseError("bad index", lineno) from None
        if not (1 <= i <= rows and 1 <= j <= cols):
            raise ParseError(f"index ({i}, {j}) out of range", lineno)
        M[i - 1, j - 1] += _number(toks[2], lineno)
    return M


def parse_matrix(path: str | Path, fmt: str = "auto") -> np.ndarray:
    """Dense matrix from a CSV or Matrix Market file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc}") from None
    if fmt == "auto":
        fmt = "matrix-market" if text.lstrip().lower().startswith("%%matrixmarket") else "csv"
    if fmt == "csv":
        return _parse_csv(text)
    if fmt == "matrix-market":
        return _parse_matrix_market(text)
    raise InvalidInputError(f"unknown format {fmt!r}")


# run --------------------------------------------------------------------------


@dataclass
class RunSpec:
    command: str
    mode: str = "gcrss"
    A: str | None = None
    B: str | None = None
    C: str | None = None
    k: int = 0
    r: int = 0
    eta: float = 1e-6
    seed: int = 0
    out: str | None = None
    path: str | None = None
    format: str = "auto"
    instances: int = 20

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise InvalidInputError(f"unknown command {self.command!r}")
        if self.mode not in MODES:
            raise InvalidInputError(f"unknown mode {self.mode!r}")
        if self.command == "verify":
            return
        needed = {"gcrss": ("A", "B", "C"), "gcss": ("A", "B"), "css": ("A",), "submatrix": ("A",)}
        missing = [name for name in needed[self.mode] if getattr(self, name) is None]
        if missing:
            raise InvalidInputError(f"mode {self.mode} needs --{' --'.join(missing)}")


def _load(spec: RunSpec):
    A = parse_matrix(spec.A, spec.format)
    B = parse_matrix(spec.B, spec.format) if spec.B else None
    C = parse_matrix(spec.C, spec.format) if spec.C else None
    if spec.mode == "css":
        B = A
    if spec.mode == "submatrix" and A.shape[0] != A.shape[1]:
        raise InvalidInputError("submatrix mode needs a square A")
    return A, B, C


def _problem(spec: RunSpec, A, B, C) -> GcrssProblem:
    if spec.mode == "gcrss":
        return GcrssProblem(A, B, C, spec.k, spec.r)
    return GcrssProblem.column_only(A, B, spec.k)


def _run_select(spec: RunSpec, cfg: SelectionConfig) -> dict:
    A, B, C = _load(spec)
    if spec.mode == "submatrix":
        res = select_submatrix(A, spec.k, spec.r, cfg)
        out = res.to_dict()
        out["submatrix_rows"] = out["S"]
        out["submatrix_cols"] = out["R"]
        out["submatrix_norm"] = math.sqrt(res.residual_spectral_sq)
        return {"selection": out}
    return {"selection": select_gcrss(_problem(spec, A, B, C), cfg).to_dict()}


def _run_bound(spec: RunSpec) -> dict:
    A, B, C = _load(spec)
    if spec.mode == "submatrix":
        return {"bounds": bound_submatrix(A, spec.k).to_dict()}
    prob = _problem(spec, A, B, C)
    out: dict = {"expected_poly_maxroot": maxroot(ex.expected_poly(prob, spec.path))}
    if spec.mode in ("gcss", "css"):
        out["bounds"] = bound_gcss(A, B, spec.k).to_dict()
    return out


def _verify(spec: RunSpec) -> dict:
    """Seeded random instances through the oracle, selection and path checks."""
    rng = np.random.default_rng(spec.seed)
    eta = spec.eta
    checks = {
        name: {"passed": True, "worst_slack": -math.inf, "instances": 0}
        for name in ("sandwich", "path_equivalence", "symmetry", "real_rootedness", "monotonicity")
    }

    def record(name, slack):
        c = checks[name]
        c["instances"] += 1
        c["worst_slack"] = max(c["worst_slack"], slack)
        if slack > 0:
            c["passed"] = False

    for _ in range(spec.instances):
        prob = random_problem(rng)
        res = select_gcrss(prob, SelectionConfig(eta=eta))
        _, _, opt = enumerate_optimum(prob)
        upper = 2 * (prob.k + prob.r) * eta + res.maxroot_bound + 1e-7
        record("sandwich", max(opt**2 - res.residual_spectral_sq - 1e-10, res.residual_spectral_sq - upper))
        lams = [t.lam for t in res.trace]
        record("monotonicity", max([b - a - 2 * eta for a, b in zip(lams, lams[1:])], default=-2 * eta))
        ref = ex.expected_poly_definition(prob)
        worst = max(
            (rel_diff(ref, ex.expected_poly(prob, p)) for p in ex.PATHS if ex.path_applies(prob, p)),
            default=0.0,
        )
        record("path_equivalence", worst - 1e-7)
        lhs, rhs = ex.expected_poly_symmetry_pair(prob)
        record("symmetry", rel_diff(lhs, rhs) - 1e-7)
        roots = ref.roots()
        scale = max(1.0, float(np.max(np.abs(roots), initial=0.0)))
        record(
            "real_rootedness",
            max(float(np.max(np.abs(roots.imag), initial=0.0)) - 1e-6 * scale, -1e-6 - float(np.min(roots.real, initial=0.0))),
        )
    for c in checks.values():
        c["worst_slack"] = float(c["worst_slack"]) if c["instances"] else None
    return {"verify": checks, "all_passed": all(c["passed"] for c in checks.values())}


def run(spec: RunSpec) -> dict:
    """Execute ``spec`` and return the JSON-ready report."""
    spec.validate()
    start = time.perf_counter()
    cfg = SelectionConfig(eta=spec.eta, path_override=spec.path)
    if spec.command == "select":
        body = _run_select(spec, cfg)
    elif spec.command == "bound":
        body = _run_bound(spec)
    else:
        body = _verify(spec)
    report = {
        "version": __version__,
        "run_spec": asdict(spec),
        **body,
        "timings": {"wall_seconds": time.perf_counter() - start},
    }
    return report


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="interlace", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--mode", choices=MODES, default="gcrss")
        p.add_argument("--A", dest="A")
        p.add_argument("--B", dest="B")
        p.add_argument("--C", dest="C")
        p.add_argument("-k", type=int, default=0)
        p.add_argument("-r", type=int, default=0)
        p.add_argument("--eta", type=float, default=1e-6)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out")
        p.add_argument("--path", choices=ex.PATHS)
        p.add_argument("--format", choices=("auto", "csv", "matrix-market"), default="auto")
        p.add_argument("--instances", type=int, default=20, help="verify: number of random instances")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    spec = RunSpec(**vars(args))
    try:
        report = run(spec)
    except InterlaceError as exc:
        print(json.dumps({"error": exc.code, "message": str(exc)}), file=sys.stderr)
        return exc.exit_code
    except np.linalg.LinAlgError as exc:
        print(json.dumps({"error": "linalg", "message": str(exc)}), file=sys.stderr)
        return 3
    text = json.dumps(_jsonable(report), indent=2, allow_nan=False)
    if spec.out:
        Path(spec.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    if spec.command == "verify" and not report["all_passed"]:
        return 1
    return 0
