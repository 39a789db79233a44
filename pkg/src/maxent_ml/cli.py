"""Command-line front end.

Problem files are JSON objects, one of two shapes::

    {"potential": [0, 1], "frequencies": [0.75, 0.25]}
    {"X": [[1, 0, 0], [0, 1, 0]], "y": [0.2, 0.3]}

``counts`` may replace ``frequencies``; ``u``/``r`` are accepted as short
names.  An optional ``"config"`` object overrides solver settings.  Reports
repeat the problem fields, so a report is itself a valid problem file.

Exit codes: 0 success, 1 input error, 2 infeasible, 3 non-convergence (or a
failed ``check``).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import re
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import __version__
from .core import (
    ConstraintSystem,
    Sample,
    as_pmf,
    as_potential,
    dist,
    log_likelihood,
    shannon_entropy,
    to_bits,
)
from .errors import (
    EnumerationTooLarge,
    InfeasibleTarget,
    MaxEntError,
    MaxIterExceeded,
    NoCoherentType,
)
from .maxprob import DEFAULT_CAP, default_delta, most_probable_coherent_type
from .oracle import grid_maxent, grid_ml
from .solver import (
    SolverConfig,
    orthogonality_check,
    solve_inverse,
    solve_maxent_coherent,
    solve_ml_scalar,
)

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_NONCONVERGED = 0, 1, 2, 3

_ALIASES = {"u": "potential", "r": "frequencies"}
_PROBLEM_KEYS = {"potential", "frequencies", "counts", "X", "y", "config"}
# keys written by reports; ignored on re-ingestion
_REPORT_KEYS = {"command", "solution", "checks", "status"}
_CONFIG_KEYS = {"tol_residual", "max_iter", "lambda_blowup", "damping"}


class ProblemError(MaxEntError):
    """Malformed problem file; the message carries a line reference."""


@dataclass
class ProblemFile:
    kind: str  # "scalar" or "matrix"
    potential: Optional[np.ndarray] = None
    frequencies: Optional[np.ndarray] = None
    X: Optional[np.ndarray] = None
    y: Optional[np.ndarray] = None
    config: dict = field(default_factory=dict)

    @property
    def system(self) -> ConstraintSystem:
        return ConstraintSystem(self.X, self.y)


def _key_line(text: str, key: str) -> int:
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else 1


def parse_problem(text: str, source: str = "<input>") -> ProblemFile:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(obj, dict):
        raise ProblemError(f"{source}:1: top level must be an object")

    def fail(key, msg):
        raise ProblemError(f"{source}:{_key_line(text, key)}: {key}: {msg}")

    data = {}
    for key, value in obj.items():
        name = _ALIASES.get(key, key)
        if name in _REPORT_KEYS:
            continue
        if name not in _PROBLEM_KEYS:
            fail(key, "unknown field")
        if name in data:
            fail(key, f"given twice (as {name!r})")
        data[name] = (key, value)

    scalar = {"potential", "frequencies", "counts"} & data.keys()
    matrix = {"X", "y"} & data.keys()
    if scalar and matrix:
        fail(sorted(matrix)[0], "cannot mix potential/frequencies with X/y")
    if not scalar and not matrix:
        raise ProblemError(f"{source}:1: expected potential+frequencies or X+y")

    config = {}
    if "config" in data:
        key, cfg = data["config"]
        if not isinstance(cfg, dict):
            fail(key, "must be an object")
        for k, v in cfg.items():
            if k not in _CONFIG_KEYS:
                fail(k, "unknown config field")
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                fail(k, "must be a number")
            config[k] = v

    def vector(name):
        key, v = data[name]
        if not isinstance(v, list) or not all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in v
        ):
            fail(key, "must be a list of numbers")
        a = np.array(v, dtype=float)
        if a.size == 0 or not np.all(np.isfinite(a)):
            fail(key, "must be a nonempty list of finite numbers")
        return a

    if scalar:
        if "potential" not in data:
            raise ProblemError(f"{source}:1: missing potential")
        if ("frequencies" in data) == ("counts" in data):
            raise ProblemError(f"{source}:1: give exactly one of frequencies or counts")
        u = vector("potential")
        if "counts" in data:
            key, v = data["counts"]
            try:
                r = Sample(tuple(v) if isinstance(v, list) else v).frequencies().probs
            except MaxEntError as exc:
                fail(key, str(exc))
        else:
            key = data["frequencies"][0]
            try:
                r = as_pmf(vector("frequencies"))
            except MaxEntError as exc:
                fail(key, str(exc))
        if r.shape != u.shape:
            fail(key, f"length {r.shape[0]} does not match potential length {u.shape[0]}")
        return ProblemFile("scalar", potential=u, frequencies=np.array(r), config=config)

    if "X" not in data or "y" not in data:
        raise ProblemError(f"{source}:1: matrix problems need both X and y")
    key, rows = data["X"]
    if not isinstance(rows, list) or not rows or not all(isinstance(row, list) for row in rows):
        fail(key, "must be a nonempty list of rows")
    if len({len(row) for row in rows}) != 1:
        fail(key, "rows have different lengths")
    try:
        X = np.array(rows, dtype=float)
    except (TypeError, ValueError):
        fail(key, "entries must be numbers")
    y = vector("y")
    try:
        ConstraintSystem(X, y)
    except MaxEntError as exc:
        fail("y" if "y" in str(exc) else key, str(exc))
    return ProblemFile("matrix", X=X, y=y, config=config)


def read_problem(path: str) -> ProblemFile:
    if path == "-":
        return parse_problem(sys.stdin.read(), "<stdin>")
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ProblemError(f"{path}: {exc.strerror}") from None
    return parse_problem(text, path)


# -- output -----------------------------------------------------------------

def fmt_float(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        return json.dumps(str(x))
    return "%.17g" % x


def to_json(obj, indent: int = 0) -> str:
    """JSON with every float written to 17 significant digits."""
    pad = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {to_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + "  " * indent + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if seq and all(isinstance(x, (list, tuple, np.ndarray, dict)) for x in seq):
            return "[\n" + ",\n".join(pad + to_json(x, indent + 1) for x in seq) + "\n" + "  " * indent + "]"
        return "[" + ", ".join(to_json(x, indent + 1) for x in seq) + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(obj)
    return json.dumps(obj)


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}{k}.")
    elif isinstance(obj, list) and obj and isinstance(obj[0], dict):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}{i}.")
    else:
        yield prefix[:-1], obj


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return fmt_float(v)
    return str(v)


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return to_json(report) + "\n"
    rows = []
    for key, value in _flatten(report):
        if isinstance(value, (list, tuple, np.ndarray)):
            flat = np.asarray(value, dtype=object).ravel().tolist() if len(value) else []
            rows.append([key] + [_cell(v) for v in flat])
        else:
            rows.append([key, _cell(value)])
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["field", "value"])
        w.writerows(rows)
        return buf.getvalue()
    return "".join(f"{r[0]}: {' '.join(r[1:])}\n" for r in rows)


def _entropy_field(p, bits: bool) -> dict:
    h = shannon_entropy(p)
    return {"entropy_bits": to_bits(h)} if bits else {"entropy_nats": h}


def _config(problem: ProblemFile, args) -> SolverConfig:
    kw = dict(problem.config)
    if getattr(args, "tol", None) is not None:
        kw["tol_residual"] = args.tol
    if getattr(args, "max_iter", None) is not None:
        kw["max_iter"] = args.max_iter
    return SolverConfig(**kw)


def _problem_fields(problem: ProblemFile) -> dict:
    if problem.kind == "scalar":
        out = {"potential": problem.potential, "frequencies": problem.frequencies}
    else:
        out = {"X": problem.X, "y": problem.y}
    if problem.config:
        out["config"] = problem.config
    return out


def _scalar_report(command, problem, sol, args) -> dict:
    u, r = problem.potential, problem.frequencies
    q = sol.pmf
    solution = {
        "lambda": sol.lam,
        "pmf": q.probs,
        "coherence_residual": abs(orthogonality_check(u, r, sol)),
        "log_likelihood": log_likelihood(r, q),
        **_entropy_field(q, args.bits),
        "iterations": sol.iterations,
        "converged": sol.converged,
        "degenerate": sol.degenerate,
    }
    return {"command": command, **_problem_fields(problem), "solution": solution}


def _inverse_report(command, problem, sol, args) -> dict:
    solution = {
        "lambda": sol.lam,
        "pmf": sol.pmf.probs,
        "residual_inf": sol.residual_inf,
        **_entropy_field(sol.pmf, args.bits),
        "iterations": sol.iterations,
        "converged": sol.converged,
        "degenerate": sol.degenerate,
    }
    return {"command": command, **_problem_fields(problem), "solution": solution}


def _require(problem: ProblemFile, kind: str, command: str):
    if problem.kind != kind:
        want = "a potential/frequencies" if kind == "scalar" else "an X/y"
        raise ProblemError(f"{command} needs {want} problem file")


def cmd_solve_ml(args) -> dict:
    problem = read_problem(args.file)
    _require(problem, "scalar", "solve-ml")
    sol = solve_ml_scalar(problem.potential, problem.frequencies, _config(problem, args))
    return _scalar_report("solve-ml", problem, sol, args)


def cmd_solve_maxent(args) -> dict:
    problem = read_problem(args.file)
    _require(problem, "scalar", "solve-maxent")
    sol = solve_maxent_coherent(problem.potential, problem.frequencies, _config(problem, args))
    return _scalar_report("solve-maxent", problem, sol, args)


def cmd_solve_inverse(args) -> dict:
    problem = read_problem(args.file)
    _require(problem, "matrix", "solve-inverse")
    sol = solve_inverse(problem.system, _config(problem, args))
    return _inverse_report("solve-inverse", problem, sol, args)


def pmf_with_mean(u, c: float) -> np.ndarray:
    """A two-point pmf on argmin/argmax of ``u`` whose mean of ``u`` is ``c``."""
    u = as_potential(u)
    lo, hi = int(np.argmin(u)), int(np.argmax(u))
    r = np.zeros_like(u)
    if lo == hi or u[hi] == u[lo]:
        r[:] = 1.0 / u.shape[0]
        return r
    t = min(max((c - u[lo]) / (u[hi] - u[lo]), 0.0), 1.0)
    r[hi] = t
    r[lo] = 1.0 - t
    return r


def _parse_vector(text: str) -> np.ndarray:
    try:
        return as_potential([float(x) for x in text.replace(" ", "").strip("[]").split(",")])
    except ValueError as exc:
        raise ProblemError(f"--u: {exc}") from None


def cmd_maxprob(args) -> dict:
    u = _parse_vector(args.u)
    if (args.c is None) == (args.lam is None):
        raise ProblemError("give exactly one of --c or --lam")
    c = args.c if args.c is not None else float(np.dot(u, dist(args.lam * u).probs))
    delta = args.delta if args.delta is not None else default_delta(u, args.N)
    tc = most_probable_coherent_type(args.N, u, c, delta, cap=args.cap)
    freq = tc.frequencies()
    report = {
        "command": "maxprob",
        "N": args.N,
        "potential": u,
        "c": c,
        "delta": delta,
        "type": list(tc.counts),
        "log_multiplicity": tc.log_multiplicity,
        "pmf": freq,
    }
    try:
        sol = solve_inverse(ConstraintSystem(u[None, :], [c]))
    except InfeasibleTarget:
        report.update(solver_pmf=None, l1_distance=None)
    else:
        report.update(solver_pmf=sol.pmf.probs,
                      l1_distance=float(np.abs(freq - sol.pmf.probs).sum()))
    return report


def _check(name, value, tol) -> dict:
    return {"name": name, "value": float(value), "tolerance": tol, "passed": bool(value <= tol)}


def run_checks(problem: ProblemFile, cfg: SolverConfig) -> list:
    """Oracle-agreement checks for one problem; each entry has a pass flag."""
    checks = []
    if problem.kind == "matrix":
        sol = solve_inverse(problem.system, cfg)
        checks.append(_check("residual_inf", sol.residual_inf, cfg.tol_residual))
        if problem.X.shape[0] == 1:
            u = problem.X[0]
            ml = solve_ml_scalar(u, pmf_with_mean(u, problem.y[0]), cfg)
            checks.append(_check("scalar_pmf_agreement",
                                 np.abs(ml.pmf.probs - sol.pmf.probs).max(), 1e-9))
        return checks

    u, r = problem.potential, problem.frequencies
    ml = solve_ml_scalar(u, r, cfg)
    me = solve_maxent_coherent(u, r, cfg)
    checks.append(_check("complementarity_pmf", np.abs(ml.pmf.probs - me.pmf.probs).max(), 1e-8))
    checks.append(_check("complementarity_lambda", abs(ml.lambda0 - me.lam[0]), 1e-8))
    checks.append(_check("orthogonality", abs(orthogonality_check(u, r, ml)), cfg.tol_residual))
    if u.shape[0] <= 3 and not ml.degenerate:
        step = 1e-3
        lam0 = ml.lambda0
        lam_grid = grid_ml(u, r, math.floor(lam0) - 2.0, math.ceil(lam0) + 2.0, step)
        checks.append(_check("grid_ml", abs(lam_grid - lam0), step))
        q = grid_maxent(u, float(np.dot(u, r)))
        checks.append(_check("grid_maxent_l1", np.abs(q.probs - me.pmf.probs).sum(), 0.01))
    return checks


def cmd_check(args) -> dict:
    problem = read_problem(args.file)
    checks = run_checks(problem, _config(problem, args))
    return {"command": "check", **_problem_fields(problem), "checks": checks,
            "status": "pass" if all(c["passed"] for c in checks) else "fail"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="maxent-ml",
        description="Maximum-entropy / maximum-likelihood solvers for y = Xp.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log solver progress")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_file=True):
        if with_file:
            p.add_argument("file", help="problem file, or - for stdin")
        p.add_argument("--format", choices=("json", "csv", "text"), default="json")
        p.add_argument("--tol", type=float, help="constraint residual tolerance")
        p.add_argument("--max-iter", type=int, dest="max_iter")
        p.add_argument("--bits", action="store_true", help="report entropies in bits")

    common(sub.add_parser("solve-ml", help="most likely dist(lam*u) for frequencies r"))
    common(sub.add_parser("solve-maxent", help="most entropic pmf coherent with r on u"))
    common(sub.add_parser("solve-inverse", help="maximum-entropy solution of Xp = y"))
    common(sub.add_parser("check", help="compare solvers against brute-force oracles"))

    mp = sub.add_parser("maxprob", help="most probable coherent sample type")
    common(mp, with_file=False)
    mp.add_argument("--N", type=int, required=True, help="sample size")
    mp.add_argument("--u", required=True, help="potential, comma separated")
    mp.add_argument("--c", type=float, help="target mean of u")
    mp.add_argument("--lam", type=float, help="set c = u . dist(lam * u)")
    mp.add_argument("--delta", type=float, help="coherence window (default range(u)/(2N))")
    mp.add_argument("--cap", type=int, default=DEFAULT_CAP, help="maximum number of types")
    return parser


COMMANDS = {
    "solve-ml": cmd_solve_ml,
    "solve-maxent": cmd_solve_maxent,
    "solve-inverse": cmd_solve_inverse,
    "maxprob": cmd_maxprob,
    "check": cmd_check,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    out = sys.stdout
    try:
        report = COMMANDS[args.command](args)
    except InfeasibleTarget as exc:
        print(f"error: InfeasibleTarget: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except NoCoherentType as exc:
        print(f"error: NoCoherentType: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except MaxIterExceeded as exc:
        print(f"error: MaxIterExceeded: {exc}", file=sys.stderr)
        if exc.best is not None:
            out.write(render({"command": args.command, "status": "not converged",
                              "solution": {"lambda": exc.best.lam, "pmf": exc.best.pmf.probs,
                                           "residual_inf": exc.best.residual_inf,
                                           "iterations": exc.best.iterations,
                                           "converged": False}}, args.format))
        return EXIT_NONCONVERGED
    except EnumerationTooLarge as exc:
        print(f"error: EnumerationTooLarge: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except MaxEntError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    out.write(render(report, args.format))
    if args.command == "check" and report["status"] != "pass":
        return EXIT_NONCONVERGED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
