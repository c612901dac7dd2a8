"""Command-line front end: ``tpldca {solve,compare,counterexample,list}``.

Every run is deterministic given its flags, and the CSV/JSON it writes is
byte-stable (17 significant digits, LF endings, sorted JSON keys). Wall time
goes to a separate ``timing.json`` so the other files can be diffed.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .core import DcError, DcProblem, registry_get, registry_names
from .counterexamples import ap_solution_set_abs, run_example_32
from .dca import (
    INNER_CAP,
    ORACLE_FAULT,
    ConstantZeta,
    InverseSquare,
    SolverConfig,
    SolveTrace,
    criticality_residual,
    souza_solve,
    tpldca_solve,
)
from .inner import halving_solver, ista_solver, subgradient_solver

__all__ = [
    "RunSpec",
    "UsageError",
    "main",
    "run",
    "emit_inner_series",
    "write_trace_csv",
    "read_trace_csv",
    "format_float",
]

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CAP = 2

TRACE_COLUMNS = ("k", "f", "merit", "step_norm", "inner_iters", "gap_descent", "gap_strict")
AP_TABLE_EPS = (0.25, 0.5, 0.9, 0.999999, 1.0, 2.0, 10.0)


class UsageError(DcError):
    """Bad command line or config file; reported with exit code 1 before any output."""


# -- value parsing ------------------------------------------------------------


def _vector(text: str) -> list[float]:
    try:
        vals = [float(t) for t in str(text).replace(" ", "").split(",") if t != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated vector: {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty vector")
    return vals


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in str(text).replace(" ", "").split(",") if t != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text!r}") from None


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


def _formats(text) -> tuple[str, ...]:
    items = text if isinstance(text, (list, tuple)) else str(text).split(",")
    out = tuple(sorted({s.strip() for s in items if s.strip()}))
    bad = [s for s in out if s not in ("csv", "json")]
    if bad or not out:
        raise argparse.ArgumentTypeError(f"formats must be a subset of csv,json; got {text!r}")
    return out


def _choice(*allowed: str) -> Callable[[str], str]:
    def conv(text: str) -> str:
        if text not in allowed:
            raise argparse.ArgumentTypeError(f"expected one of {', '.join(allowed)}; got {text!r}")
        return text

    return conv


def _ista_step(text):
    if str(text) == "auto":
        return "auto"
    return float(text)


# documented override keys: key -> (converter, help)
SOLVER_KEYS: dict[str, tuple[Callable, str]] = {
    "problem": (str, "registry problem (see `list`)"),
    "algorithm": (_choice("tpldca", "souza"), "outer algorithm"),
    "inner": (_choice("ista", "subgradient", "halving"), "inner solver"),
    "sigma": (float, "descent parameter sigma"),
    "lambda": (float, "proximal parameter lambda"),
    "theta": (float, "subdifferential test parameter theta"),
    "rho": (float, "Step-1 eps scaling rho"),
    "gamma": (float, "Step-1 distance scaling gamma"),
    "zeta_schedule": (_choice("inv_square", "const"), "zeta_k = scale/(k+1)^2 or constant"),
    "zeta_scale": (float, "scale (or constant value) of the zeta schedule"),
    "outer_tol": (float, "stop when ||x_{k+1} - x_k|| <= tol"),
    "crit_tol": (float, "criticality tolerance required to declare convergence"),
    "max_outer": (int, "maximum outer iterations"),
    "inner_cap": (int, "maximum inner iterations per outer step"),
    "noise_radius": (float, "Step-1 perturbation radius"),
    "seed": (int, "seed for rand_maxquad and Step-1 noise"),
    "x0": (_vector, "starting point, comma-separated"),
    "x_minus1": (_vector, "previous point x_{-1}, defaults to x0"),
    "n": (int, "rand_maxquad dimension"),
    "p": (int, "rand_maxquad number of pieces"),
    "ista_step": (_ista_step, "ISTA step size or 'auto'"),
    "subgradient_c": (float, "subgradient step constant"),
    "record_inner": (_bool, "record per-inner-iteration gaps"),
    "inner_k": (_int_list, "outer indices whose inner series to write (needs --record-inner)"),
    "output_dir": (str, "directory for output files"),
    "formats": (_formats, "comma-separated subset of csv,json"),
}

COUNTEREXAMPLE_KEYS: dict[str, tuple[Callable, str]] = {
    "theta": (float, "theta"),
    "lambda": (float, "lambda"),
    "imax": (int, "last halving index"),
    "zeta": (float, "relaxation zeta"),
    "sigma": (float, "descent parameter sigma"),
    "output_dir": (str, "directory for output files"),
    "formats": (_formats, "comma-separated subset of csv,json"),
}

COMMAND_KEYS = {
    "solve": SOLVER_KEYS,
    "compare": SOLVER_KEYS,
    "counterexample": COUNTEREXAMPLE_KEYS,
    "list": {},
}

_BOOL_KEYS = {"record_inner"}


@dataclass
class RunSpec:
    """A validated CLI invocation: a command plus a flat map of overrides."""

    command: str
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in COMMAND_KEYS:
            raise UsageError(f"unknown command {self.command!r}")
        allowed = COMMAND_KEYS[self.command]
        unknown = sorted(set(self.overrides) - set(allowed))
        if unknown:
            raise UsageError(f"unknown key(s) for {self.command}: {', '.join(unknown)}")
        conv = {}
        for key, val in self.overrides.items():
            try:
                conv[key] = allowed[key][0](val) if isinstance(val, str) else val
            except (argparse.ArgumentTypeError, ValueError) as exc:
                raise UsageError(f"bad value for {key}: {exc}") from None
        self.overrides = conv

    def get(self, key, default=None):
        return self.overrides.get(key, default)

    @property
    def output_dir(self) -> Path:
        return Path(self.get("output_dir", "."))

    @property
    def formats(self) -> tuple[str, ...]:
        return self.get("formats", ("csv", "json"))


# -- argument parsing ---------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _flag(key: str) -> str:
    return "--" + key.replace("_", "-")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tpldca", description="Inexact proximal linearized DC algorithms.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name, keys in COMMAND_KEYS.items():
        sp = sub.add_parser(name)
        if name != "list":
            sp.add_argument("--config", dest="config_file", default=None, help="flat key=value file; flags win")
        for key, (conv, help_text) in keys.items():
            if key in _BOOL_KEYS:
                sp.add_argument(_flag(key), dest=key, action="store_true", default=argparse.SUPPRESS, help=help_text)
            else:
                sp.add_argument(_flag(key), dest=key, type=conv, default=argparse.SUPPRESS, help=help_text)
    return parser


def read_config_file(path: str | Path) -> dict[str, str]:
    """Parse ``key=value`` lines; blank lines and ``#`` comments are ignored."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from None
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        out[key.lstrip("-").replace("-", "_")] = val
    return out


def parse_args(argv: Sequence[str]) -> RunSpec:
    ns = vars(build_parser().parse_args(list(argv)))
    command = ns.pop("command")
    if command is None:
        raise UsageError("a command is required: solve, compare, counterexample or list")
    config_file = ns.pop("config_file", None)
    merged = read_config_file(config_file) if config_file else {}
    merged.update(ns)
    return RunSpec(command, merged)


# -- serialization ------------------------------------------------------------


def format_float(v) -> str:
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return "%.17g" % v


def _json_safe(v):
    if isinstance(v, dict):
        return {str(k): _json_safe(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_json_safe(x) for x in list(v)]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    return v


def write_json(obj: dict, path: Path) -> None:
    text = json.dumps(_json_safe(obj), sort_keys=True, indent=2, allow_nan=False)
    with open(path, "w", newline="\n") as fh:
        fh.write(text + "\n")


def _write_rows(path: Path, header: Sequence[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(str(c) if isinstance(c, (int, np.integer)) else format_float(c) for c in row))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_trace_csv(trace: SolveTrace, path: Path) -> None:
    rows = [
        (r.k, r.f_value, r.merit, r.step_norm, int(r.inner_iterations), r.gap_descent, r.gap_strict)
        for r in trace.records
    ]
    _write_rows(Path(path), TRACE_COLUMNS, rows)


def read_trace_csv(path: Path) -> dict[str, np.ndarray]:
    """Columns of a trace CSV as float arrays, keyed by header name."""
    lines = Path(path).read_text().splitlines()
    header = lines[0].split(",")
    data = np.array([[float(c) for c in ln.split(",")] for ln in lines[1:]], dtype=float).reshape(-1, len(header))
    return {name: data[:, j] for j, name in enumerate(header)}


def emit_inner_series(trace: SolveTrace, k_values: Sequence[int], out: Path) -> list[Path]:
    """Write ``inner_k{k}.csv`` with columns ``(i, gap_descent, gap_strict)`` for each ``k``."""
    out = Path(out)
    by_k = {r.k: r for r in trace.records}
    for k in k_values:
        if k not in by_k:
            raise DcError(f"k={k} is not in the trace (records 0..{len(trace.records) - 1})")
        if by_k[k].inner_series is None:
            raise DcError("no per-inner series recorded; rerun with --record-inner")
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for k in k_values:
        p = out / f"inner_k{k}.csv"
        _write_rows(p, ("i", "gap_descent", "gap_strict"), by_k[k].inner_series)
        paths.append(p)
    return paths


# -- commands -----------------------------------------------------------------


def _problem(job: RunSpec) -> DcProblem:
    try:
        return registry_get(job.get("problem", "paper2d"), seed=job.get("seed", 0), n=job.get("n"), p=job.get("p"))
    except (KeyError, ValueError) as exc:
        raise UsageError(str(exc).strip("'\"")) from None


def _default_x0(problem: DcProblem) -> np.ndarray:
    if problem.name == "paper2d":
        return np.array([2.5, 1.5])
    if problem.name == "abs1d":
        return np.array([0.5])
    return np.zeros(problem.dim)


def _config(job: RunSpec, algorithm: str) -> SolverConfig:
    base = SolverConfig()
    scale = job.get("zeta_scale", 1.0)
    schedule = ConstantZeta(scale) if job.get("zeta_schedule", "inv_square") == "const" else InverseSquare(scale)
    kwargs = dict(
        sigma=job.get("sigma", base.sigma),
        lam=job.get("lambda", base.lam),
        theta=job.get("theta", base.theta),
        rho=job.get("rho", base.rho),
        gamma=job.get("gamma", base.gamma),
        zeta_schedule=schedule,
        outer_tol=job.get("outer_tol", base.outer_tol),
        crit_tol=job.get("crit_tol", base.crit_tol),
        max_outer=job.get("max_outer", base.max_outer),
        inner_cap=job.get("inner_cap", base.inner_cap),
        noise_radius=job.get("noise_radius", base.noise_radius),
        seed=job.get("seed", base.seed),
        record_inner=job.get("record_inner", False),
        variant=algorithm,
    )
    try:
        return SolverConfig(**kwargs)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _inner(job: RunSpec, problem: DcProblem):
    kind = job.get("inner", "ista" if problem.split is not None else "subgradient")
    if kind == "ista":
        if problem.split is None:
            raise UsageError(f"problem {problem.name} has no ISTA split; use --inner subgradient")
        return ista_solver(job.get("ista_step", "auto"))
    if kind == "subgradient":
        return subgradient_solver(job.get("subgradient_c", 1.0))
    return halving_solver()


def _points(job: RunSpec, problem: DcProblem):
    x0 = np.array(job.get("x0"), dtype=float) if job.get("x0") is not None else _default_x0(problem)
    xm1 = job.get("x_minus1")
    for name, v in (("x0", x0), ("x-minus1", xm1)):
        if v is not None and len(v) != problem.dim:
            raise UsageError(f"--{name} has {len(v)} entries; problem {problem.name} has dimension {problem.dim}")
    return x0, (None if xm1 is None else np.array(xm1, dtype=float))


def _check_inner_k(job: RunSpec) -> None:
    if job.get("inner_k") and not job.get("record_inner", False):
        raise UsageError("--inner-k needs per-inner series; add --record-inner")


def _solve_one(problem, job: RunSpec, algorithm: str):
    config = _config(job, algorithm)
    inner = _inner(job, problem)
    x0, xm1 = _points(job, problem)
    start = time.perf_counter()
    if algorithm == "souza":
        trace = souza_solve(problem, config, inner, x0)
    else:
        trace = tpldca_solve(problem, config, inner, x0, xm1)
    return trace, config, inner, time.perf_counter() - start


def _summary(problem: DcProblem, trace: SolveTrace, config: SolverConfig, inner) -> dict:
    fault = trace.status == ORACLE_FAULT
    out = {
        "problem": problem.name,
        "algorithm": trace.algorithm,
        "inner": inner.name,
        "status": trace.status,
        "x_final": [float(v) for v in trace.x_final],
        "f_final": trace.f_final,
        "criticality_residual": None if fault else criticality_residual(problem, trace.x_final),
        "outer_iterations": len(trace.records),
        "max_inner_iterations": max(int(r.inner_iterations) for r in trace.records),
        "fault": trace.fault,
        "warnings": list(trace.warnings),
    }
    for key, val in config.echo().items():
        out[f"config_{key}"] = val
    if trace.cap_info is not None:
        for key, val in trace.cap_info.items():
            out[f"cap_{key}"] = val
    return out


def _exit_code(trace: SolveTrace) -> int:
    if trace.status == INNER_CAP:
        return EXIT_CAP
    if trace.status == ORACLE_FAULT:
        return EXIT_ERROR
    return EXIT_OK


def _write_solve(out: Path, job: RunSpec, problem, trace, config, inner, wall) -> None:
    out.mkdir(parents=True, exist_ok=True)
    if "csv" in job.formats:
        write_trace_csv(trace, out / "trace.csv")
    if "json" in job.formats:
        write_json(_summary(problem, trace, config, inner), out / "summary.json")
        write_json({"wall_time_seconds": wall}, out / "timing.json")
    if job.get("inner_k"):
        emit_inner_series(trace, job.get("inner_k"), out)


def _cmd_solve(job: RunSpec) -> int:
    _check_inner_k(job)
    problem = _problem(job)
    algorithm = job.get("algorithm", "tpldca")
    trace, config, inner, wall = _solve_one(problem, job, algorithm)
    records = {r.k for r in trace.records}
    missing = [k for k in job.get("inner_k", []) or [] if k not in records]
    if missing:
        raise UsageError(f"--inner-k {missing} beyond the trace (records 0..{len(trace.records) - 1})")
    _write_solve(job.output_dir, job, problem, trace, config, inner, wall)
    print(f"{algorithm}: {trace.status} after {len(trace.records)} outer iterations, f = {format_float(trace.f_final)}")
    return _exit_code(trace)


def _cmd_compare(job: RunSpec) -> int:
    _check_inner_k(job)
    problem = _problem(job)
    results = {alg: _solve_one(problem, job, alg) for alg in ("tpldca", "souza")}
    for alg, (trace, _, _, _) in results.items():
        missing = [k for k in job.get("inner_k", []) or [] if k not in {r.k for r in trace.records}]
        if missing:
            raise UsageError(f"--inner-k {missing} beyond the {alg} trace")
    side = {"problem": problem.name}
    for alg, (trace, config, inner, wall) in results.items():
        _write_solve(job.output_dir / alg, job, problem, trace, config, inner, wall)
        for key, val in _summary(problem, trace, config, inner).items():
            if not key.startswith("config_") and key not in ("problem", "algorithm"):
                side[f"{alg}_{key}"] = val
        print(f"{alg}: {trace.status} after {len(trace.records)} outer iterations, f = {format_float(trace.f_final)}")
    if "json" in job.formats:
        write_json(side, job.output_dir / "compare.json")
    return max(_exit_code(r[0]) for r in results.values())


def _cmd_counterexample(job: RunSpec) -> int:
    theta = job.get("theta", 1.0)
    lam = job.get("lambda", 1.0)
    imax = job.get("imax", 1000)
    zeta = job.get("zeta", 0.1)
    sigma = job.get("sigma", 0.01)
    try:
        report = run_example_32(theta, lam, imax, zeta, sigma)
        config = SolverConfig(sigma=sigma, lam=lam, theta=theta, inner_cap=imax, max_outer=1, variant="souza")
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    # baseline leg: the actual outer loop on the same instance, expected to hit the inner cap
    problem = registry_get("abs1d")
    baseline = souza_solve(problem, config, halving_solver(), [report.x_k])
    baseline_exit = _exit_code(baseline)

    out = job.output_dir
    out.mkdir(parents=True, exist_ok=True)
    ap_rows = [(eps, ap_solution_set_abs(eps).value) for eps in AP_TABLE_EPS]
    if "json" in job.formats:
        doc = report.as_dict()
        doc.update(
            baseline_status=baseline.status,
            baseline_exit_code=baseline_exit,
            baseline_strict_unmet=bool(baseline.cap_info and baseline.cap_info["strict_unmet"]),
            baseline_descent_unmet=bool(baseline.cap_info and baseline.cap_info["descent_unmet"]),
            ap_solution_sets={format_float(e): kind for e, kind in ap_rows},
        )
        write_json(doc, out / "report.json")
    if "csv" in job.formats:
        _write_rows(out / "example32_rows.csv", ("i", "z", "dist_exact", "rhs"), report.rows)
        with open(out / "ap_solution_sets.csv", "w", newline="\n") as fh:
            fh.write("eps,solution_set\n")
            fh.writelines(f"{format_float(e)},{kind}\n" for e, kind in ap_rows)
    print(f"baseline: {baseline.status} (exit {baseline_exit}); baseline_failed_all = {str(report.baseline_failed_all).lower()}")
    print(f"relaxed test accepts at i = {report.tpldca_accept_index}; strict variant at i = {report.strict_accept_index}")
    return EXIT_OK


def run(job: RunSpec) -> int:
    """Execute a validated job and return the process exit code."""
    if job.command == "list":
        for name in registry_names():
            print(name)
        return EXIT_OK
    handler = {"solve": _cmd_solve, "compare": _cmd_compare, "counterexample": _cmd_counterexample}[job.command]
    return handler(job)


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        job = parse_args(sys.argv[1:] if argv is None else argv)
        return run(job)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except DcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
