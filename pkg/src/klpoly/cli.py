"""Command-line front end.

Subcommands ``transform``, ``polyconv``, ``watson``, ``audit``, ``solve-th``
and ``plancherel`` each build a :class:`JobSpec`, which :func:`run` executes.
Exit codes: 0 on success, 1 on numeric failure, 2 on input error.

Function expressions follow the grammar

    expr   := term ('+' term)*
    term   := NUMBER '*' term | factor ('*' factor)*
    factor := 'exp(-' A '*x)' | 'exp(-' A '*x^2)' | 'x^' K '*exp(-' A '*x)'
            | 'indicator(' L ',' H ')' | 'table:' PATH | NUMBER | '(' expr ')'

where a number followed by ``*`` scales the rest of the term.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
import tempfile
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import __version__
from .errors import DomainError, InputError, KLPolyError, NumericFailure, ParseError
from .funcmodel import (
    Const,
    ExpDecay,
    FunctionExpr,
    Gaussian,
    GridSpec,
    Indicator,
    PowExp,
    Product,
    Scaled,
    Sum,
    Tabulated,
    load_csv,
)
from .quadrature import DEFAULT_CONFIG, QuadratureConfig

COMMANDS = ("transform", "polyconv", "watson", "audit", "solve-th", "plancherel")
DIGITS = 12
_NUMBER = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_UNSIGNED = re.compile(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_INTEGER = re.compile(r"\d+")


# --------------------------------------------------------------------------
# expression parser


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def fail(self, expected: str, pos: int | None = None):
        raise ParseError(self.text, self.pos if pos is None else pos, expected)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self, lit: str) -> bool:
        self.skip()
        return self.text.startswith(lit, self.pos)

    def eat(self, lit: str):
        self.skip()
        if not self.text.startswith(lit, self.pos):
            self.fail(repr(lit))
        self.pos += len(lit)

    def match(self, rx: re.Pattern, what: str) -> str:
        self.skip()
        m = rx.match(self.text, self.pos)
        if not m:
            self.fail(what)
        self.pos = m.end()
        return m.group(0)

    def number(self, unsigned=False) -> float:
        return float(self.match(_UNSIGNED if unsigned else _NUMBER, "a number"))

    def parse(self) -> FunctionExpr:
        self.skip()
        if self.pos == len(self.text):
            self.fail("an expression")
        e = self.expr()
        self.skip()
        if self.pos != len(self.text):
            self.fail("'+', '*' or end of input")
        return e

    def expr(self) -> FunctionExpr:
        e = self.term()
        while self.peek("+"):
            self.eat("+")
            e = Sum(e, self.term())
        return e

    def term(self) -> FunctionExpr:
        self.skip()
        m = _NUMBER.match(self.text, self.pos)
        if m:
            c = float(m.group(0))
            self.pos = m.end()
            if self.peek("*"):
                self.eat("*")
                return Scaled(c, self.term())
            e = Const(c)
        else:
            e = self.factor()
        while self.peek("*"):
            self.eat("*")
            e = Product(e, self.factor())
        return e

    def factor(self) -> FunctionExpr:
        self.skip()
        start = self.pos
        try:
            if self.peek("("):
                self.eat("(")
                e = self.expr()
                self.eat(")")
                return e
            if self.peek("exp("):
                self.eat("exp(")
                self.eat("-")
                if self.peek("x"):
                    a = 1.0
                else:
                    a = self.number(unsigned=True)
                    self.eat("*")
                self.eat("x")
                if self.peek("^"):
                    self.eat("^")
                    if self.match(_INTEGER, "2") != "2":
                        self.fail("2", self.pos - 1)
                    self.eat(")")
                    return Gaussian(a)
                self.eat(")")
                return ExpDecay(a)
            if self.peek("x^"):
                self.eat("x^")
                k = int(self.match(_INTEGER, "a non-negative integer"))
                self.eat("*")
                self.eat("exp(")
                self.eat("-")
                a = 1.0 if self.peek("x") else self.number(unsigned=True)
                if not self.peek("x"):
                    self.eat("*")
                self.eat("x")
                self.eat(")")
                return PowExp(k, a)
            if self.peek("indicator("):
                self.eat("indicator(")
                lo = self.number()
                self.eat(",")
                hi = self.number()
                self.eat(")")
                if not hi > lo:
                    self.fail("indicator bounds with hi > lo", start)
                return Indicator(lo, hi)
            if self.peek("table:"):
                self.eat("table:")
                m = re.compile(r"[^+*()\s]+").match(self.text, self.pos)
                if not m:
                    self.fail("a CSV path")
                self.pos = m.end()
                path = m.group(0)
                return Tabulated(load_csv(path), source=path)
        except DomainError as exc:
            raise ParseError(self.text, start, f"valid parameters ({exc})") from exc
        if _NUMBER.match(self.text, self.pos):
            return Const(self.number())
        self.fail("exp(, x^, indicator(, table:, a number or '('")


def parse_function(text: str) -> FunctionExpr:
    """Parse a function expression (whitespace-insensitive)."""
    return _Parser(text).parse()


def parse_grid(text: str) -> GridSpec:
    """``lo:hi:n[:log]`` or a comma-separated list of nodes."""
    try:
        if ":" not in text:
            return GridSpec.explicit([float(v) for v in text.split(",")])
        parts = text.split(":")
        if len(parts) not in (3, 4) or (len(parts) == 4 and parts[3] != "log"):
            raise InputError(f"grid {text!r} is not lo:hi:n[:log]")
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
        return GridSpec.log_uniform(lo, hi, n) if len(parts) == 4 else GridSpec.uniform(lo, hi, n)
    except ValueError as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"cannot parse grid {text!r}") from exc


# --------------------------------------------------------------------------
# output


def _fmt(v) -> str:
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.{DIGITS}g}"


def _round(obj):
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return float(_fmt(v)) if math.isfinite(v) else _fmt(v)
    if isinstance(obj, dict):
        return {str(k): _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_round(v) for v in obj]
    return str(obj)


def dumps_json(obj) -> str:
    return json.dumps(_round(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def dumps_table(header: Sequence[str], columns: Sequence[Sequence[float]]) -> str:
    lines = [",".join(header)]
    for row in zip(*columns):
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def write_atomic(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".klpoly-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# --------------------------------------------------------------------------
# jobs


@dataclass
class JobSpec:
    command: str
    inputs: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    grids: dict = field(default_factory=dict)
    quad: QuadratureConfig = DEFAULT_CONFIG
    output_path: str | None = None
    format: str = "csv"

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise InputError(f"unknown command {self.command!r}")
        if self.format not in ("csv", "json"):
            raise InputError("format must be csv or json")

    @classmethod
    def from_dict(cls, d: dict) -> "JobSpec":
        try:
            quad = QuadratureConfig(**d.get("quad", {}))
            inputs = {k: parse_function(v) for k, v in d.get("inputs", {}).items()}
            grids = {k: parse_grid(v) for k, v in d.get("grids", {}).items()}
            return cls(d["command"], inputs, dict(d.get("params", {})), grids, quad,
                       d.get("output_path"), d.get("format", "csv"))
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed job: {exc}") from exc


def _need(job: JobSpec, *names: str) -> list[FunctionExpr]:
    missing = [n for n in names if n not in job.inputs]
    if missing:
        raise InputError(f"{job.command} needs --{', --'.join(missing)}")
    return [job.inputs[n] for n in names]


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("KLPOLY_THREADS", "1")))
    except ValueError as exc:
        raise InputError("KLPOLY_THREADS must be an integer") from exc


def _beta(job: JobSpec) -> float:
    return float(job.params.get("beta", 0.5))


def _run_transform(job: JobSpec) -> str:
    from .transforms import DEFAULT_YGRID, fourier_cosine, fourier_sine, kl_transform

    (f,) = _need(job, "f")
    grid = job.grids.get("ygrid", job.grids.get("grid", DEFAULT_YGRID))
    kind = job.params.get("kind", "sine")
    fn = {"sine": fourier_sine, "cosine": fourier_cosine, "kl": kl_transform}.get(kind)
    if fn is None:
        raise InputError("--kind must be sine, cosine or kl")
    res = fn(f, grid, job.quad)
    if job.format == "json":
        return dumps_json({"kind": kind, "y": res.spectrum.x, "value": res.spectrum.y,
                           "max_error_estimate": res.max_error_estimate})
    return dumps_table(("y", kind), (res.spectrum.x, res.spectrum.y))


def _run_polyconv(job: JobSpec) -> str:
    from .convolutions import (
        PolyconvInput,
        polyconv_composed,
        polyconv_direct,
        polyconv_spectral_at,
    )

    f, g, h = _need(job, "f", "g", "h")
    inp = PolyconvInput(f, g, h, _beta(job))
    xs = job.grids.get("grid", GridSpec.explicit([0.5, 1, 2, 4, 8])).points()
    paths = job.params.get("paths", "direct,spectral,composed").split(",")
    table = {
        "direct": lambda: polyconv_direct(inp, xs, job.quad),
        "spectral": lambda: polyconv_spectral_at(inp, xs, job.quad),
        "composed": lambda: polyconv_composed(inp, xs, job.quad),
    }
    bad = [p for p in paths if p not in table]
    if bad or not paths:
        raise InputError(f"unknown path(s) {bad}; expected direct, spectral, composed")
    cols = [np.asarray(table[p](), dtype=float) for p in paths]
    dev = np.zeros(xs.shape)
    for i in range(len(cols)):
        for j in range(i + 1, len(cols)):
            dev = np.maximum(dev, np.abs(cols[i] - cols[j]))
    if job.format == "json":
        return dumps_json({"x": xs, **dict(zip(paths, cols)), "max_pairwise_deviation": dev,
                           "max_deviation": float(dev.max())})
    return dumps_table(("x", *paths, "max_pairwise_deviation"), (xs, *cols, dev))


def _watson_source(job: JobSpec):
    from .watson import MultiplierTheta, WatsonPair

    if "theta" in job.params:
        return MultiplierTheta.constant(float(job.params["theta"]))
    g, h = _need(job, "g", "h")
    return WatsonPair(g, h, _beta(job))


def _run_watson(job: JobSpec) -> str:
    from .watson import (
        WatsonPair,
        check_condition_unitary,
        l1_linfty_bound_audit,
        watson_apply_direct,
        watson_apply_spectral,
    )

    (f,) = _need(job, "f")
    src = _watson_source(job)
    grid = job.grids.get("grid", GridSpec.uniform(0.0, 8.0, 17))
    xs = grid.points()
    spec = watson_apply_spectral(f, src, grid, job.quad).y
    header, cols = ["x", "spectral"], [xs, spec]
    flags = ()
    if job.params.get("direct", False) and isinstance(src, WatsonPair):
        step = float(job.params.get("fd_step", 1e-2))
        d, flags = watson_apply_direct(f, src, grid, step, job.quad, return_flags=True)
        header.append("direct")
        cols.append(d.y)
    if job.format == "json":
        out = dict(zip(header, cols))
        out["unitarity"] = check_condition_unitary(src, cfg=job.quad).to_dict()
        out["l1_linfty"] = l1_linfty_bound_audit(f, src, job.quad).to_dict()
        out["richardson_flags"] = list(flags)
        return dumps_json(out)
    return dumps_table(header, cols)


def _run_audit(job: JobSpec) -> str:
    from .convolutions import kernel_bound_audit
    from .inequalities import SUITES, audit_suite

    suite = job.params.get("suite", "all")
    seed = int(job.params.get("seed", 7))
    count = int(job.params.get("count", 20))
    kinds = (*SUITES, "kernel") if suite == "all" else (suite,)
    reports = []
    for kind in kinds:
        if kind == "kernel":
            pts = (0.5, 1.0, 2.0)
            for a in pts:
                for b in pts:
                    for c in pts:
                        reports += kernel_bound_audit(a, b, c, job.quad)
        elif kind in SUITES:
            reports += audit_suite(kind, seed, count, _beta(job), job.quad, _workers())
        else:
            raise InputError(f"unknown suite {kind!r}")
    return dumps_json([r.to_dict() for r in reports])


def _run_solve(job: JobSpec) -> str:
    from .thsolver import solve_th

    xi, phi, h = _need(job, "xi", "phi", "h")
    grid = job.grids.get("grid", GridSpec.uniform(0.0, 10.0, 101))
    rep = solve_th(xi, phi, h, _beta(job), grid, job.quad,
                   delta=float(job.params.get("delta", 1e-8)))
    if job.format == "csv":
        return dumps_table(("x", "solution"), (rep.solution.x, rep.solution.y))
    return dumps_json(rep.to_dict())


def _run_plancherel(job: JobSpec) -> str:
    from .watson import plancherel_sequence

    (f,) = _need(job, "f")
    src = _watson_source(job)
    try:
        Ns = [float(v) for v in str(job.params.get("n_list", "1,2,4,8")).split(",")]
    except ValueError as exc:
        raise InputError("--n-list must be comma-separated numbers") from exc
    norms = plancherel_sequence(f, src, Ns, job.quad)
    if job.format == "json":
        return dumps_json({"N": Ns, "norm": norms})
    return dumps_table(("N", "norm"), (Ns, norms))


_RUNNERS = {
    "transform": _run_transform,
    "polyconv": _run_polyconv,
    "watson": _run_watson,
    "audit": _run_audit,
    "solve-th": _run_solve,
    "plancherel": _run_plancherel,
}


def _report_error(exc: Exception, code: int) -> int:
    kind = type(exc).__name__
    sys.stderr.write(json.dumps({"error": kind, "message": str(exc), "exit_code": code},
                                sort_keys=True) + "\n")
    return code


def run(job: JobSpec) -> int:
    """Execute ``job`` and write its output; returns the exit code."""
    try:
        text = _RUNNERS[job.command](job)
        write_atomic(job.output_path, text)
    except NumericFailure as exc:
        return _report_error(exc, 1)
    except (InputError, OSError) as exc:
        return _report_error(exc, 2)
    return 0


# --------------------------------------------------------------------------
# argument handling


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="klpoly", description="Polyconvolution numerics.")
    ap.add_argument("--version", action="version", version=f"klpoly {__version__}")
    sub = ap.add_subparsers(dest="command")
    for name in COMMANDS:
        p = sub.add_parser(name)
        for fn in ("f", "g", "h", "xi", "phi"):
            p.add_argument(f"--{fn}", help="function expression")
        p.add_argument("--beta", type=float)
        p.add_argument("--grid", help="lo:hi:n[:log] or comma list")
        p.add_argument("--ygrid", help="lo:hi:n[:log] or comma list")
        p.add_argument("--tol", type=float, help="absolute tolerance")
        p.add_argument("--paths", help="comma list of direct,spectral,composed")
        p.add_argument("--out", help="output file (default stdout)")
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("--job", help="JSON job file (object or list of objects)")
        p.add_argument("--seed", type=int)
        if name == "transform":
            p.add_argument("--kind", choices=("sine", "cosine", "kl"), default="sine")
        if name in ("watson", "plancherel"):
            p.add_argument("--theta", type=float, help="constant synthetic multiplier")
        if name == "watson":
            p.add_argument("--direct", action="store_true", help="add the direct path")
            p.add_argument("--fd-step", type=float, default=1e-2)
        if name == "audit":
            p.add_argument("--suite", default="all")
            p.add_argument("--count", type=int, default=20)
        if name == "plancherel":
            p.add_argument("--n-list", default="1,2,4,8")
        if name == "solve-th":
            p.add_argument("--delta", type=float, default=1e-8)
    return ap


_PARAM_KEYS = ("beta", "paths", "seed", "kind", "theta", "direct", "fd_step", "suite",
               "count", "n_list", "delta")


def job_from_args(ns: argparse.Namespace) -> JobSpec:
    inputs = {k: parse_function(getattr(ns, k)) for k in ("f", "g", "h", "xi", "phi")
              if getattr(ns, k, None) is not None}
    params = {k: getattr(ns, k) for k in _PARAM_KEYS if getattr(ns, k, None) is not None}
    grids = {k: parse_grid(getattr(ns, k)) for k in ("grid", "ygrid") if getattr(ns, k)}
    quad = DEFAULT_CONFIG if ns.tol is None else QuadratureConfig(abs_tol=ns.tol)
    default_fmt = "json" if ns.command in ("audit", "solve-th") else "csv"
    return JobSpec(ns.command, inputs, params, grids, quad, ns.out, ns.format or default_fmt)


def _jobs_from_file(path: str, command: str) -> list[JobSpec]:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read job file {path}: {exc}") from exc
    items = data if isinstance(data, list) else [data]
    jobs = []
    for d in items:
        if not isinstance(d, dict):
            raise InputError("job entries must be objects")
        d = {"command": command, **d}
        jobs.append(JobSpec.from_dict(d))
    return jobs


_VALUE_FLAGS = ("--f", "--g", "--h", "--xi", "--phi", "--grid", "--ygrid")


def _join_values(argv: Sequence[str]) -> list[str]:
    # argparse reads "-2*exp(-x)" as an option; bind such values to their flag
    out, args = [], list(argv)
    i = 0
    while i < len(args):
        if args[i] in _VALUE_FLAGS and i + 1 < len(args) and args[i + 1].startswith("-"):
            out.append(f"{args[i]}={args[i + 1]}")
            i += 2
        else:
            out.append(args[i])
            i += 1
    return out


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    ns = ap.parse_args(_join_values(sys.argv[1:] if argv is None else argv))
    if ns.command is None:
        ap.print_help(sys.stderr)
        return 2
    try:
        jobs = _jobs_from_file(ns.job, ns.command) if ns.job else [job_from_args(ns)]
    except KLPolyError as exc:
        return _report_error(exc, 2 if isinstance(exc, InputError) else 1)
    code = 0
    for job in jobs:
        code = max(code, run(job))
    return code


if __name__ == "__main__":
    raise SystemExit(main())
