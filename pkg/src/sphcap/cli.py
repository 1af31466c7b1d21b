"""Command-line front end: capacity curves, bound evaluations, reference
tables, sweeps and Monte Carlo feasibility runs, emitted as CSV, JSON or
aligned text.

Exit codes: 0 success, 2 usage error, 3 numeric failure (a structured
error record is printed to stderr).  Output is deterministic for a fixed
command line (including --seed) and files are written atomically.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass
from typing import Optional, Sequence

from . import capacity as cap
from . import empirical as emp
from . import lifted
from .capacity import BracketError
from .lifted import OptimizationError
from .scalars import QuadratureError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3

OUTPUT_DIR_ENV = "SPHCAP_OUTPUT_DIR"

CAPACITY_FIELDS = ("kappa", "alpha_u", "alpha_u_low", "c3_opt", "gamma_opt", "residual")
BOUND_FIELDS = ("c3", "gamma_per", "gamma_hat", "i_sph", "i_per", "lower_bound")
TABLE_FIELDS = ("kappa", "quantity", "reference", "computed", "abs_dev", "rel_dev")
EMPIRICAL_FIELDS = (
    "n", "m", "alpha", "kappa", "entry_dist", "trials", "restarts",
    "fraction_feasible", "mean_xi_over_sqrt_n",
)


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    kappa: Optional[float] = None
    kappa_grid: Optional[tuple[float, ...]] = None
    alpha: Optional[float] = None
    c3: Optional[float] = None
    gamma_per: Optional[float] = None
    n: int = 0
    trials: int = 0
    restarts: Optional[int] = None
    seed: int = 0
    tol: float = 1e-6
    entry_dist: str = "gaussian"
    output_format: str = "text"
    output_path: Optional[str] = None


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.10g}"
    return str(value)


def _round10(value):
    if isinstance(value, float):
        return float(f"{value:.10g}")
    return value


def _render_csv(fieldnames, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fieldnames)
    for row in rows:
        writer.writerow([_fmt(row[f]) for f in fieldnames])
    return buf.getvalue()


def _render_json(fieldnames, rows) -> str:
    payload = [{f: _round10(row[f]) for f in fieldnames} for row in rows]
    return json.dumps(payload, indent=2) + "\n"


def _render_text(fieldnames, rows) -> str:
    cells = [[_fmt(row[f]) for f in fieldnames] for row in rows]
    widths = [
        max(len(name), *(len(c[i]) for c in cells)) if cells else len(name)
        for i, name in enumerate(fieldnames)
    ]
    lines = ["  ".join(name.ljust(w) for name, w in zip(fieldnames, widths)).rstrip()]
    for c in cells:
        lines.append("  ".join(v.ljust(w) for v, w in zip(c, widths)).rstrip())
    return "\n".join(lines) + "\n"


def _tables_text(comparison: cap.TableComparison) -> str:
    """Wide layout: one column per margin, one row per quantity."""
    kappas = sorted({r.kappa for r in comparison.rows}, reverse=True)
    by_key = {(r.kappa, r.quantity): r for r in comparison.rows}
    quantities = ("c3_opt", "gamma_opt", "alpha_u_low", "alpha_u")
    header = ["quantity"] + [f"{k:g}" for k in kappas]
    lines = []
    rows_out = [header]
    for q in quantities:
        for kind in ("ref", "computed"):
            label = f"{q} ({kind})"
            vals = []
            for k in kappas:
                row = by_key[(k, q)]
                vals.append(f"{(row.reference if kind == 'ref' else row.computed):.4f}")
            rows_out.append([label] + vals)
    widths = [max(len(r[i]) for r in rows_out) for i in range(len(header))]
    for r in rows_out:
        lines.append("  ".join(v.rjust(w) for v, w in zip(r, widths)).rstrip())
    worst = max(comparison.rows, key=lambda r: r.abs_dev)
    lines.append(
        f"max |dev|: {worst.abs_dev:.2e} ({worst.quantity} at kappa={worst.kappa:g})"
    )
    return "\n".join(lines) + "\n"


def _write_atomic(text: str, path: str) -> None:
    out_dir = os.environ.get(OUTPUT_DIR_ENV)
    if out_dir and not os.path.isabs(path):
        path = os.path.join(out_dir, path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".sphcap-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(fieldnames, rows, config: RunConfig, text_override: Optional[str] = None) -> None:
    if not rows:
        raise UsageError("nothing to emit: no records were produced")
    if config.output_format == "csv":
        text = _render_csv(fieldnames, rows)
    elif config.output_format == "json":
        text = _render_json(fieldnames, rows)
    else:
        text = text_override if text_override is not None else _render_text(fieldnames, rows)
    if config.output_path:
        _write_atomic(text, config.output_path)
    else:
        sys.stdout.write(text)


def _record_row(rec: cap.CapacityRecord) -> dict:
    return {f: getattr(rec, f) for f in CAPACITY_FIELDS}


def _require_finite(name: str, value: float) -> float:
    if value is None or not math.isfinite(value):
        raise UsageError(f"--{name} must be a finite number")
    return float(value)


def _cmd_capacity(config: RunConfig) -> None:
    rec = cap.alpha_c_lowered(config.kappa, tol=config.tol)
    _emit(CAPACITY_FIELDS, [_record_row(rec)], config)


def _cmd_sweep(config: RunConfig) -> None:
    records = cap.sweep(config.kappa_grid, tol=config.tol)
    _emit(CAPACITY_FIELDS, [_record_row(r) for r in records], config)


def _cmd_tables(config: RunConfig) -> None:
    comparison = cap.reproduce_tables(tol=config.tol)
    rows = [
        {
            "kappa": r.kappa,
            "quantity": r.quantity,
            "reference": r.reference,
            "computed": r.computed,
            "abs_dev": r.abs_dev,
            "rel_dev": r.rel_dev,
        }
        for r in comparison.rows
    ]
    _emit(TABLE_FIELDS, rows, config, text_override=_tables_text(comparison))


def _cmd_bound_eval(config: RunConfig) -> None:
    if config.gamma_per is None or config.c3 == 0.0:
        ev = lifted.lower_bound_L(config.c3, config.alpha, config.kappa)
    else:
        value, _ = lifted.i_per1_closed(config.c3, config.gamma_per, config.kappa)
        i_per_at_gamma = -config.gamma_per + (config.alpha / config.c3) * math.log(value)
        sph = lifted.i_sph(config.c3)
        ev = lifted.BoundEvaluation(
            c3=config.c3,
            gamma_per=config.gamma_per,
            gamma_hat=lifted.gamma_hat(config.c3),
            i_sph=sph,
            i_per=i_per_at_gamma,
            lower_bound=-(-config.c3 / 2.0 + sph + i_per_at_gamma),
        )
    _emit(BOUND_FIELDS, [{f: getattr(ev, f) for f in BOUND_FIELDS}], config)


def _cmd_empirical(config: RunConfig) -> None:
    summary = emp.estimate_feasibility(
        config.n,
        config.alpha,
        config.kappa,
        trials=config.trials,
        restarts=config.restarts,
        seed=config.seed,
        entry_dist=config.entry_dist,
    )
    row = {
        "n": config.n,
        "m": math.ceil(config.alpha * config.n),
        "alpha": config.alpha,
        "kappa": config.kappa,
        "entry_dist": config.entry_dist,
        "trials": config.trials,
        "restarts": config.restarts if config.restarts is not None
        else (emp.DEFAULT_RESTARTS_NEG if config.kappa < 0 else emp.DEFAULT_RESTARTS_NONNEG),
        "fraction_feasible": summary.fraction_feasible,
        "mean_xi_over_sqrt_n": summary.mean_xi_over_sqrt_n,
    }
    _emit(EMPIRICAL_FIELDS, [row], config)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sphcap",
        description="Storage-capacity bounds for the spherical perceptron.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--format", choices=("csv", "json", "text"), default="text",
                       dest="output_format")
        p.add_argument("--output", dest="output_path", default=None,
                       help=f"output file (relative paths resolve under ${OUTPUT_DIR_ENV})")

    p = sub.add_parser("capacity", help="capacity bounds at one margin")
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-6)
    add_common(p)

    p = sub.add_parser("bound-eval", help="evaluate the lifted bound at explicit parameters")
    p.add_argument("--c3", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--gamma-per", type=float, default=None,
                   help="fix gamma_per instead of optimizing it")
    add_common(p)

    p = sub.add_parser("tables", help="compare computed bounds against reference values")
    p.add_argument("--tol", type=float, default=1e-6)
    add_common(p)

    p = sub.add_parser("sweep", help="capacity records over a margin grid")
    p.add_argument("--kappa-start", type=float, default=-1.5)
    p.add_argument("--kappa-stop", type=float, default=0.5)
    p.add_argument("--kappa-step", type=float, default=0.01)
    p.add_argument("--tol", type=float, default=1e-6)
    add_common(p)

    p = sub.add_parser("empirical", help="Monte Carlo feasibility estimate")
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--restarts", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--entry-dist", choices=emp.ENTRY_DISTS, default="gaussian")
    add_common(p)

    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    command = args.command
    kwargs = dict(
        command=command,
        output_format=args.output_format,
        output_path=args.output_path,
    )
    if command == "capacity":
        kwargs["kappa"] = _require_finite("kappa", args.kappa)
        kwargs["tol"] = args.tol
    elif command == "bound-eval":
        kwargs["c3"] = _require_finite("c3", args.c3)
        kwargs["alpha"] = _require_finite("alpha", args.alpha)
        kwargs["kappa"] = _require_finite("kappa", args.kappa)
        if args.gamma_per is not None:
            kwargs["gamma_per"] = _require_finite("gamma-per", args.gamma_per)
        if kwargs["c3"] < 0:
            raise UsageError("--c3 must be nonnegative")
        if kwargs["alpha"] <= 0:
            raise UsageError("--alpha must be positive")
    elif command == "tables":
        kwargs["tol"] = args.tol
    elif command == "sweep":
        start = _require_finite("kappa-start", args.kappa_start)
        stop = _require_finite("kappa-stop", args.kappa_stop)
        step = _require_finite("kappa-step", args.kappa_step)
        if step <= 0:
            raise UsageError("--kappa-step must be positive")
        if stop < start:
            raise UsageError("--kappa-stop must be >= --kappa-start")
        count = int(math.floor((stop - start) / step + 1e-12)) + 1
        grid = tuple(start + i * step for i in range(count))
        if not grid:
            raise UsageError("empty kappa grid")
        kwargs["kappa_grid"] = grid
        kwargs["tol"] = args.tol
    elif command == "empirical":
        kwargs["kappa"] = _require_finite("kappa", args.kappa)
        kwargs["alpha"] = _require_finite("alpha", args.alpha)
        if kwargs["alpha"] <= 0:
            raise UsageError("--alpha must be positive")
        if args.n < 2:
            raise UsageError("--n must be >= 2")
        if args.trials < 1:
            raise UsageError("--trials must be >= 1")
        if args.restarts is not None and args.restarts < 1:
            raise UsageError("--restarts must be >= 1")
        kwargs.update(
            n=args.n, trials=args.trials, restarts=args.restarts,
            seed=args.seed, entry_dist=args.entry_dist,
        )
    if "tol" in kwargs and not (kwargs["tol"] > 0 and math.isfinite(kwargs["tol"])):
        raise UsageError("--tol must be a positive finite number")
    return RunConfig(**kwargs)


_HANDLERS = {
    "capacity": _cmd_capacity,
    "bound-eval": _cmd_bound_eval,
    "tables": _cmd_tables,
    "sweep": _cmd_sweep,
    "empirical": _cmd_empirical,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    try:
        config = _config_from_args(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        _HANDLERS[config.command](config)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (QuadratureError, OptimizationError, BracketError, ValueError,
            FloatingPointError, ArithmeticError) as exc:
        record = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(record), file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        record = {"error": type(exc).__name__, "message": str(exc),
                  "path": config.output_path}
        print(json.dumps(record), file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
