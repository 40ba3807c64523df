"""Command-line front end: ``speciation {solve,sweep,fit,check}``.

Exit codes: 0 success, 1 usage or input error, 2 solver non-convergence,
3 check-suite failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from pathlib import Path

import numpy as np

from . import golden
from .activity import DEBYE_A, ActivityModel
from .checks import SUITES, run_suites
from .conservation import DegenerateMixtureError
from .equilibrium import ConvergenceError, SolverConfig, solve
from .fitting import polyfit
from .presets import PRESETS, preset_text
from .scheme import SchemeError, parse_document
from .sweep import SweepRow, SweepSpec, csv_header, csv_record, run_sweep

EXIT_OK, EXIT_USAGE, EXIT_NONCONVERGED, EXIT_CHECK = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _assignment(text: str) -> tuple[str, str]:
    name, sep, value = text.partition("=")
    if not sep or not name.strip() or not value.strip():
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got {text!r}")
    return name.strip(), value.strip()


def _number_assignment(text: str) -> tuple[str, float]:
    name, value = _assignment(text)
    try:
        return name, float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{value!r} is not a number") from None


def _range(text: str) -> tuple[str, float, float, float | None]:
    name, value = _assignment(text)
    parts = value.split(":")
    if len(parts) not in (2, 3):
        raise argparse.ArgumentTypeError(f"expected NAME=START:STOP[:STEP], got {text!r}")
    try:
        nums = [float(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number in {text!r}") from None
    return name, nums[0], nums[1], nums[2] if len(nums) == 3 else None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--scheme", type=Path, help="scheme DSL file")
    src.add_argument("--preset", choices=sorted(PRESETS), help="built-in scheme")
    common.add_argument("--param", type=_number_assignment, action="append", default=[],
                        metavar="NAME=VAL", help="override a preset constant, e.g. pK6=8.08")
    common.add_argument("--total", type=_number_assignment, action="append", default=[],
                        metavar="NAME=VAL", help="analytical concentration in mol/L")
    common.add_argument("--no-ionic", action="store_true", help="skip the activity correction")
    common.add_argument("--debye-A", type=float, default=DEBYE_A, metavar="A")
    common.add_argument("--tol", type=float, default=None,
                        help="Newton tolerance (default 1e-10)")
    common.add_argument("--precision", type=int, default=4,
                        help="decimals for pH-like columns (default 4)")
    common.add_argument("--out", type=Path, help="write CSV here instead of stdout")
    common.add_argument("--verbose", "-v", action="store_true")

    parser = _Parser(prog="speciation", description="Chemical equilibrium speciation.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("solve", parents=[common], help="solve one mixture")

    p = sub.add_parser("sweep", parents=[common], help="vary one total over a grid")
    p.add_argument("--vary", type=_range, required=True, metavar="NAME=START:STOP[:STEP]")
    p.add_argument("--points", type=int, help="grid points (instead of STEP)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")

    p = sub.add_parser("fit", parents=[common], help="polynomial fit of pH_a")
    p.add_argument("--csv", type=Path, help="fit an existing sweep CSV")
    p.add_argument("--vary", type=_range, metavar="NAME=START:STOP[:STEP]",
                   help="run a live sweep (default B=0.1:0.3 on tris-borate)")
    p.add_argument("--points", type=int, default=None)
    p.add_argument("--degree", type=int, action="append", choices=(1, 2),
                   help="polynomial degree; repeat for several (default 1 and 2)")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("check", parents=[common], help="run verification suites")
    p.add_argument("--suite", action="append", choices=SUITES,
                   help="suite to run; repeatable (default: all)")
    p.add_argument("--oracle", action="store_true", help="shorthand for --suite oracle")
    return parser


def _load(args, default_preset: str | None = None):
    """Scheme plus the totals from the file and the command line."""
    params = dict(args.param)
    if args.scheme is not None:
        if params:
            raise UsageError("--param only applies to --preset schemes")
        text = args.scheme.read_text(encoding="utf-8")
    else:
        name = args.preset or default_preset
        if name is None:
            raise UsageError("give --scheme FILE or --preset NAME")
        text = preset_text(name, **params)
    scheme, totals = parse_document(text)
    totals.update(dict(args.total))
    return scheme, totals


def _config(args) -> SolverConfig:
    return SolverConfig() if args.tol is None else SolverConfig(newton_tol=args.tol)


def _emit(text: str, out: Path | None):
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


def _csv_text(header, records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(records)
    return buf.getvalue()


def cmd_solve(args) -> int:
    scheme, totals = _load(args)
    model = ActivityModel(A=args.debye_A)
    state = solve(scheme, totals, _config(args), model, ionic=not args.no_ionic)
    p = args.precision
    if args.out is not None:
        names = [m.name for m in state.moieties]
        row = SweepRow(totals=totals, pH=state.pH, pH_a=state.pH_a, pH_I0=state.pH_I0,
                       I=state.I, gamma=state.gamma,
                       status="ok" if state.converged else "not-converged",
                       newton_iters=state.newton_iters, corr_iters=state.correction_iters)
        record = csv_record(row, None, p, names)
        _emit(_csv_text(csv_header(None, names), [record]), args.out)
    else:
        lines = ["species"]
        lines += [f"  {n:<8s} {x:.6e}" for n, x in zip(state.names, state.xi)]
        lines.append("totals")
        lines += [f"  {m.name:<8s} {m.total:.6e}  = "
                  + " + ".join(f"{c}*{n}" if c != 1 else n
                               for c, n in zip(m.lam, state.names) if c)
                  for m in state.moieties]
        lines += [
            f"pH       {state.pH:.{p}f}",
            f"pH_a     {state.pH_a:.{p}f}",
            f"pH_I0    {state.pH_I0:.{p}f}",
            f"I        {state.I:.6e}",
            f"gamma    {state.gamma:.{p}f}",
            f"iterations  newton {state.newton_iters}, correction {state.correction_iters}",
            f"converged   {'yes' if state.converged else 'no'}",
        ]
        lines += [f"note: {d}" for d in state.diagnostics]
        sys.stdout.write("\n".join(lines) + "\n")
    if not state.converged:
        print("error: solver did not converge", file=sys.stderr)
        return EXIT_NONCONVERGED
    return EXIT_OK


def _spec(args, totals, vary, points) -> SweepSpec:
    name, start, stop, step = vary
    if step is None and points is None:
        raise UsageError("give a STEP in --vary or --points")
    if step is not None and points is not None:
        raise UsageError("give either a STEP in --vary or --points, not both")
    fixed = {k: v for k, v in totals.items() if k != name}
    return SweepSpec(vary=name, start=start, stop=stop, step=step, points=points, fixed=fixed)


def cmd_sweep(args) -> int:
    scheme, totals = _load(args)
    spec = _spec(args, totals, args.vary, args.points)
    rows = run_sweep(scheme, spec, _config(args), ActivityModel(A=args.debye_A),
                     ionic=not args.no_ionic, jobs=args.jobs)
    text = _csv_text(csv_header(spec), [csv_record(r, spec, args.precision) for r in rows])
    _emit(text, args.out)
    if all(r.status != "ok" for r in rows):
        print("error: every sweep point failed", file=sys.stderr)
        return EXIT_NONCONVERGED
    return EXIT_OK


def _read_sweep_csv(path: Path):
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        if "pH_a" not in fields or not fields[0].startswith("C_"):
            raise UsageError(f"{path} is not a sweep CSV")
        xs, ys = [], []
        for row in reader:
            if row.get("status", "ok") != "ok":
                continue
            xs.append(float(row[fields[0]]))
            ys.append(float(row["pH_a"]))
    return fields[0], np.array(xs), np.array(ys)


def cmd_fit(args) -> int:
    degrees = args.degree or [1, 2]
    if args.csv is not None:
        label, x, y = _read_sweep_csv(args.csv)
    else:
        scheme, totals = _load(args, default_preset="tris-borate")
        if args.scheme is None and (args.preset or "tris-borate") == "tris-borate":
            totals.setdefault("T", golden.FIT_C_T)
        vary = args.vary or ("B", *golden.GRID_RANGE, None)
        points = args.points
        if vary[3] is None and points is None:
            points = golden.FIT_POINTS
        spec = _spec(args, totals, vary, points)
        rows = run_sweep(scheme, spec, _config(args), ActivityModel(A=args.debye_A),
                         ionic=not args.no_ionic, jobs=args.jobs)
        ok = [r for r in rows if r.status == "ok"]
        label = f"C_{spec.vary}"
        x = np.array([r.totals[spec.vary] for r in ok])
        y = np.array([r.pH_a for r in ok])
    records = []
    for d in degrees:
        fit = polyfit(x, y, d)
        records.append([str(d), *(f"{c:.6f}" for c in fit.coefficients),
                        *([""] * (max(degrees) - d)),
                        f"{fit.sigma:.6f}", f"{fit.max0:.6f}", str(fit.n)])
    header = ["degree", *(f"c{j}" for j in range(max(degrees) + 1)), "sigma", "max0", "n"]
    text = f"# pH_a = sum_j c_j * {label}**j\n" + _csv_text(header, records)
    _emit(text, args.out)
    return EXIT_OK


def cmd_check(args) -> int:
    suites = list(args.suite or [])
    if args.oracle and "oracle" not in suites:
        suites.append("oracle")
    results = run_suites(suites or None, dict(args.param))
    width = max(len(r.case) for r in results)
    lines = [f"{r.label:4s}  {r.suite:10s}  {r.case:<{width}s}  {r.detail}" for r in results]
    failed = sum(not r.passed and not r.informational for r in results)
    graded = sum(not r.informational for r in results)
    lines.append(f"{graded - failed}/{graded} passed")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_CHECK if failed else EXIT_OK


COMMANDS = {"solve": cmd_solve, "sweep": cmd_sweep, "fit": cmd_fit, "check": cmd_check}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 0 for --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if args.precision < 0:
        print("error: --precision must be non-negative", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except (UsageError, SchemeError, DegenerateMixtureError, KeyError, ValueError,
            OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
