"""Command-line interface.

Subcommands: ``example`` (the worked three-student tables and sweeps),
``classify-rols`` (annotate submitted-ROL data), ``elite`` (cutoff equilibria
plus simulation), ``simulate`` (scenario-driven pipeline), and ``verify``
(property suites).  Reports land in ``--out-dir`` as CSV/JSON, with figures
rendered alongside unless ``--no-plot`` is given.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import experiments, io, verify
from .equilibrium import EliteProblem
from .scenario import ScenarioError, load_scenario


def _fraction(text: str) -> Fraction:
    return Fraction(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lossmatch", description=__doc__)
    parser.add_argument(
        "--seed", type=int, default=None,
        help="master seed for randomized work (default 0; scenario files carry their own)",
    )
    parser.add_argument("--out-dir", type=Path, default=Path("out"), help="report directory")
    parser.add_argument("--format", choices=("csv", "json"), default="csv", dest="fmt")
    parser.add_argument("--threads", type=int, default=1, help="worker threads for fan-out")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("example", help="reproduce the worked example's tables and figure data")
    p.add_argument("--omega", type=_fraction, default=Fraction(1, 4), help="focal score (rational)")
    p.add_argument("--eps", type=_fraction, default=Fraction(1, 20), help="rival flip probability")
    p.add_argument("--v1", type=_fraction, default=Fraction(100))
    p.add_argument("--v2", type=_fraction, default=Fraction(30))
    p.add_argument("--lam-max", type=_fraction, default=Fraction(5))
    p.add_argument("--lam-step", type=_fraction, default=Fraction(1, 20))
    p.add_argument("--omega-step", type=_fraction, default=Fraction(1, 100))
    p.add_argument("--lam-for-omega", type=_fraction, default=Fraction(3, 2))
    p.add_argument("--no-plot", action="store_true")

    p = sub.add_parser("classify-rols", help="append truthfulness/TRM flags and emit shares")
    p.add_argument("--input", type=Path, default=None, help="CSV with priority_score,rol,count (default: bundled lab data)")
    p.add_argument("--truthful-order", type=str, default=None, help="e.g. 1234 (default ascending)")
    p.add_argument("--no-plot", action="store_true")

    p = sub.add_parser("elite", help="elite-school cutoff equilibrium and simulation")
    p.add_argument("--students", type=int, default=2)
    p.add_argument("--capacity", type=int, default=1)
    p.add_argument("--value", type=float, default=1.0)
    p.add_argument("--levels", type=str, default="2", help="comma-separated loss-dominance levels")
    p.add_argument("--level-probs", type=str, default=None, help="comma-separated probabilities")
    p.add_argument("--replications", type=int, default=10_000)
    p.add_argument("--no-plot", action="store_true")

    p = sub.add_parser("simulate", help="run a scenario file")
    p.add_argument("scenario", type=Path)
    p.add_argument("--replications", type=int, default=None, help="override scenario replications")

    p = sub.add_parser("verify", help="run a named property suite")
    p.add_argument("suite", choices=sorted(verify.SUITES))
    return parser


def _grid(step: Fraction, top: Fraction):
    grid = []
    k = 0
    while step * k <= top:
        grid.append(step * k)
        k += 1
    return grid


def cmd_example(args) -> int:
    lam_grid = _grid(args.lam_step, args.lam_max)
    omega_grid = _grid(args.omega_step, Fraction(1))
    report = experiments.run_example(
        args.omega, args.eps, args.v1, args.v2, lam_grid, omega_grid, args.lam_for_omega
    )
    written = io.emit_example(report, args.out_dir, args.fmt)
    if not args.no_plot:
        from . import plots

        written += plots.render_example(report, args.out_dir)
    for path in written:
        print(path)
    return 0


def cmd_classify(args) -> int:
    rows = io.read_classify_csv(args.input) if args.input else io.bundled_table4_rows()
    order = None
    if args.truthful_order:
        order = tuple(int(c) for c in args.truthful_order)
    report = experiments.run_classify(rows, order)
    written = io.emit_classify(report, args.out_dir, args.fmt)
    if not args.no_plot:
        from . import plots

        written += plots.render_classify(report, args.out_dir)
    print(f"overall TRM share: {report.trm_share():.4f} ({report.trm_total}/{report.total})")
    for path in written:
        print(path)
    return 0


def cmd_elite(args) -> int:
    levels = tuple(float(x) for x in args.levels.split(","))
    if args.level_probs:
        probs = tuple(float(x) for x in args.level_probs.split(","))
    else:
        probs = tuple(1.0 / len(levels) for _ in levels)
    problem = EliteProblem(args.students, args.capacity, args.value, levels, probs)
    bad = [p for p in problem.validate() if "seats never bind" not in p]
    if bad:
        print("invalid elite problem:", "; ".join(bad), file=sys.stderr)
        return 2
    report = experiments.run_elite(problem, args.replications, args.seed if args.seed is not None else 0)
    written = io.emit_elite(report, args.out_dir, args.fmt)
    if not args.no_plot:
        from . import plots

        written += plots.render_elite(report, args.out_dir)
    for lam in problem.levels:
        print(f"cutoff at loss dominance {lam:g}: {report.cutoffs[lam]:.10f}")
    for path in written:
        print(path)
    return 0


def cmd_simulate(args) -> int:
    try:
        scenario = load_scenario(args.scenario.read_text())
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return 2
    if args.replications is not None:
        scenario.replications = args.replications
    result = experiments.run_simulation(scenario, seed=args.seed, threads=args.threads)
    path = io.write_json(Path(args.out_dir) / "simulation.json", result.to_json())
    print(path)
    print(json.dumps(result.stats, sort_keys=True))
    return 0


def cmd_verify(args) -> int:
    ok, lines = verify.run_suite(args.suite)
    for line in lines:
        print(line)
    print(f"{args.suite}: {'PASS' if ok else 'FAIL'}")
    return 0 if ok else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "example": cmd_example,
        "classify-rols": cmd_classify,
        "elite": cmd_elite,
        "simulate": cmd_simulate,
        "verify": cmd_verify,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
