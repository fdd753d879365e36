"""Command-line front end: ``solve``, ``sweep`` and ``verify`` on scenario files."""

import argparse
import logging
import sys

from pydantic import ValidationError

import settings
from errors import AssumptionViolated, InternalInconsistency, ScenarioError
from export_tools import export_report_pdf, render_report, report_json, sweep_csv
from geometry import RegionTag
from oracle import OracleConfig, verify_regime, verify_solution
from regimes import EmptyRegime, solve_at_par_saturated, solve_both_profitable, solve_coexistence, solve_loss
from scenarios import load_scenario
from sweep import epsilon_sweep, estimate_epsilon_bar

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_ASSUMPTIONS = 2
EXIT_INCONSISTENT = 3
EXIT_DISAGREE = 4

REGION_SOLVERS = {
    RegionTag.FCO_PLUS: solve_both_profitable,
    RegionTag.FCO_LOSS: solve_loss,
    RegionTag.FCO_SATURATED: solve_at_par_saturated,
}


def _load_params(args):
    scenario = load_scenario(args.scenario)
    params = scenario.params
    if args.eps is not None:
        params = params.with_eps(args.eps)
    return scenario, params


def _oracle_config(args, scenario):
    base = scenario.oracle or settings.default_oracle_config()
    overrides = {}
    if getattr(args, "grid", None):
        overrides["p_steps"], overrides["q_steps"] = settings.parse_grid(args.grid)
    if getattr(args, "refine", None) is not None:
        overrides["refinement_rounds"] = args.refine
    if getattr(args, "tol", None) is not None:
        overrides["tolerance_rel"] = args.tol
    if getattr(args, "workers", None) is not None:
        overrides["workers"] = args.workers
    if getattr(args, "region", None):
        overrides["region_filter"] = args.region
    return OracleConfig(**{**base.model_dump(), **overrides})


def _report_assumptions(exc):
    print(f"error: {exc}", file=sys.stderr)
    report = exc.report
    print(f"  A.1 in-house slack:  {report.a1_in_house_slack!r}", file=sys.stderr)
    print(f"  A.1 out-house slack: {report.a1_out_house_slack!r}", file=sys.stderr)
    print(f"  A.2 slack:           {report.a2_slack!r}", file=sys.stderr)


def cmd_solve(args):
    scenario, params = _load_params(args)
    report = solve_coexistence(params)
    if args.verify:
        check = verify_solution(params, report, _oracle_config(args, scenario))
        report = report.model_copy(update={"oracle_check": check})
    text = render_report(report, title=scenario.name)
    if args.json:
        sys.stdout.write(report_json(report))
        sys.stderr.write(text)
    else:
        sys.stdout.write(text)
    if args.pdf:
        print(export_report_pdf(args.pdf, text)["message"], file=sys.stderr)
    if report.oracle_check is not None and not report.oracle_check.agrees:
        return EXIT_DISAGREE
    return EXIT_OK


def cmd_sweep(args):
    scenario, params = _load_params(args)
    if scenario.sweep is None:
        print(f"error: scenario '{scenario.name}' has no sweep block", file=sys.stderr)
        return EXIT_PARSE
    config = _oracle_config(args, scenario) if args.verify else None
    workers = args.workers or settings.WORKERS
    rows = epsilon_sweep(params, scenario.sweep.grid(), oracle_config=config, workers=workers)
    sys.stdout.write(sweep_csv(rows, verbose=args.verbose))
    epsilon_bar = estimate_epsilon_bar(rows)
    print(f"epsilon_bar estimate: {'-' if epsilon_bar is None else repr(epsilon_bar)}", file=sys.stderr)
    if any(row.oracle_agrees is False for row in rows):
        return EXIT_DISAGREE
    return EXIT_OK


def cmd_verify(args):
    scenario, params = _load_params(args)
    config = _oracle_config(args, scenario)
    if config.region_filter is not None:
        solution = REGION_SOLVERS[config.region_filter](params)
        if isinstance(solution, EmptyRegime):
            print(f"{solution.regime.value} is empty: {solution.reason}")
            return EXIT_OK
        result = verify_regime(params, solution, config)
    else:
        report = solve_coexistence(params)
        solution = report.winner
        result = verify_solution(params, report, config)
    print(f"candidate: {solution.regime.value} at ({solution.p_opt!r}, {solution.q_opt!r}) "
          f"value {solution.leader_value!r}")
    print(f"oracle:    {result.regime_at_best.value if result.regime_at_best else '-'} at {result.best_point} "
          f"value {result.best_value!r}")
    print(f"gap {result.gap_vs_candidate!r}, cell {result.cell}, agrees {result.agrees}")
    return EXIT_OK if result.agrees else EXIT_DISAGREE


def build_parser():
    parser = argparse.ArgumentParser(prog="pricing", description="Coalition pricing solver")
    sub = parser.add_subparsers(dest="command", required=True)

    def scenario_args(p):
        p.add_argument("scenario", help="scenario JSON file")
        p.add_argument("--eps", type=float, help="override the scenario's substitutability")
        p.add_argument("--verbose", action="store_true", help="debug logging; reason column in sweeps")

    def oracle_args(p):
        p.add_argument("--grid", help="oracle grid as <p_steps>x<q_steps>")
        p.add_argument("--refine", type=int, help="oracle refinement rounds")
        p.add_argument("--tol", type=float, help="relative oracle tolerance")
        p.add_argument("--workers", type=int, help="threads for the oracle and sweep")

    solve = sub.add_parser("solve", help="solve one scenario")
    scenario_args(solve)
    oracle_args(solve)
    solve.add_argument("--verify", action="store_true", help="attach a grid-oracle check to the report")
    solve.add_argument("--json", action="store_true", help="JSON report on stdout, text on stderr")
    solve.add_argument("--pdf", help="also write the text report to this PDF")
    solve.set_defaults(handler=cmd_solve)

    sweep = sub.add_parser("sweep", help="sweep eps and emit CSV")
    scenario_args(sweep)
    oracle_args(sweep)
    sweep.add_argument("--verify", action="store_true", help="check each row against the grid oracle")
    sweep.set_defaults(handler=cmd_sweep)

    verify = sub.add_parser("verify", help="check the solution against the grid oracle")
    scenario_args(verify)
    oracle_args(verify)
    verify.add_argument("--region", type=RegionTag, choices=list(REGION_SOLVERS),
                        metavar="{FcoPlus,FcoLoss,FcoSaturated}",
                        help="verify one region's optimum only")
    verify.set_defaults(handler=cmd_verify)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else settings.LOG_LEVEL, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.handler(args)
    except (ScenarioError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except AssumptionViolated as exc:
        _report_assumptions(exc)
        return EXIT_ASSUMPTIONS
    except InternalInconsistency as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
