"""Command-line surface.

Subcommands: ``fit`` (one joint model on a CSV), ``select`` (joint
stepwise selection on a CSV), ``simulate`` (Monte Carlo scenario file)
and ``demo-injection`` (the built-in case-study replay).  Exit status is
0 on success, 1 on usage errors, 2 on numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .criteria import DispCriterion, MeanCriterion
from .demo import run_injection_demo, trace_lines, wald_table
from .errors import DatasetError, DomainError, JmmdError
from .families import Family
from .io import export_diagnostics, load_dataset_csv
from .joint import JointSpec, fit_joint
from .selection import SelectionTrace, enforce_hierarchy, select_joint_alg2
from .simulation import parse_scenario, report_text, run_monte_carlo

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERIC = 2


def _family_index(family: Family) -> int | None:
    from .families import Kind

    return family.index if family.kind is Kind.BINOMIAL_TYPE else None


def _parse_family(text: str) -> Family:
    name, _, arg = text.partition(":")
    name = name.strip().lower()
    if name == "normal":
        return Family.normal_type()
    if name == "poisson":
        return Family.poisson_type()
    if name == "binomial":
        if not arg:
            raise DomainError("binomial family needs an index, e.g. binomial:10")
        return Family.binomial_type(int(arg))
    raise DomainError(f"unknown family {text!r}")


def _terms(text: str) -> tuple[str, ...]:
    labels = tuple(t.strip() for t in text.split(",") if t.strip())
    return labels if "1" in labels else ("1", *labels)


def _write_json(payload: dict, path: str | None) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2)
    if path is None or path == "-":
        print(text)
    else:
        Path(path).write_text(text + "\n", encoding="utf-8")


def _step_dict(step) -> dict:
    crit = step.criterion
    return {
        "model_kind": step.model_kind.value,
        "candidate": step.candidate,
        "criterion": {
            "kind": crit.kind.value,
            "value": crit.value,
            "n": crit.n,
            "params": crit.params,
            "lambda_n": crit.lambda_n,
        },
        "test_statistic": step.test_statistic,
        "test_df": list(step.test_df) if isinstance(step.test_df, tuple) else step.test_df,
        "p_value": step.p_value,
        "decision": step.decision.value,
    }


def _trace_dict(trace: SelectionTrace) -> dict:
    return {
        "iterations": [
            {
                "iteration_index": cyc.iteration_index,
                "mean_steps": [_step_dict(s) for s in cyc.mean_steps],
                "disp_steps": [_step_dict(s) for s in cyc.disp_steps],
                "mean_criterion_final": cyc.mean_criterion_final,
                "mean_terms": list(cyc.mean_terms),
                "disp_terms": list(cyc.disp_terms),
            }
            for cyc in trace.iterations
        ],
        "final_mean_terms": list(trace.final_spec.mean_terms),
        "final_disp_terms": list(trace.final_spec.disp_terms),
    }


def _cmd_fit(args) -> int:
    family = _parse_family(args.family)
    data = load_dataset_csv(args.csv, args.response, binomial_index=_family_index(family))
    spec = JointSpec(_terms(args.mean_terms), _terms(args.disp_terms), family)
    fit = fit_joint(data, spec, {"tol": args.tol, "max_outer": args.max_outer})
    payload = {
        "mean_terms": list(spec.mean_terms),
        "disp_terms": list(spec.disp_terms),
        "mean_coefficients": wald_table(fit.mean_fit),
        "dispersion_coefficients": wald_table(fit.disp_fit),
        "eql": fit.eql,
        "outer_iterations": fit.outer_iterations,
        "converged": fit.converged,
    }
    if args.diagnostics:
        sidecar = export_diagnostics(fit, args.diagnostics)
        payload["diagnostics_csv"] = args.diagnostics
        payload["diagnostics_json"] = str(sidecar)
    _write_json(payload, args.json)
    return EXIT_OK


def _cmd_select(args) -> int:
    family = _parse_family(args.family)
    data = load_dataset_csv(args.csv, args.response, binomial_index=_family_index(family))
    mean_pool = _pool(args.mean_pool, data)
    disp_pool = _pool(args.disp_pool, data)
    trace = select_joint_alg2(
        data,
        mean_pool,
        disp_pool,
        MeanCriterion(args.mean_criterion),
        DispCriterion(args.disp_criterion),
        args.alpha,
        mean_family=family,
    )
    spec = trace.final_spec
    if args.hierarchy == "on":
        spec = enforce_hierarchy(spec, data.factors)
    for cyc in trace.iterations:
        for step in (*cyc.disp_steps, *cyc.mean_steps):
            crit = step.criterion
            print(
                f"[cycle {cyc.iteration_index}] {step.model_kind.value} +{step.candidate} "
                f"{crit.kind.value}={crit.value:.4f} stat={step.test_statistic:.4f} "
                f"p={step.p_value:.4f} {step.decision.value}",
                file=sys.stderr,
            )
    payload = _trace_dict(trace)
    payload["hierarchy"] = args.hierarchy
    payload["final_mean_terms"] = list(spec.mean_terms)
    _write_json(payload, args.json)
    return EXIT_OK


def _pool(spec_text: str | None, data) -> tuple[str, ...]:
    if spec_text:
        return tuple(t.strip() for t in spec_text.split(",") if t.strip())
    return tuple(data.factors)


def _cmd_simulate(args) -> int:
    text = Path(args.scenario).read_text(encoding="utf-8")
    scenario = parse_scenario(text)
    if args.reps is not None:
        scenario = _replace_scenario(scenario, replications=args.reps)
    if args.seed is not None:
        scenario = _replace_scenario(scenario, seed=args.seed)
    report = run_monte_carlo(scenario, threads=args.threads)
    print(report_text(report))
    if args.json:
        Path(args.json).write_text(report.to_json() + "\n", encoding="utf-8")
    return EXIT_OK


def _replace_scenario(scenario, **kw):
    from dataclasses import replace

    return replace(scenario, **kw)


def _cmd_demo(args) -> int:
    result = run_injection_demo(
        alpha=args.alpha,
        mean_criterion=MeanCriterion(args.mean_criterion),
        disp_criterion=DispCriterion(args.disp_criterion),
        hierarchy=args.hierarchy == "on",
    )
    for line in trace_lines(result["trace"]):
        print(line)
    print()
    print("final mean model:", "+".join(result["final_mean_terms"]))
    print("final dispersion model:", "+".join(result["final_disp_terms"]))
    print(f"{'term':<5}{'estimate':>11}{'std.err':>10}{'t':>9}{'p':>9}")
    for row in result["mean_coefficients"]:
        print(
            f"{row['term']:<5}{row['estimate']:>11.5f}{row['std_error']:>10.5f}"
            f"{row['t_value']:>9.3f}{row['p_value']:>9.4f}"
        )
    print("dispersion:")
    for row in result["dispersion_coefficients"]:
        print(
            f"{row['term']:<5}{row['estimate']:>11.4f}{row['std_error']:>10.4f}"
            f"{row['t_value']:>9.3f}{row['p_value']:>9.4f}"
        )
    if args.json:
        payload = _trace_dict(result["trace"])
        payload["final_mean_terms"] = list(result["final_mean_terms"])
        payload["final_disp_terms"] = list(result["final_disp_terms"])
        payload["mean_coefficients"] = result["mean_coefficients"]
        payload["dispersion_coefficients"] = result["dispersion_coefficients"]
        _write_json(payload, args.json)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jmmd",
        description="Joint mean/dispersion modeling with stepwise variable selection.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit one joint model on a CSV dataset")
    p_fit.add_argument("csv")
    p_fit.add_argument("--response", required=True)
    p_fit.add_argument("--mean-terms", required=True, help="comma-separated term labels")
    p_fit.add_argument("--disp-terms", required=True, help="comma-separated term labels")
    p_fit.add_argument("--family", default="normal", help="normal | poisson | binomial:m")
    p_fit.add_argument("--tol", type=float, default=1e-8)
    p_fit.add_argument("--max-outer", type=int, default=50)
    p_fit.add_argument("--diagnostics", help="write per-observation diagnostics CSV here")
    p_fit.add_argument("--json", help="output JSON path ('-' for stdout)", default="-")
    p_fit.set_defaults(func=_cmd_fit)

    p_sel = sub.add_parser("select", help="joint stepwise selection on a CSV dataset")
    p_sel.add_argument("csv")
    p_sel.add_argument("--response", required=True)
    p_sel.add_argument("--mean-pool", help="comma-separated candidates (default: all factors)")
    p_sel.add_argument("--disp-pool", help="comma-separated candidates (default: all factors)")
    p_sel.add_argument(
        "--mean-criterion",
        choices=[c.value for c in MeanCriterion],
        default=MeanCriterion.R2_SQRT.value,
    )
    p_sel.add_argument(
        "--disp-criterion",
        choices=[c.value for c in DispCriterion],
        default=DispCriterion.AICC.value,
    )
    p_sel.add_argument("--alpha", type=float, default=0.10)
    p_sel.add_argument("--family", default="normal", help="normal | poisson | binomial:m")
    p_sel.add_argument("--hierarchy", choices=["on", "off"], default="off")
    p_sel.add_argument("--json", help="output JSON path ('-' for stdout)", default="-")
    p_sel.set_defaults(func=_cmd_select)

    p_sim = sub.add_parser("simulate", help="run a Monte Carlo scenario file")
    p_sim.add_argument("scenario")
    p_sim.add_argument("--reps", type=int, help="override replication count")
    p_sim.add_argument("--seed", type=int, help="override the root seed")
    p_sim.add_argument("--threads", type=int, default=1)
    p_sim.add_argument("--json", help="write the machine-readable report here")
    p_sim.set_defaults(func=_cmd_simulate)

    p_demo = sub.add_parser("demo-injection", help="replay the injection-molding case study")
    p_demo.add_argument("--alpha", type=float, default=0.10)
    p_demo.add_argument(
        "--mean-criterion",
        choices=[c.value for c in MeanCriterion],
        default=MeanCriterion.R2_SQRT.value,
    )
    p_demo.add_argument(
        "--disp-criterion",
        choices=[c.value for c in DispCriterion],
        default=DispCriterion.AICC.value,
    )
    p_demo.add_argument("--hierarchy", choices=["on", "off"], default="on")
    p_demo.add_argument("--json", help="output JSON path")
    p_demo.set_defaults(func=_cmd_demo)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (DatasetError, DomainError, OSError, ValueError) as exc:
        print(f"jmmd: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except JmmdError as exc:
        print(f"jmmd: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
