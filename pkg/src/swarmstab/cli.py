"""Command-line front end.

Subcommands:
    run <config.json>     simulate + analyze one experiment, write outputs
    sweep <spec.json>     run a cartesian parameter sweep, print/write a table
    bounds --a --b --c    print closed-form bounds (entry bound needs an init)

Flags override config-file fields. Exit codes: 0 success, 1 verdict
failure in a validated regime, 2 divergence, 3 configuration/usage
error, 4 unwritable output.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from typing import Any, Sequence

from .analysis import cohesion_radius, entry_step_bound, gaussian_at_sign_change, sign_change_radius
from .dynamics import SwarmParams, StopCriteria
from .harness import (
    EXIT_CONFIG_ERROR,
    EXIT_IO_ERROR,
    ConfigError,
    ExperimentConfig,
    InitSpec,
    OutputSpec,
    exit_code,
    init_positions,
    load_config,
    load_sweep_spec,
    run_experiment,
    run_sweep,
)
from .io import write_sweep_csv

__all__ = ["main", "entry"]


def _add_override_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--a", type=float, help="attraction gain")
    parser.add_argument("--b", type=float, help="repulsion amplitude")
    parser.add_argument("--c", type=float, help="repulsion length scale")
    parser.add_argument("--agents", type=int, help="number of agents M")
    parser.add_argument("--dim", type=int, help="space dimension n")
    parser.add_argument("--seed", type=int, help="PRNG seed")
    parser.add_argument("--init-half-width", type=float, help="uniform init half-width")
    parser.add_argument(
        "--max-steps", "--steps", dest="max_steps", type=int, help="step budget"
    )
    parser.add_argument("--out-trajectory", help="trajectory output path")
    parser.add_argument("--out-report", help="report output path")
    parser.add_argument("--format", choices=("csv", "json"), help="trajectory format")


def _apply_overrides(config: ExperimentConfig, args: argparse.Namespace) -> ExperimentConfig:
    p = config.params
    fields = {"a": p.a, "b": p.b, "c": p.c, "M": p.M, "n": p.n}
    if args.a is not None:
        fields["a"] = args.a
    if args.b is not None:
        fields["b"] = args.b
    if args.c is not None:
        fields["c"] = args.c
    if args.agents is not None:
        fields["M"] = args.agents
    if args.dim is not None:
        fields["n"] = args.dim
    try:
        params = SwarmParams(**fields)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    init = config.init
    if args.init_half_width is not None:
        init = InitSpec(kind="uniform_hypercube", half_width=args.init_half_width)
    output = replace(
        config.output,
        trajectory_path=args.out_trajectory or config.output.trajectory_path,
        report_path=args.out_report or config.output.report_path,
        format=args.format or config.output.format,
    )
    return replace(
        config,
        params=params,
        init=init,
        seed=args.seed if args.seed is not None else config.seed,
        max_steps=args.max_steps if args.max_steps is not None else config.max_steps,
        output=output,
    )


def _cmd_run(args: argparse.Namespace) -> int:
    config = _apply_overrides(load_config(args.config), args)
    trajectory, report = run_experiment(config)
    b = report.bounds
    print(f"termination: {trajectory.termination_reason} "
          f"after {len(trajectory) - 1} steps")
    print(f"sign_change_radius = {b.sign_change_radius!r}")
    print(f"cohesion_radius = {b.cohesion_radius!r}")
    print(f"entry_step_bound = {b.entry_step_bound}")
    print(f"overall_entry_step = {report.overall_entry_step}")
    print(f"final_residual = {report.final_residual!r}")
    for name, verdict in report.verdicts.items():
        print(f"verdict {name}: {'pass' if verdict.passed else 'FAIL'}")
    return exit_code(trajectory, report)


def _format_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _cmd_sweep(args: argparse.Namespace) -> int:
    spec = load_sweep_spec(args.spec)
    rows = run_sweep(spec)
    if args.out:
        write_sweep_csv(rows, args.out)
    columns = list(rows[0].keys()) if rows else []
    show = [c for c in columns if c not in ("skip_reason",)]
    print("\t".join(show))
    for row in rows:
        print("\t".join(_format_cell(row.get(c)) for c in show))
    return 0


def _cmd_bounds(args: argparse.Namespace) -> int:
    try:
        params = SwarmParams(
            a=args.a, b=args.b, c=args.c,
            M=args.agents if args.agents is not None else 1,
            n=args.dim if args.dim is not None else 1,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    print(f"sign_change_radius = {sign_change_radius(params)!r}")
    print(f"cohesion_radius = {cohesion_radius(params)!r}")
    print(f"gaussian_at_sign_change = {gaussian_at_sign_change(params)!r}")
    if args.agents is not None and args.dim is not None and args.init_half_width is not None:
        config = ExperimentConfig(
            params=params,
            seed=args.seed if args.seed is not None else 0,
            init=InitSpec(kind="uniform_hypercube", half_width=args.init_half_width),
            output=OutputSpec(),
        )
        initial = init_positions(config)
        print(f"entry_step_bound = {entry_step_bound(initial, params)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="swarmstab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one experiment from a config file")
    run_p.add_argument("config", help="experiment config JSON")
    _add_override_flags(run_p)
    run_p.set_defaults(func=_cmd_run)

    sweep_p = sub.add_parser("sweep", help="run a parameter sweep")
    sweep_p.add_argument("spec", help="sweep spec JSON")
    sweep_p.add_argument("--out", help="summary table CSV path")
    sweep_p.set_defaults(func=_cmd_sweep)

    bounds_p = sub.add_parser("bounds", help="print closed-form bounds")
    bounds_p.add_argument("--a", type=float, required=True)
    bounds_p.add_argument("--b", type=float, required=True)
    bounds_p.add_argument("--c", type=float, required=True)
    bounds_p.add_argument("--agents", type=int)
    bounds_p.add_argument("--dim", type=int)
    bounds_p.add_argument("--seed", type=int)
    bounds_p.add_argument("--init-half-width", type=float)
    bounds_p.set_defaults(func=_cmd_bounds)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; 2 means "diverged" here, so
        # remap everything but --help onto the config-error code.
        return 0 if exc.code == 0 else EXIT_CONFIG_ERROR
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO_ERROR


def entry() -> None:
    sys.exit(main())
