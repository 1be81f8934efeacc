"""Experiment configuration, seeded initialization, runs, and sweeps.

Initial positions come from numpy's PCG64 generator — a named, publicly
documented 64-bit PRNG — so identical (seed, M, n, half-width) inputs
reproduce identical swarms on every platform; the algorithm identifier
is recorded in trajectory provenance. Exit codes for CI use:

    0  run completed; in a validated regime every verdict passed
       (outside the validated regime no verdict carries an expectation)
    1  validated-regime run with at least one failed verdict
    2  run diverged
    3  configuration error
    4  output could not be written
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any

import numpy as np

from .analysis import AnalysisReport, analyze
from .dynamics import SwarmParams, SwarmState, StopCriteria, Trajectory, simulate
from .io import emit_report, export_trajectory

__all__ = [
    "ConfigError",
    "InitSpec",
    "OutputSpec",
    "ExperimentConfig",
    "SweepSpec",
    "init_positions",
    "init_description",
    "run_experiment",
    "run_sweep",
    "exit_code",
    "is_validated_regime",
    "load_config",
    "load_sweep_spec",
    "PRNG_ALGORITHM",
]

PRNG_ALGORITHM = "pcg64"

EXIT_OK = 0
EXIT_VERDICT_FAILURE = 1
EXIT_DIVERGED = 2
EXIT_CONFIG_ERROR = 3
EXIT_IO_ERROR = 4

DEFAULT_MAX_STEPS = 10_000

SWEEP_AXES = ("a", "b", "c", "M", "n", "L", "seed")

# Theorem-conclusion checks are only expected to pass here (b > a is
# already enforced by SwarmParams).
VALIDATED_AM_LIMIT = 2.0


class ConfigError(ValueError):
    """Invalid experiment or sweep configuration."""


def is_validated_regime(params: SwarmParams) -> bool:
    """True when 0 < a*M < 2, the regime where verdicts carry expectations."""
    return 0.0 < params.a * params.M < VALIDATED_AM_LIMIT


@dataclass(frozen=True)
class InitSpec:
    """Initial-swarm recipe: uniform cube of given half-width, or explicit."""

    kind: str  # "uniform_hypercube" | "explicit"
    half_width: float | None = None
    positions: tuple[tuple[float, ...], ...] | None = None

    def __post_init__(self):
        if self.kind == "uniform_hypercube":
            if self.half_width is None or not (
                math.isfinite(self.half_width) and self.half_width > 0
            ):
                raise ConfigError(
                    f"uniform init needs half_width > 0, got {self.half_width!r}"
                )
        elif self.kind == "explicit":
            if not self.positions:
                raise ConfigError("explicit init needs positions")
        else:
            raise ConfigError(f"unknown init kind {self.kind!r}")


@dataclass(frozen=True)
class OutputSpec:
    """Where run artifacts go; ``format`` applies to the trajectory file."""

    trajectory_path: str | None = None
    report_path: str | None = None
    format: str = "csv"

    def __post_init__(self):
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    params: SwarmParams
    seed: int
    init: InitSpec
    max_steps: int = DEFAULT_MAX_STEPS
    stop: StopCriteria = StopCriteria()
    output: OutputSpec = OutputSpec()

    def __post_init__(self):
        if not (isinstance(self.seed, int) and 0 <= self.seed < 2**64):
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if not (isinstance(self.max_steps, int) and self.max_steps >= 0):
            raise ConfigError(f"max_steps must be an integer >= 0, got {self.max_steps!r}")
        if self.init.kind == "explicit":
            arr = np.asarray(self.init.positions, dtype=np.float64)
            if arr.shape != (self.params.M, self.params.n):
                raise ConfigError(
                    f"explicit positions have shape {arr.shape}, "
                    f"params say ({self.params.M}, {self.params.n})"
                )


def init_description(config: ExperimentConfig) -> str:
    if config.init.kind == "explicit":
        return "explicit"
    return (
        f"uniform_hypercube(half_width={config.init.half_width!r}, "
        f"prng={PRNG_ALGORITHM})"
    )


def init_positions(config: ExperimentConfig) -> SwarmState:
    """Build the k=0 state; deterministic in (seed, M, n, half_width)."""
    if config.init.kind == "explicit":
        return SwarmState(k=0, positions=np.asarray(config.init.positions, dtype=np.float64))
    rng = np.random.Generator(np.random.PCG64(config.seed))
    L = float(config.init.half_width)
    positions = rng.uniform(-L, L, size=(config.params.M, config.params.n))
    return SwarmState(k=0, positions=positions)


def run_experiment(config: ExperimentConfig) -> tuple[Trajectory, AnalysisReport]:
    """Simulate, analyze, and write any configured output files."""
    initial = init_positions(config)
    trajectory = simulate(
        initial,
        config.params,
        config.max_steps,
        config.stop,
        seed=config.seed,
        init_spec=init_description(config),
    )
    report = analyze(trajectory)
    if config.output.trajectory_path:
        export_trajectory(trajectory, config.output.trajectory_path, config.output.format)
    if config.output.report_path:
        emit_report(report, config.output.report_path, trajectory=trajectory)
    return trajectory, report


def exit_code(trajectory: Trajectory, report: AnalysisReport) -> int:
    """Map a finished run onto the CI exit-code contract."""
    if trajectory.termination_reason == "diverged":
        return EXIT_DIVERGED
    if is_validated_regime(trajectory.params) and not report.all_passed():
        return EXIT_VERDICT_FAILURE
    return EXIT_OK


@dataclass(frozen=True)
class SweepSpec:
    """Cartesian sweep over named axes applied to a base configuration."""

    base: ExperimentConfig
    axes: tuple[tuple[str, tuple[Any, ...]], ...]
    mode: str = "cartesian"

    def __post_init__(self):
        if self.mode != "cartesian":
            raise ConfigError(f"unsupported sweep mode {self.mode!r}")
        for name, values in self.axes:
            if name not in SWEEP_AXES:
                raise ConfigError(f"unknown sweep axis {name!r}; pick from {SWEEP_AXES}")
            if not values:
                raise ConfigError(f"sweep axis {name!r} has no values")


def _apply_point(base: ExperimentConfig, point: dict[str, Any]) -> ExperimentConfig:
    p = base.params
    fields = {"a": p.a, "b": p.b, "c": p.c, "M": p.M, "n": p.n}
    for name in ("a", "b", "c"):
        if name in point:
            fields[name] = float(point[name])
    for name in ("M", "n"):
        if name in point:
            fields[name] = int(point[name])
    params = SwarmParams(**fields)
    init = base.init
    if "L" in point:
        if init.kind != "uniform_hypercube":
            raise ConfigError("axis L applies only to uniform_hypercube init")
        init = replace(init, half_width=float(point["L"]))
    seed = int(point.get("seed", base.seed))
    return replace(base, params=params, init=init, seed=seed, output=OutputSpec())


VERDICT_NAMES = (
    "center_stationary",
    "cohesion_within_bound",
    "descent_outside_ball",
    "converges_to_equilibrium",
)


def _sweep_row(point: dict[str, Any], config: ExperimentConfig | None,
               error: str | None) -> dict[str, Any]:
    row: dict[str, Any] = {axis: point.get(axis) for axis in SWEEP_AXES}
    row.update(
        skipped=error is not None,
        skip_reason=error,
        sign_change_radius=None,
        cohesion_radius=None,
        entry_step_bound=None,
        overall_entry_step=None,
        final_residual=None,
        final_max_offset=None,
        termination_reason=None,
        all_verdicts_passed=None,
    )
    for name in VERDICT_NAMES:
        row[f"verdict_{name}"] = None
    if config is None:
        return row
    row.update(
        a=config.params.a, b=config.params.b, c=config.params.c,
        M=config.params.M, n=config.params.n, seed=config.seed,
        L=config.init.half_width,
    )
    if error is not None:
        return row
    trajectory, report = run_experiment(config)
    final_offsets = trajectory.final_state.positions - trajectory.final_state.positions.mean(axis=0)
    row.update(
        sign_change_radius=report.bounds.sign_change_radius,
        cohesion_radius=report.bounds.cohesion_radius,
        entry_step_bound=report.bounds.entry_step_bound,
        overall_entry_step=report.overall_entry_step,
        final_residual=report.final_residual,
        final_max_offset=float(np.sqrt((final_offsets ** 2).sum(axis=1)).max()),
        termination_reason=trajectory.termination_reason,
        all_verdicts_passed=report.all_passed(),
    )
    for name, verdict in report.verdicts.items():
        row[f"verdict_{name}"] = verdict.passed
    return row


def run_sweep(spec: SweepSpec) -> list[dict[str, Any]]:
    """Run every sweep point in spec order and return the summary table.

    Invalid points (e.g. b <= a) become skipped rows, not failures.

    Raises:
        ConfigError: every sweep point is invalid.
    """
    names = [name for name, _ in spec.axes]
    combos = itertools.product(*(values for _, values in spec.axes))
    rows = []
    any_ran = False
    for combo in combos:
        point = dict(zip(names, combo))
        try:
            config = _apply_point(spec.base, point)
        except (ConfigError, ValueError) as exc:
            rows.append(_sweep_row(point, None, str(exc)))
            continue
        rows.append(_sweep_row(point, config, None))
        any_ran = True
    if rows and not any_ran:
        raise ConfigError("every sweep point is invalid")
    return rows


# --- config files -----------------------------------------------------------


def _build_params(doc: dict[str, Any]) -> SwarmParams:
    try:
        return SwarmParams(
            a=float(doc["a"]), b=float(doc["b"]), c=float(doc["c"]),
            M=int(doc["M"]), n=int(doc["n"]),
        )
    except KeyError as exc:
        raise ConfigError(f"params missing key {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _build_init(doc: dict[str, Any]) -> InitSpec:
    kind = doc.get("kind")
    if kind == "uniform_hypercube":
        return InitSpec(kind=kind, half_width=float(doc["half_width"]))
    if kind == "explicit":
        positions = tuple(tuple(float(v) for v in row) for row in doc["positions"])
        return InitSpec(kind=kind, positions=positions)
    raise ConfigError(f"unknown init kind {kind!r}")


def _build_stop(doc: dict[str, Any] | None) -> StopCriteria:
    if doc is None:
        return StopCriteria()
    try:
        return StopCriteria(
            residual_threshold=float(doc.get("residual_threshold", 1e-10)),
            divergence_radius=(
                None if doc.get("divergence_radius") is None
                else float(doc["divergence_radius"])
            ),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def config_from_dict(doc: dict[str, Any]) -> ExperimentConfig:
    try:
        params = _build_params(doc["params"])
        init = _build_init(doc["init"])
        out = doc.get("output") or {}
        return ExperimentConfig(
            params=params,
            seed=int(doc.get("seed", 0)),
            init=init,
            max_steps=int(doc.get("max_steps", DEFAULT_MAX_STEPS)),
            stop=_build_stop(doc.get("stop")),
            output=OutputSpec(
                trajectory_path=out.get("trajectory"),
                report_path=out.get("report"),
                format=out.get("format", "csv"),
            ),
        )
    except ConfigError:
        raise
    except KeyError as exc:
        raise ConfigError(f"config missing key {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path) -> ExperimentConfig:
    """Parse an experiment config JSON file."""
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    return config_from_dict(doc)


def load_sweep_spec(path: str | Path) -> SweepSpec:
    """Parse a sweep spec JSON file: {"base": <config>, "axes": [[name, [...]], ...]}."""
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read sweep spec {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(doc, dict) or "base" not in doc:
        raise ConfigError(f"{path}: sweep spec needs a 'base' config")
    base = config_from_dict(doc["base"])
    axes_doc = doc.get("axes", [])
    try:
        axes = tuple((str(name), tuple(values)) for name, values in axes_doc)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: malformed axes ({exc})") from exc
    return SweepSpec(base=base, axes=axes, mode=doc.get("mode", "cartesian"))
