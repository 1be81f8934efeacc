"""Deterministic file formats for trajectories, reports, and sweep tables.

Trajectory CSV: header ``step,agent,x0,...,x{n-1}``, one row per
(step, agent), steps ascending and agents ascending within a step,
floats printed with 17 significant digits so parsing them back is
bit-exact. Trajectory JSON additionally carries provenance and the
termination reason and round-trips to an identical :class:`Trajectory`.
Reports are JSON with a ``schema_version`` field. All writers emit
byte-identical files for identical inputs (sorted keys, fixed float
formatting, LF newlines).
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Any, Iterable

import numpy as np

from .analysis import AnalysisReport
from .dynamics import SwarmParams, SwarmState, Trajectory

__all__ = [
    "export_trajectory",
    "write_trajectory_csv",
    "read_trajectory_csv",
    "write_trajectory_json",
    "read_trajectory_json",
    "emit_report",
    "write_sweep_csv",
]

REPORT_SCHEMA_VERSION = 1

TRAJECTORY_FORMATS = ("csv", "json")


def _fmt(value: float) -> str:
    return format(value, ".17g")


def write_trajectory_csv(trajectory: Trajectory, path: str | Path) -> None:
    """One (step, agent) row per line; 17 significant digits per value."""
    n = trajectory.params.n
    header = "step,agent," + ",".join(f"x{d}" for d in range(n))
    lines = [header]
    for state in trajectory.states:
        for agent in range(trajectory.params.M):
            coords = ",".join(_fmt(v) for v in state.positions[agent])
            lines.append(f"{state.k},{agent},{coords}")
    Path(path).write_text("\n".join(lines) + "\n", newline="\n")


def read_trajectory_csv(path: str | Path) -> tuple[SwarmState, ...]:
    """Rebuild the states of a CSV export (bit-exact positions).

    The CSV carries no provenance, so the result is the state sequence
    only; use the JSON format to round-trip a full :class:`Trajectory`.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:2] != ["step", "agent"]:
            raise ValueError(f"{path}: not a trajectory CSV (header {header!r})")
        n = len(header) - 2
        rows = [(int(r[0]), int(r[1]), [float(v) for v in r[2:]]) for r in reader]
    if not rows:
        raise ValueError(f"{path}: empty trajectory CSV")
    num_agents = max(r[1] for r in rows) + 1
    num_states = max(r[0] for r in rows) + 1
    positions = np.full((num_states, num_agents, n), np.nan)
    for k, agent, coords in rows:
        positions[k, agent] = coords
    if not np.isfinite(positions).all():
        raise ValueError(f"{path}: missing or non-finite rows")
    return tuple(SwarmState(k=k, positions=positions[k]) for k in range(num_states))


def _provenance(trajectory: Trajectory) -> dict[str, Any]:
    p = trajectory.params
    return {
        "params": {"a": p.a, "b": p.b, "c": p.c, "M": p.M, "n": p.n},
        "seed": trajectory.seed,
        "init_spec": trajectory.init_spec,
    }


def write_trajectory_json(trajectory: Trajectory, path: str | Path) -> None:
    doc = {
        "provenance": _provenance(trajectory),
        "states": [
            {"k": s.k, "positions": s.positions.tolist()} for s in trajectory.states
        ],
        "termination_reason": trajectory.termination_reason,
    }
    Path(path).write_text(
        json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n", newline="\n"
    )


def read_trajectory_json(path: str | Path) -> Trajectory:
    doc = json.loads(Path(path).read_text())
    prov = doc["provenance"]
    params = SwarmParams(**prov["params"])
    states = tuple(
        SwarmState(k=s["k"], positions=np.array(s["positions"], dtype=np.float64))
        for s in doc["states"]
    )
    return Trajectory(
        params=params,
        seed=prov["seed"],
        init_spec=prov["init_spec"],
        states=states,
        termination_reason=doc["termination_reason"],
    )


def export_trajectory(trajectory: Trajectory, path: str | Path, format: str) -> None:
    """Write ``trajectory`` to ``path`` as ``csv`` or ``json``."""
    if format == "csv":
        write_trajectory_csv(trajectory, path)
    elif format == "json":
        write_trajectory_json(trajectory, path)
    else:
        raise ValueError(f"unknown trajectory format {format!r}")


def emit_report(
    report: AnalysisReport,
    path: str | Path,
    *,
    trajectory: Trajectory | None = None,
    format: str = "json",
) -> None:
    """Write the analysis report as versioned JSON.

    When ``trajectory`` is given its provenance and termination reason
    are embedded so the report is self-describing.
    """
    if format != "json":
        raise ValueError(f"reports are JSON only, got format {format!r}")
    doc: dict[str, Any] = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "bounds": report.bounds.as_dict(),
        "entry_steps": {
            "per_agent": list(report.entry_steps),
            "overall": report.overall_entry_step,
        },
        "descent_violations": report.descent_violations.tolist(),
        "free_agent_violations": report.free_agent_violations.tolist(),
        "final_residual": report.final_residual,
        "verdicts": {
            name: {"passed": v.passed, "evidence": v.evidence}
            for name, v in report.verdicts.items()
        },
    }
    if trajectory is not None:
        doc["provenance"] = _provenance(trajectory)
        doc["termination_reason"] = trajectory.termination_reason
    Path(path).write_text(
        json.dumps(doc, sort_keys=True, indent=2) + "\n", newline="\n"
    )


def write_sweep_csv(rows: Iterable[dict[str, Any]], path: str | Path) -> None:
    """Sweep summary table; column order is taken from the first row."""
    rows = list(rows)
    if not rows:
        raise ValueError("no sweep rows to write")
    fieldnames = list(rows[0].keys())
    lines = [",".join(fieldnames)]
    for row in rows:
        cells = []
        for name in fieldnames:
            value = row.get(name)
            if isinstance(value, float):
                cells.append(_fmt(value))
            elif value is None:
                cells.append("")
            else:
                cells.append(str(value))
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n", newline="\n")
