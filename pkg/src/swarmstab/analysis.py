"""Derived bounds and stability checks for simulated swarm trajectories.

Closed forms computed here, for params (a, b, c) and an initial state:

    sign_change_radius      r0  = sqrt(c * ln(b/a))      g flips sign at r0
    cohesion_radius         eps = (b/a) sqrt(c/2) e^(-1/2)
    entry_step_bound        max_i ceil(V_i(0) / (a eps^2))
    gaussian_at_sign_change exp(-r0^2 / c)               equals a/b

with V_i = 0.5 ||x_i - xbar||^2 the per-agent center-offset energy. The
cohesion radius is where the worst-case repulsive pull b * max_r(r e^(-r^2/c))
stops dominating the attractive pull a * ||e_i||, i.e. b * psi_max = a * eps.

:func:`analyze` replays a trajectory and renders one verdict per claimed
property: the center never drifts, every agent enters the cohesion ball
within the entry bound, center-offset energy never rises outside the
ball, and the run settles into a zero-net-force arrangement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .dynamics import SwarmParams, SwarmState, Trajectory, interaction_forces

__all__ = [
    "CohesionBounds",
    "Verdict",
    "AnalysisReport",
    "sign_change_radius",
    "cohesion_radius",
    "gaussian_at_sign_change",
    "entry_step_bound",
    "cohesion_bounds",
    "lyapunov_individual",
    "lyapunov_pairwise",
    "is_free_agent",
    "equilibrium_residual",
    "ball_entry_step",
    "repulsion_envelope_peak",
    "analyze",
]

# Defaults for analyze(); double-precision headroom at desk scale.
CENTER_DRIFT_TOL = 1e-9
RESIDUAL_THRESHOLD = 1e-8
MONOTONE_REL_TOL = 1e-12

ENVELOPE_BISECTIONS = 50


def sign_change_radius(params: SwarmParams) -> float:
    """Inter-agent distance sqrt(c * ln(b/a)) where g switches sign."""
    return math.sqrt(params.c * math.log(params.b / params.a))


def cohesion_radius(params: SwarmParams) -> float:
    """Radius (b/a) * sqrt(c/2) * exp(-1/2) of the ball all agents enter.

    Depends only on a, b, c — not on the agent count or the dimension.
    """
    return (params.b / params.a) * math.sqrt(params.c / 2.0) * math.exp(-0.5)


def gaussian_at_sign_change(params: SwarmParams) -> float:
    """exp(-r0^2/c) at the sign-change radius; algebraically a/b."""
    r0 = sign_change_radius(params)
    return math.exp(-(r0 * r0) / params.c)


def lyapunov_individual(state: SwarmState) -> np.ndarray:
    """Center-offset energies V_i = 0.5 * ||x_i - xbar||^2, shape (M,)."""
    offsets = state.positions - state.positions.mean(axis=0)
    return 0.5 * (offsets * offsets).sum(axis=1)


def lyapunov_pairwise(state: SwarmState) -> float:
    """Half the sum of squared inter-agent distances over unordered pairs."""
    i, j = np.triu_indices(state.num_agents, k=1)
    diffs = state.positions[i] - state.positions[j]
    return 0.5 * float((diffs * diffs).sum())


def entry_step_bound(initial: SwarmState, params: SwarmParams) -> int:
    """Worst-case step count max_i ceil(V_i(0) / (a * eps^2)).

    Every agent is guaranteed inside the cohesion ball by this step; it
    never decreases when the initial center offsets grow.
    """
    if initial.positions.shape != (params.M, params.n):
        raise ValueError("initial state does not match params")
    eps = cohesion_radius(params)
    ratios = lyapunov_individual(initial) / (params.a * eps * eps)
    return int(np.ceil(ratios.max()))


@dataclass(frozen=True)
class CohesionBounds:
    """Closed-form bounds derived from params and an initial state."""

    sign_change_radius: float
    cohesion_radius: float
    entry_step_bound: int
    gaussian_at_sign_change: float

    def as_dict(self) -> dict[str, float | int]:
        return {
            "sign_change_radius": self.sign_change_radius,
            "cohesion_radius": self.cohesion_radius,
            "entry_step_bound": self.entry_step_bound,
            "gaussian_at_sign_change": self.gaussian_at_sign_change,
        }


def cohesion_bounds(initial: SwarmState, params: SwarmParams) -> CohesionBounds:
    return CohesionBounds(
        sign_change_radius=sign_change_radius(params),
        cohesion_radius=cohesion_radius(params),
        entry_step_bound=entry_step_bound(initial, params),
        gaussian_at_sign_change=gaussian_at_sign_change(params),
    )


def is_free_agent(state: SwarmState, i: int, radius: float) -> bool:
    """True iff agent i is strictly farther than ``radius`` from every other.

    Vacuously true for a single agent. This is the per-state predicate;
    trajectory-level monitoring lives in :func:`analyze` as
    ``free_agent_violations``.
    """
    if not 0 <= i < state.num_agents:
        raise IndexError(f"agent index {i} out of range for M={state.num_agents}")
    diffs = state.positions - state.positions[i]
    dists = np.sqrt((diffs * diffs).sum(axis=1))
    mask = np.arange(state.num_agents) != i
    return bool((dists[mask] > radius).all())


def equilibrium_residual(state: SwarmState, params: SwarmParams) -> float:
    """Largest per-agent net-force norm; zero exactly on equilibria."""
    forces = interaction_forces(state.positions, params)
    return float(np.sqrt((forces * forces).sum(axis=1)).max())


def ball_entry_step(
    trajectory: Trajectory, radius: float
) -> tuple[tuple[int | None, ...], int | None]:
    """First step each agent comes within ``radius`` of the swarm center.

    Returns:
        (per_agent, overall): per-agent first k with ||x_i(k) - xbar|| <=
        radius (closed ball), ``None`` if never; overall is the max over
        agents, ``None`` if any agent never enters.
    """
    positions = trajectory.positions_array()
    offsets = positions - positions.mean(axis=1, keepdims=True)
    inside = (offsets * offsets).sum(axis=2) <= radius * radius  # (K+1, M)
    per_agent: list[int | None] = []
    for i in range(positions.shape[1]):
        hits = np.nonzero(inside[:, i])[0]
        per_agent.append(int(hits[0]) if hits.size else None)
    overall = None if any(e is None for e in per_agent) else max(per_agent)
    return tuple(per_agent), overall


def repulsion_envelope_peak(
    params: SwarmParams, grid_points: int = 10_000
) -> tuple[float, float]:
    """Numerically locate the peak of r * exp(-r^2/c) on (0, 4*sqrt(c)].

    Grid scan followed by bisection on the derivative sign; no external
    optimizer. The peak sits at sqrt(c/2) analytically, which is what the
    returned argmax approximates to ~1e-6*sqrt(c) and the returned value
    to ~1e-9 relative.

    Raises:
        ValueError: fewer than 3 grid points.
    """
    if not (isinstance(grid_points, int) and grid_points >= 3):
        raise ValueError(f"grid_points must be an integer >= 3, got {grid_points!r}")
    c = params.c
    hi = 4.0 * math.sqrt(c)
    grid = np.linspace(0.0, hi, grid_points + 1)[1:]
    values = grid * np.exp(-(grid * grid) / c)
    best = int(np.argmax(values))
    lo_r = grid[best - 1] if best > 0 else 0.0
    hi_r = grid[best + 1] if best + 1 < grid.size else grid[-1]

    # d/dr [r e^(-r^2/c)] has the sign of (1 - 2 r^2 / c).
    for _ in range(ENVELOPE_BISECTIONS):
        mid = 0.5 * (lo_r + hi_r)
        if 1.0 - 2.0 * mid * mid / c > 0.0:
            lo_r = mid
        else:
            hi_r = mid
    peak_r = 0.5 * (lo_r + hi_r)
    return peak_r, peak_r * math.exp(-(peak_r * peak_r) / c)


@dataclass(frozen=True)
class Verdict:
    """Outcome of one claimed-property check, with concrete evidence."""

    name: str
    passed: bool
    evidence: dict[str, Any]


@dataclass(frozen=True)
class AnalysisReport:
    """Per-step series, violation logs, and verdicts for one trajectory.

    Series all have one entry per trajectory state. Violation logs are
    integer arrays: ``descent_violations`` rows (k, i) mark center-offset
    energy rising over step k for an agent outside the cohesion ball;
    ``free_agent_violations`` rows (k, i, j) mark pairs at distance <= the
    sign-change radius (monitoring data, never an error).
    """

    bounds: CohesionBounds
    v_series: np.ndarray = field(repr=False)  # (K+1, M)
    j_series: np.ndarray = field(repr=False)  # (K+1,)
    entry_steps: tuple[int | None, ...]
    overall_entry_step: int | None
    descent_violations: np.ndarray = field(repr=False)  # (D, 2) int
    free_agent_violations: np.ndarray = field(repr=False)  # (F, 3) int
    equilibrium_residual_series: np.ndarray = field(repr=False)  # (K+1,)
    verdicts: dict[str, Verdict]

    @property
    def final_residual(self) -> float:
        return float(self.equilibrium_residual_series[-1])

    def all_passed(self) -> bool:
        return all(v.passed for v in self.verdicts.values())


def _pair_violations(positions: np.ndarray, radius: float) -> np.ndarray:
    """(k, i, j) rows for pairs i < j at distance <= radius, chunked."""
    n_states, M = positions.shape[0], positions.shape[1]
    iu, ju = np.triu_indices(M, k=1)
    rows: list[np.ndarray] = []
    chunk = max(1, int(4_000_000 // max(1, iu.size)))  # cap temp size
    for start in range(0, n_states, chunk):
        block = positions[start : start + chunk]
        diffs = block[:, iu, :] - block[:, ju, :]
        close = (diffs * diffs).sum(axis=2) <= radius * radius
        ks, ps = np.nonzero(close)
        rows.append(np.column_stack([ks + start, iu[ps], ju[ps]]))
    return np.concatenate(rows) if rows else np.empty((0, 3), dtype=np.int64)


def analyze(
    trajectory: Trajectory,
    *,
    residual_threshold: float = RESIDUAL_THRESHOLD,
    center_drift_tol: float = CENTER_DRIFT_TOL,
    monotone_rel_tol: float = MONOTONE_REL_TOL,
) -> AnalysisReport:
    """Compute all per-step series and render one verdict per claim.

    Verdicts (never raised; failures are encoded with evidence):

    * ``center_stationary``: per-step center drift stays within
      ``center_drift_tol`` relative to 1 + ||center||.
    * ``cohesion_within_bound``: every agent enters the cohesion ball no
      later than the entry-step bound.
    * ``descent_outside_ball``: zero descent violations.
    * ``converges_to_equilibrium``: final residual <= ``residual_threshold``
      and the pair-energy series never rises over a step starting from an
      all-free state (pairs closer than the sign-change radius put a step
      outside the claim's hypothesis, so it is skipped).
    """
    params = trajectory.params
    positions = trajectory.positions_array()  # (K+1, M, n)
    n_states = positions.shape[0]
    bounds = cohesion_bounds(trajectory.states[0], params)

    centers = positions.mean(axis=1)  # (K+1, n)
    offsets = positions - centers[:, None, :]
    offset_norms = np.sqrt((offsets * offsets).sum(axis=2))  # (K+1, M)
    v_series = 0.5 * offset_norms * offset_norms
    j_series = np.array([lyapunov_pairwise(s) for s in trajectory.states])

    forces = interaction_forces(positions, params)
    residual_series = np.sqrt((forces * forces).sum(axis=2)).max(axis=1)

    entry_steps, overall_entry = ball_entry_step(trajectory, bounds.cohesion_radius)

    outside = offset_norms[:-1] > bounds.cohesion_radius
    rising = v_series[1:] > v_series[:-1]
    descent_violations = np.column_stack(np.nonzero(outside & rising)).astype(np.int64)

    free_agent_violations = _pair_violations(positions, bounds.sign_change_radius)
    free_state = np.ones(n_states, dtype=bool)
    if free_agent_violations.size:
        free_state[np.unique(free_agent_violations[:, 0])] = False

    # Center drift, relative to scale 1 + ||center||.
    drift = np.sqrt(((centers[1:] - centers[:-1]) ** 2).sum(axis=1))
    scale = 1.0 + np.sqrt((centers[:-1] ** 2).sum(axis=1))
    rel_drift = drift / scale
    max_rel_drift = float(rel_drift.max()) if rel_drift.size else 0.0
    center_ok = max_rel_drift <= center_drift_tol
    center_evidence: dict[str, Any] = {
        "max_relative_drift": max_rel_drift,
        "at_step": int(np.argmax(rel_drift)) if rel_drift.size else None,
        "tolerance": center_drift_tol,
    }

    cohesion_ok = overall_entry is not None and overall_entry <= bounds.entry_step_bound
    cohesion_evidence = {
        "overall_entry_step": overall_entry,
        "entry_step_bound": bounds.entry_step_bound,
        "agents_never_inside": [i for i, e in enumerate(entry_steps) if e is None],
        "final_step": n_states - 1,
        "termination_reason": trajectory.termination_reason,
    }

    descent_ok = descent_violations.shape[0] == 0
    descent_evidence = {
        "violations": int(descent_violations.shape[0]),
        "first": descent_violations[0].tolist() if descent_violations.size else None,
    }

    j_scale = np.maximum(np.abs(j_series[:-1]), 1.0)
    j_rise = j_series[1:] > j_series[:-1] + monotone_rel_tol * j_scale
    pairwise_increases = np.nonzero(j_rise & free_state[:-1])[0]
    final_residual = float(residual_series[-1])
    equilibrium_ok = (
        final_residual <= residual_threshold and pairwise_increases.size == 0
    )
    equilibrium_evidence = {
        "final_residual": final_residual,
        "residual_threshold": residual_threshold,
        "free_states": int(free_state.sum()),
        "pair_energy_rises_from_free_state": pairwise_increases.tolist(),
        "pair_energy_nonincreasing_everywhere": not bool(j_rise.any()),
    }

    verdicts = {
        "center_stationary": Verdict("center_stationary", bool(center_ok), center_evidence),
        "cohesion_within_bound": Verdict(
            "cohesion_within_bound", bool(cohesion_ok), cohesion_evidence
        ),
        "descent_outside_ball": Verdict(
            "descent_outside_ball", bool(descent_ok), descent_evidence
        ),
        "converges_to_equilibrium": Verdict(
            "converges_to_equilibrium", bool(equilibrium_ok), equilibrium_evidence
        ),
    }

    return AnalysisReport(
        bounds=bounds,
        v_series=v_series,
        j_series=j_series,
        entry_steps=entry_steps,
        overall_entry_step=overall_entry,
        descent_violations=descent_violations,
        free_agent_violations=free_agent_violations,
        equilibrium_residual_series=residual_series,
        verdicts=verdicts,
    )
