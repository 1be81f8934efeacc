"""Discrete-time swarm dynamics with attraction-repulsion coupling.

Model
-----
M agents move synchronously in R^n; every agent sees every other agent
and there are no delays:

    x_i(k+1) = x_i(k) + sum_{j != i} g(x_i(k) - x_j(k))

with the pairwise interaction

    g(y) = -y * (a - b * exp(-||y||^2 / c)),   a, b, c > 0,  b > a.

g is linearly attractive at long range (gain ``a``) and exponentially
repulsive at short range (amplitude ``b``, squared-distance scale ``c``);
it vanishes at y = 0 and on the sphere ||y|| = sqrt(c * ln(b/a)).

Everything in this module is a pure function over immutable value types,
so all of it is safe to call concurrently. A trajectory itself is
inherently sequential; within one step the per-agent updates read only
the step-k snapshot and the inner pairwise sums run in ascending partner
order, so repeated runs are bit-identical on one platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

__all__ = [
    "DivergenceError",
    "SwarmParams",
    "SwarmState",
    "StopCriteria",
    "Trajectory",
    "TerminationReason",
    "attraction_repulsion",
    "interaction_forces",
    "step",
    "simulate",
    "center",
    "error_vectors",
]

TerminationReason = Literal["max_steps", "equilibrium_reached", "diverged"]

DEFAULT_GUARD_FACTOR = 1e6


class DivergenceError(RuntimeError):
    """A state update produced a non-finite coordinate.

    Attributes:
        step: index of the state that would have been non-finite.
        agent: index of the first offending agent.
    """

    def __init__(self, step: int, agent: int):
        super().__init__(
            f"non-finite position for agent {agent} at step {step}"
        )
        self.step = step
        self.agent = agent


@dataclass(frozen=True)
class SwarmParams:
    """Model constants for one swarm.

    Attributes:
        a: linear attraction gain, > 0.
        b: repulsion amplitude, > 0 and strictly greater than ``a`` so the
           interaction has a real sign-change radius.
        c: repulsion length scale in squared-distance units, > 0.
        M: number of agents, >= 1.
        n: space dimension, >= 1.
    """

    a: float
    b: float
    c: float
    M: int
    n: int

    def __post_init__(self):
        for name in ("a", "b", "c"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a finite positive number, got {value!r}")
        if not self.b > self.a:
            raise ValueError(
                f"b must exceed a (got a={self.a}, b={self.b}); otherwise the "
                "interaction never switches from repulsion to attraction"
            )
        if not (isinstance(self.M, int) and self.M >= 1):
            raise ValueError(f"M must be an integer >= 1, got {self.M!r}")
        if not (isinstance(self.n, int) and self.n >= 1):
            raise ValueError(f"n must be an integer >= 1, got {self.n!r}")


@dataclass(frozen=True)
class SwarmState:
    """Positions of all agents at one time step.

    ``positions`` is coerced to a read-only float64 array of shape (M, n);
    every coordinate must be finite.
    """

    k: int
    positions: np.ndarray

    def __post_init__(self):
        if not (isinstance(self.k, int) and self.k >= 0):
            raise ValueError(f"k must be a nonnegative integer, got {self.k!r}")
        pos = np.array(self.positions, dtype=np.float64, copy=True)
        if pos.ndim != 2 or pos.shape[0] < 1 or pos.shape[1] < 1:
            raise ValueError(f"positions must have shape (M, n), got {pos.shape}")
        if not np.isfinite(pos).all():
            raise ValueError("positions must be finite")
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)

    @property
    def num_agents(self) -> int:
        return self.positions.shape[0]

    @property
    def dim(self) -> int:
        return self.positions.shape[1]


@dataclass(frozen=True)
class StopCriteria:
    """Early-exit rules for :func:`simulate`.

    Attributes:
        residual_threshold: stop (equilibrium reached) once the largest
            per-agent net interaction force has norm strictly below this
            value; 0.0 disables the check.
        divergence_radius: abort (diverged) once any agent strays farther
            than this from the swarm center. ``None`` picks
            ``1e6 * (max initial center distance + 1)``.
    """

    residual_threshold: float = 1e-10
    divergence_radius: float | None = None

    def __post_init__(self):
        if not (math.isfinite(self.residual_threshold) and self.residual_threshold >= 0):
            raise ValueError("residual_threshold must be finite and >= 0")
        if self.divergence_radius is not None and not self.divergence_radius > 0:
            raise ValueError("divergence_radius must be positive or None")


@dataclass(frozen=True)
class Trajectory:
    """A simulated run: consecutive states plus provenance.

    ``states[k].k == k`` for every k, and consecutive states are related
    by exactly one application of :func:`step` (guaranteed by
    construction in :func:`simulate`, not re-verified here).
    """

    params: SwarmParams
    seed: int
    init_spec: str
    states: tuple[SwarmState, ...] = field(repr=False)
    termination_reason: TerminationReason

    def __post_init__(self):
        if not self.states:
            raise ValueError("a trajectory holds at least the initial state")
        for k, state in enumerate(self.states):
            if state.k != k:
                raise ValueError(f"states[{k}].k == {state.k}, expected {k}")
            if state.positions.shape != (self.params.M, self.params.n):
                raise ValueError(
                    f"states[{k}] has shape {state.positions.shape}, "
                    f"params say ({self.params.M}, {self.params.n})"
                )
        if self.termination_reason not in ("max_steps", "equilibrium_reached", "diverged"):
            raise ValueError(f"unknown termination reason {self.termination_reason!r}")

    def __len__(self) -> int:
        return len(self.states)

    @property
    def final_state(self) -> SwarmState:
        return self.states[-1]

    def positions_array(self) -> np.ndarray:
        """All positions stacked as a (K+1, M, n) array."""
        return np.stack([s.positions for s in self.states])


def _require_match(state: SwarmState, params: SwarmParams) -> None:
    if state.positions.shape != (params.M, params.n):
        raise ValueError(
            f"state shape {state.positions.shape} does not match "
            f"params ({params.M}, {params.n})"
        )


def attraction_repulsion(y: np.ndarray, params: SwarmParams) -> np.ndarray:
    """Pairwise interaction g(y) = -y * (a - b * exp(-||y||^2 / c)).

    Accepts a single displacement of shape (n,) or a batch (..., n) and
    applies g row-wise. Exactly odd: ``attraction_repulsion(-y)`` is the
    floating-point negation of ``attraction_repulsion(y)``.

    Raises:
        ValueError: non-finite input, or trailing dimension != params.n.
    """
    y = np.asarray(y, dtype=np.float64)
    if y.ndim < 1 or y.shape[-1] != params.n:
        raise ValueError(f"expected trailing dimension {params.n}, got shape {y.shape}")
    if not np.isfinite(y).all():
        raise ValueError("attraction_repulsion requires finite input")
    sq = (y * y).sum(axis=-1)
    gain = params.a - params.b * np.exp(-sq / params.c)
    return -y * gain[..., None]


def interaction_forces(positions: np.ndarray, params: SwarmParams) -> np.ndarray:
    """Net interaction force sum_{j != i} g(x_i - x_j) for every agent.

    ``positions`` has shape (M, n) or a batch of states (..., M, n); the
    result has the same shape. The sum over partners j is accumulated in
    ascending j so results are reproducible bit-for-bit; the j == i term
    is included but contributes exactly zero (g(0) = 0). Per-state values
    are identical whether states are evaluated singly or batched.
    """
    positions = np.asarray(positions, dtype=np.float64)
    if positions.ndim < 2 or positions.shape[-2:] != (params.M, params.n):
        raise ValueError(
            f"positions must end in shape ({params.M}, {params.n}), got {positions.shape}"
        )
    total = np.zeros_like(positions)
    # Overflow to inf/nan is legal here; callers detect non-finite output.
    with np.errstate(over="ignore", invalid="ignore"):
        for j in range(params.M):
            y = positions - positions[..., j : j + 1, :]
            sq = (y * y).sum(axis=-1)
            gain = params.a - params.b * np.exp(-sq / params.c)
            total -= y * gain[..., None]
    return total


def step(state: SwarmState, params: SwarmParams) -> SwarmState:
    """One synchronous update: every agent moves from the same snapshot.

    Raises:
        DivergenceError: some coordinate of the update is non-finite.
    """
    _require_match(state, params)
    with np.errstate(over="ignore", invalid="ignore"):
        new_positions = state.positions + interaction_forces(state.positions, params)
    finite = np.isfinite(new_positions).all(axis=1)
    if not finite.all():
        raise DivergenceError(step=state.k + 1, agent=int(np.argmin(finite)))
    return SwarmState(k=state.k + 1, positions=new_positions)


def _max_center_distance(positions: np.ndarray) -> float:
    offsets = positions - positions.mean(axis=0)
    return float(np.sqrt((offsets * offsets).sum(axis=1)).max())


def simulate(
    initial: SwarmState,
    params: SwarmParams,
    max_steps: int,
    stop: StopCriteria | None = None,
    *,
    seed: int = 0,
    init_spec: str = "explicit",
) -> Trajectory:
    """Iterate :func:`step` from ``initial`` until a stop criterion fires.

    Stops with reason ``equilibrium_reached`` once the largest net force
    norm falls below ``stop.residual_threshold`` (the final state then
    moves by less than that under one further step), with ``diverged`` when
    a coordinate turns non-finite or an agent exceeds the divergence
    radius (the trajectory is truncated and returned, never raised), and
    with ``max_steps`` otherwise. Identical inputs produce bit-identical
    trajectories on one platform.

    Args:
        initial: state with k == 0.
        params: model constants consistent with ``initial``.
        max_steps: maximum number of updates, >= 0.
        stop: early-exit rules; defaults to ``StopCriteria()``.
        seed: recorded in the trajectory provenance.
        init_spec: description of how ``initial`` was produced.
    """
    _require_match(initial, params)
    if initial.k != 0:
        raise ValueError(f"trajectories start at k=0, got initial.k={initial.k}")
    if not (isinstance(max_steps, int) and max_steps >= 0):
        raise ValueError(f"max_steps must be an integer >= 0, got {max_steps!r}")
    stop = stop if stop is not None else StopCriteria()
    guard = stop.divergence_radius
    if guard is None:
        guard = DEFAULT_GUARD_FACTOR * (_max_center_distance(initial.positions) + 1.0)

    states = [initial]
    positions = initial.positions
    reason: TerminationReason = "max_steps"
    for k in range(max_steps):
        forces = interaction_forces(positions, params)
        residual = float(np.sqrt((forces * forces).sum(axis=1)).max())
        if residual < stop.residual_threshold:
            reason = "equilibrium_reached"
            break
        positions = positions + forces
        if not np.isfinite(positions).all():
            reason = "diverged"
            break
        states.append(SwarmState(k=k + 1, positions=positions))
        if _max_center_distance(positions) > guard:
            reason = "diverged"
            break

    return Trajectory(
        params=params,
        seed=seed,
        init_spec=init_spec,
        states=tuple(states),
        termination_reason=reason,
    )


def center(state: SwarmState) -> np.ndarray:
    """Arithmetic mean of all agent positions (stationary under `step`)."""
    return state.positions.mean(axis=0)


def error_vectors(state: SwarmState) -> np.ndarray:
    """Per-agent displacement from the swarm center, shape (M, n).

    The rows sum to the zero vector up to rounding.
    """
    return state.positions - center(state)
