"""Shared fixtures: the reference configuration and random-config helpers."""

from __future__ import annotations

import numpy as np
import pytest

from swarmstab import ExperimentConfig, InitSpec, OutputSpec, SwarmParams

# Reference configuration used throughout the acceptance suite:
# a=0.01, b=0.5, c=1, M=10, n=2, uniform init in [-5, 5]^n, seed 2,
# 10k-step budget. Seed 2 settles to residual < 1e-10 within the budget
# for every n in {1, 2, 3} (many 2-D seeds instead creep along a nearly
# flat rearrangement mode for >10k steps).
REF = {"a": 0.01, "b": 0.5, "c": 1.0, "M": 10, "n": 2}
REF_SEED = 2
REF_HALF_WIDTH = 5.0
REF_MAX_STEPS = 10_000


def ref_params(M: int = 10, n: int = 2) -> SwarmParams:
    return SwarmParams(a=REF["a"], b=REF["b"], c=REF["c"], M=M, n=n)


def ref_config(
    seed: int = REF_SEED,
    M: int = 10,
    n: int = 2,
    half_width: float = REF_HALF_WIDTH,
    max_steps: int = REF_MAX_STEPS,
    trajectory_path: str | None = None,
    report_path: str | None = None,
    format: str = "csv",
) -> ExperimentConfig:
    return ExperimentConfig(
        params=ref_params(M=M, n=n),
        seed=seed,
        init=InitSpec(kind="uniform_hypercube", half_width=half_width),
        max_steps=max_steps,
        output=OutputSpec(
            trajectory_path=trajectory_path, report_path=report_path, format=format
        ),
    )


def random_valid_setup(rng: np.random.Generator, max_agents: int = 50):
    """A params/positions pair inside the regime where descent is provable.

    a*M < 1 keeps the update contracting outside the cohesion ball, so
    tests drawn from here may expect the claimed properties to hold.
    """
    M = int(rng.integers(2, max_agents + 1))
    n = int(rng.integers(1, 4))
    a = float(rng.uniform(0.001, 0.9)) / M
    b = a * float(rng.uniform(1.5, 100.0))
    c = float(rng.uniform(0.1, 4.0))
    L = float(rng.uniform(1.0, 100.0))
    params = SwarmParams(a=a, b=b, c=c, M=M, n=n)
    positions = rng.uniform(-L, L, size=(M, n))
    return params, positions


@pytest.fixture(scope="session")
def ref_run():
    """Completed reference run plus its analysis, cached per dimension."""
    from swarmstab import run_experiment

    cache: dict[int, tuple] = {}

    def get(n: int = 2):
        if n not in cache:
            cache[n] = run_experiment(ref_config(n=n))
        return cache[n]

    return get
