"""Deterministic attraction-repulsion swarm simulator and stability checker.

``dynamics`` holds the model types and the synchronous update law,
``analysis`` the closed-form bounds and per-claim verdicts, ``harness``
seeded experiments and sweeps, ``io`` the file formats, and ``cli`` the
command-line front end.
"""

from .analysis import (
    AnalysisReport,
    CohesionBounds,
    Verdict,
    analyze,
    ball_entry_step,
    cohesion_bounds,
    cohesion_radius,
    entry_step_bound,
    equilibrium_residual,
    gaussian_at_sign_change,
    is_free_agent,
    lyapunov_individual,
    lyapunov_pairwise,
    repulsion_envelope_peak,
    sign_change_radius,
)
from .dynamics import (
    DivergenceError,
    StopCriteria,
    SwarmParams,
    SwarmState,
    Trajectory,
    attraction_repulsion,
    center,
    error_vectors,
    interaction_forces,
    simulate,
    step,
)
from .harness import (
    ConfigError,
    ExperimentConfig,
    InitSpec,
    OutputSpec,
    SweepSpec,
    exit_code,
    init_positions,
    is_validated_regime,
    load_config,
    load_sweep_spec,
    run_experiment,
    run_sweep,
)
from .io import (
    emit_report,
    export_trajectory,
    read_trajectory_csv,
    read_trajectory_json,
    write_sweep_csv,
    write_trajectory_csv,
    write_trajectory_json,
)

__version__ = "0.1.0"
