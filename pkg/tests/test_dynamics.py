"""Dynamics module: interaction law, stepping, simulation, center algebra."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swarmstab import (
    DivergenceError,
    StopCriteria,
    SwarmParams,
    SwarmState,
    attraction_repulsion,
    center,
    error_vectors,
    interaction_forces,
    simulate,
    step,
)
from swarmstab.analysis import sign_change_radius

from conftest import random_valid_setup


def make_params(a=1.0, b=2.0, c=1.0, M=2, n=2) -> SwarmParams:
    return SwarmParams(a=a, b=b, c=c, M=M, n=n)


@st.composite
def valid_params(draw, max_agents=50):
    a = draw(st.floats(1e-4, 2.0))
    ratio = draw(st.floats(1.1, 200.0))
    c = draw(st.floats(1e-2, 50.0))
    M = draw(st.integers(1, max_agents))
    n = draw(st.integers(1, 3))
    return SwarmParams(a=a, b=a * ratio, c=c, M=M, n=n)


class TestSwarmParams:
    def test_valid(self):
        p = make_params()
        assert (p.a, p.b, p.c, p.M, p.n) == (1.0, 2.0, 1.0, 2, 2)

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(a=0.0),
            dict(a=-1.0),
            dict(b=0.0),
            dict(c=0.0),
            dict(c=-2.0),
            dict(a=float("nan")),
            dict(b=float("inf")),
            dict(M=0),
            dict(M=-3),
            dict(n=0),
            dict(M=2.5),
            dict(n=1.0),
        ],
    )
    def test_invalid_fields(self, kwargs):
        with pytest.raises(ValueError):
            make_params(**kwargs)

    def test_repulsion_must_dominate_attraction(self):
        # b == a leaves the interaction without a sign change; rejected.
        with pytest.raises(ValueError):
            make_params(a=1.0, b=1.0)
        with pytest.raises(ValueError):
            make_params(a=2.0, b=1.0)


class TestSwarmState:
    def test_coerces_and_freezes(self):
        s = SwarmState(k=0, positions=[[1.0, 2.0], [3.0, 4.0]])
        assert s.positions.dtype == np.float64
        assert s.positions.shape == (2, 2)
        with pytest.raises(ValueError):
            s.positions[0, 0] = 9.0

    def test_copies_input(self):
        raw = np.zeros((2, 2))
        s = SwarmState(k=0, positions=raw)
        raw[0, 0] = 7.0
        assert s.positions[0, 0] == 0.0

    @pytest.mark.parametrize(
        "k,positions",
        [
            (-1, [[0.0]]),
            (0, [0.0, 1.0]),
            (0, [[float("nan")]]),
            (0, [[float("inf"), 0.0]]),
            (0.5, [[0.0]]),
        ],
    )
    def test_invalid(self, k, positions):
        with pytest.raises(ValueError):
            SwarmState(k=k, positions=positions)


class TestAttractionRepulsion:
    def test_zero_vector_maps_to_zero(self):
        p = make_params()
        out = attraction_repulsion(np.zeros(2), p)
        assert np.array_equal(out, np.zeros(2))

    def test_vanishes_on_sign_change_sphere(self):
        rng = np.random.default_rng(5)
        for a, b, c in [(1.0, 2.0, 1.0), (0.01, 0.5, 1.0), (0.3, 3.3, 2.5)]:
            p = make_params(a=a, b=b, c=c, n=3)
            r0 = sign_change_radius(p)
            u = rng.normal(size=3)
            u /= math.sqrt((u * u).sum())
            out = attraction_repulsion(r0 * u, p)
            assert math.sqrt((out * out).sum()) <= 1e-12 * a * r0

    def test_scalar_example(self):
        # Hand evaluation: -(1 - 2*exp(-1)) in the first coordinate.
        p = make_params(a=1.0, b=2.0, c=1.0)
        out = attraction_repulsion(np.array([1.0, 0.0]), p)
        expected = -(1.0 - 2.0 * math.exp(-1.0))
        assert expected == pytest.approx(-0.26424111765711533, rel=1e-15)
        assert out[0] == pytest.approx(expected, rel=1e-14)
        assert out[1] == 0.0

    def test_batch_matches_single(self):
        p = make_params(n=3)
        rng = np.random.default_rng(0)
        ys = rng.uniform(-5, 5, size=(40, 3))
        batch = attraction_repulsion(ys, p)
        for row, y in zip(batch, ys):
            assert np.array_equal(row, attraction_repulsion(y, p))

    def test_rejects_nonfinite_and_bad_shape(self):
        p = make_params()
        with pytest.raises(ValueError):
            attraction_repulsion(np.array([np.nan, 0.0]), p)
        with pytest.raises(ValueError):
            attraction_repulsion(np.array([np.inf, 0.0]), p)
        with pytest.raises(ValueError):
            attraction_repulsion(np.array([1.0, 2.0, 3.0]), p)

    @given(valid_params(), st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=3))
    def test_odd_symmetry_exact(self, params, coords):
        y = np.array(coords[: params.n])
        left = attraction_repulsion(-y, params)
        right = -attraction_repulsion(y, params)
        assert np.array_equal(left, right)

    @given(
        valid_params(),
        st.floats(0.05, 0.95),
        st.floats(1.05, 4.0),
        st.integers(0, 2**32 - 1),
    )
    def test_sign_structure(self, params, t_in, t_out, dirseed):
        rng = np.random.default_rng(dirseed)
        u = rng.normal(size=params.n)
        u /= math.sqrt((u * u).sum())
        r0 = sign_change_radius(params)
        inside = t_in * r0 * u
        outside = t_out * r0 * u
        assert float(inside @ attraction_repulsion(inside, params)) > 0.0
        assert float(outside @ attraction_repulsion(outside, params)) < 0.0


class TestStep:
    def test_single_agent_is_fixed(self):
        p = make_params(M=1, n=3)
        s = SwarmState(k=0, positions=[[1.5, -2.0, 4.0]])
        out = step(s, p)
        assert out.k == 1
        assert np.array_equal(out.positions, s.positions)

    def test_two_agent_hand_value(self):
        # x1=2, x2=-2, a=0.1, b=0.2, c=1: the pair difference is 4, so
        # x1(1) = 2 - 4*(0.1 - 0.2*exp(-16)).
        p = make_params(a=0.1, b=0.2, c=1.0, M=2, n=1)
        s = SwarmState(k=0, positions=[[2.0], [-2.0]])
        out = step(s, p)
        expected = 2.0 + (-4.0) * (0.1 - 0.2 * math.exp(-16.0))
        assert expected == pytest.approx(1.6000000900281397, rel=1e-15)
        assert out.positions[0, 0] == pytest.approx(expected, rel=1e-14)
        assert out.positions[1, 0] == -out.positions[0, 0]

    def test_symmetric_pair_stays_symmetric(self):
        p = make_params(a=0.2, b=0.9, c=2.0, M=2, n=3)
        rng = np.random.default_rng(11)
        x = rng.uniform(-3, 3, size=3)
        s = SwarmState(k=0, positions=np.stack([x, -x]))
        out = step(s, p)
        assert np.array_equal(out.positions[1], -out.positions[0])
        assert np.array_equal(center(out), np.zeros(3))

    def test_shape_mismatch_rejected(self):
        p = make_params(M=3, n=2)
        s = SwarmState(k=0, positions=np.zeros((2, 2)))
        with pytest.raises(ValueError):
            step(s, p)

    def test_overflow_raises_divergence_error(self):
        p = make_params(a=1e308, b=1.5e308, c=1.0, M=2, n=1)
        s = SwarmState(k=3, positions=[[0.0], [1e3]])
        with pytest.raises(DivergenceError) as info:
            step(s, p)
        assert info.value.step == 4
        assert info.value.agent in (0, 1)


class TestSimulate:
    def test_zero_steps(self):
        p = make_params()
        s = SwarmState(k=0, positions=np.ones((2, 2)))
        t = simulate(s, p, 0)
        assert len(t) == 1
        assert t.termination_reason == "max_steps"
        assert np.array_equal(t.states[0].positions, s.positions)

    def test_coincident_swarm_is_fixed_point(self):
        p = make_params(M=4, n=2)
        s = SwarmState(k=0, positions=np.full((4, 2), 0.5))
        t = simulate(s, p, 10, StopCriteria(residual_threshold=0.0))
        assert len(t) == 11
        for state in t.states:
            assert np.array_equal(state.positions, s.positions)

    def test_coincident_swarm_detected_as_equilibrium(self):
        p = make_params(M=4, n=2)
        s = SwarmState(k=0, positions=np.full((4, 2), 0.5))
        t = simulate(s, p, 10)
        assert t.termination_reason == "equilibrium_reached"
        assert len(t) == 1

    def test_strong_attraction_diverges(self):
        # a*M = 5 with well-separated agents: the linear factor 1 - a*M
        # amplifies the center offsets until the guard trips.
        p = make_params(a=0.5, b=1.0, c=1.0, M=10, n=2)
        rng = np.random.default_rng(7)
        s = SwarmState(k=0, positions=rng.uniform(-50, 50, size=(10, 2)))
        t = simulate(s, p, 10_000)
        assert t.termination_reason == "diverged"
        assert len(t) < 100
        for state in t.states:
            assert np.isfinite(state.positions).all()

    def test_nonfinite_truncates_without_raising(self):
        p = make_params(a=1e308, b=1.5e308, c=1.0, M=2, n=1)
        s = SwarmState(k=0, positions=[[0.0], [1e3]])
        t = simulate(s, p, 5)
        assert t.termination_reason == "diverged"
        assert len(t) == 1

    def test_custom_guard_radius(self):
        p = make_params(a=0.7, b=1.0, c=1.0, M=4, n=1)
        s = SwarmState(k=0, positions=[[-30.0], [-10.0], [10.0], [30.0]])
        t = simulate(s, p, 100, StopCriteria(divergence_radius=35.0))
        assert t.termination_reason == "diverged"

    def test_deterministic_repeat(self):
        rng = np.random.default_rng(3)
        params, positions = random_valid_setup(rng, max_agents=12)
        s = SwarmState(k=0, positions=positions)
        t1 = simulate(s, params, 50)
        t2 = simulate(s, params, 50)
        assert t1.termination_reason == t2.termination_reason
        assert np.array_equal(t1.positions_array(), t2.positions_array())

    def test_consecutive_states_match_step(self):
        rng = np.random.default_rng(4)
        params, positions = random_valid_setup(rng, max_agents=8)
        t = simulate(SwarmState(k=0, positions=positions), params, 20,
                     StopCriteria(residual_threshold=0.0))
        for before, after in zip(t.states, t.states[1:]):
            assert np.array_equal(step(before, params).positions, after.positions)

    def test_state_indices_follow_position(self):
        p = make_params(a=0.05, b=0.4, c=1.0, M=3, n=1)
        s = SwarmState(k=0, positions=[[0.0], [1.0], [5.0]])
        t = simulate(s, p, 30, StopCriteria(residual_threshold=0.0))
        assert [st_.k for st_ in t.states] == list(range(len(t)))

    def test_rejects_bad_arguments(self):
        p = make_params()
        s = SwarmState(k=0, positions=np.zeros((2, 2)))
        with pytest.raises(ValueError):
            simulate(s, p, -1)
        with pytest.raises(ValueError):
            simulate(SwarmState(k=1, positions=np.zeros((2, 2))), p, 5)


class TestCenterAndErrors:
    def test_antipodal_pair_centers_at_origin(self):
        s = SwarmState(k=0, positions=[[3.0, -1.0], [-3.0, 1.0]])
        assert np.array_equal(center(s), np.zeros(2))

    def test_coincident_agents(self):
        s = SwarmState(k=0, positions=np.full((4, 3), 1.5))
        assert np.array_equal(center(s), np.full(3, 1.5))
        assert np.array_equal(error_vectors(s), np.zeros((4, 3)))

    def test_three_point_mean(self):
        s = SwarmState(k=0, positions=[[0.0], [1.0], [5.0]])
        assert center(s)[0] == 2.0

    def test_error_vectors_two_agents(self):
        s = SwarmState(k=0, positions=[[0.0], [4.0]])
        assert np.array_equal(error_vectors(s), [[-2.0], [2.0]])

    def test_error_vectors_sum_to_zero(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            _, positions = random_valid_setup(rng)
            s = SwarmState(k=0, positions=positions)
            total = error_vectors(s).sum(axis=0)
            scale = 1.0 + np.abs(positions).max()
            assert np.abs(total).max() <= 1e-12 * scale


# --- structural properties ---------------------------------------------------


@given(st.integers(0, 2**32 - 1), st.integers(1, 3))
@settings(max_examples=60, deadline=None)
def test_center_is_stationary_under_step(state_seed, n):
    rng = np.random.default_rng(state_seed)
    M = int(rng.integers(1, 51))
    a = float(rng.uniform(0.001, 1.9)) / M
    params = SwarmParams(a=a, b=a * float(rng.uniform(1.1, 100.0)),
                         c=float(rng.uniform(0.05, 10.0)), M=M, n=n)
    s = SwarmState(k=0, positions=rng.uniform(-1e3, 1e3, size=(M, n)))
    before = center(s)
    after = center(step(s, params))
    drift = math.sqrt(((after - before) ** 2).sum())
    assert drift <= 1e-9 * (1.0 + math.sqrt((before**2).sum()))


def _moderate_setup(rng):
    # Chaotic rearrangement amplifies rounding ~(1 + 2(b-a)) per step, so
    # equivariance over a 12-step window needs a capped repulsion margin.
    M = int(rng.integers(2, 31))
    n = int(rng.integers(1, 4))
    a = float(rng.uniform(0.001, 0.9)) / M
    params = SwarmParams(a=a, b=a + float(rng.uniform(0.01, 0.3)),
                         c=float(rng.uniform(0.1, 4.0)), M=M, n=n)
    positions = rng.uniform(-100.0, 100.0, size=(M, n))
    return params, positions


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_translation_equivariance(seed):
    rng = np.random.default_rng(seed)
    params, positions = _moderate_setup(rng)
    shift = rng.uniform(-50.0, 50.0, size=params.n)
    stop = StopCriteria(residual_threshold=0.0)
    base = simulate(SwarmState(k=0, positions=positions), params, 12, stop)
    moved = simulate(SwarmState(k=0, positions=positions + shift), params, 12, stop)
    for s_base, s_moved in zip(base.states, moved.states):
        dev = np.abs(s_moved.positions - (s_base.positions + shift)).max()
        assert dev <= 1e-9


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_permutation_equivariance(seed):
    rng = np.random.default_rng(seed)
    params, positions = _moderate_setup(rng)
    perm = rng.permutation(params.M)
    stop = StopCriteria(residual_threshold=0.0)
    base = simulate(SwarmState(k=0, positions=positions), params, 12, stop)
    relabeled = simulate(SwarmState(k=0, positions=positions[perm]), params, 12, stop)
    for s_base, s_rel in zip(base.states, relabeled.states):
        dev = np.abs(s_rel.positions - s_base.positions[perm]).max()
        assert dev <= 1e-9


@pytest.mark.parametrize("n", [1, 2, 3])
def test_interaction_forces_batch_matches_per_state(n):
    rng = np.random.default_rng(21)
    params = SwarmParams(a=0.01, b=0.5, c=1.0, M=6, n=n)
    batch = rng.uniform(-5, 5, size=(7, 6, n))
    stacked = interaction_forces(batch, params)
    for k in range(7):
        assert np.array_equal(stacked[k], interaction_forces(batch[k], params))
