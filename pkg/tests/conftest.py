"""Shared fixtures: the expensive spectral and dynamical artifacts.

Session scope keeps each eigensolve and each gate extraction to a single
run across the whole suite; everything here is deterministic.
"""

import math

import pytest

from ccjj import evolution, gates, grids, model, spectrum

# Gate-reproduction runs use trapezoidal (linear) ramps; the bias-pulse
# sketch this follows is a trapezoid, and the smooth-ramp variant is
# exercised separately by the sensitivity tests.
PAPER_RAMP_SHAPE = "linear"
TAU_R = 20.0 * math.pi


@pytest.fixture(scope="session")
def scales4():
    return model.scales_for_ns(4.0, 0.01)


@pytest.fixture(scope="session")
def grid4(scales4):
    return grids.build_grid(scales4, (-0.1, 0.0), 128)


@pytest.fixture(scope="session")
def slice_parked(scales4, grid4):
    """Eigenpairs at the parking detuning eps_A = -0.1."""
    return spectrum.solve_2d(-0.1, scales4, grid4, count=6)


@pytest.fixture(scope="session")
def slice_zero(scales4, grid4):
    """Eigenpairs at the symmetric point eps = 0."""
    return spectrum.solve_2d(0.0, scales4, grid4, count=6)


@pytest.fixture(scope="session")
def crossing45(scales4, grid4):
    """(eps_star, gap) of the 4-5 avoided crossing."""
    return spectrum.find_avoided_crossing(scales4, grid4, 4, 5, (-0.08, -0.01))


@pytest.fixture(scope="session")
def slice_star(scales4, grid4, crossing45):
    return spectrum.solve_2d(crossing45[0], scales4, grid4, count=6)


@pytest.fixture(scope="session")
def u1_schedule():
    """The controlled-phase pulse at its published operating point."""
    return model.PulseSchedule(
        eps_a=-0.1,
        eps_b=-0.036,
        ramp_time=TAU_R,
        interaction_time=434.0,
        ramp_shape=PAPER_RAMP_SHAPE,
    )


@pytest.fixture(scope="session")
def u1_run(scales4, grid4, slice_parked, u1_schedule):
    matrix, trajectories = gates.extract_gate(
        u1_schedule,
        scales4,
        grid4,
        evolution.PropagationConfig(dt=0.01),
        slice_a=slice_parked,
    )
    report = gates.score_gate(matrix, "controlled_phase", u1_schedule)
    return {"matrix": matrix, "trajectories": trajectories, "report": report}


@pytest.fixture(scope="session")
def scales516():
    return model.scales_for_ns(5.16, 0.01)


@pytest.fixture(scope="session")
def grid516(scales516):
    return grids.build_grid(scales516, (-0.1, 0.0), 128)


@pytest.fixture(scope="session")
def slice516_parked(scales516, grid516):
    return spectrum.solve_2d(-0.1, scales516, grid516, count=6)


@pytest.fixture(scope="session")
def slice516_zero(scales516, grid516):
    return spectrum.solve_2d(0.0, scales516, grid516, count=6)


@pytest.fixture(scope="session")
def u2_schedule():
    """The swaplike pulse at its published operating point (k = 2)."""
    return model.PulseSchedule(
        eps_a=-0.1,
        eps_b=0.0,
        ramp_time=TAU_R,
        interaction_time=278.0,
        ramp_shape=PAPER_RAMP_SHAPE,
    )


@pytest.fixture(scope="session")
def u2_run(scales516, grid516, slice516_parked, u2_schedule):
    matrix, trajectories = gates.extract_gate(
        u2_schedule,
        scales516,
        grid516,
        evolution.PropagationConfig(dt=0.01),
        slice_a=slice516_parked,
    )
    report = gates.score_gate(matrix, "swaplike", u2_schedule)
    return {"matrix": matrix, "trajectories": trajectories, "report": report}
