"""
Test the two-mode electrolyte model.

Programmer: cellpyx team
Since:  2024-05
"""

import pytest

import numpy as np

from cellpyx.parameters import reference_pbm_params
from cellpyx.models.electrolyte import (
    ElectrolyteRomState, UNIFORM_ELECTROLYTE, electrolyte_basis, electrolyte_step, steady_state,
    three_region_grid, cumulative_source,
)
from cellpyx.models.simulation import ElectrolyteDepletionError

NUM_OF_RANDOM_INSTANCES=10

PARAMS = reference_pbm_params()
BASIS = electrolyte_basis(PARAMS)
D_E = PARAMS.D_e(25.0)


def test_grid_covers_the_cell():
    x, region = three_region_grid(PARAMS.L_p, PARAMS.L_s, PARAMS.L_n, 10)
    assert x[0] == 0.0
    assert x[-1] == pytest.approx(PARAMS.cell_length, rel=1e-12)
    assert set(np.unique(region)) == {0, 1, 2}
    assert np.all(np.diff(x) > 0)


def test_source_integrates_to_zero():
    x, _ = three_region_grid(PARAMS.L_p, PARAMS.L_s, PARAMS.L_n, 50)
    cumulative = cumulative_source(x, PARAMS)
    assert cumulative[0] == 0.0
    assert cumulative[-1] == pytest.approx(0.0, abs=1e-12)


def test_zero_current_keeps_uniform():
    state = electrolyte_step(UNIFORM_ELECTROLYTE, 0.0, 10.0, PARAMS, 25.0, BASIS, D_E)
    assert state == UNIFORM_ELECTROLYTE
    assert BASIS.boundary_values(state, PARAMS.c_e0) == (PARAMS.c_e0, PARAMS.c_e0)


def test_salt_is_conserved():
    salt0 = BASIS.total_salt(UNIFORM_ELECTROLYTE, PARAMS.c_e0)
    for i in range(NUM_OF_RANDOM_INSTANCES):
        rng = np.random.default_rng(i)
        state = UNIFORM_ELECTROLYTE
        for current in rng.uniform(-300, 300, 30):
            state = electrolyte_step(state, current, 1.0, PARAMS, 25.0, BASIS, D_E)
            assert BASIS.total_salt(state, PARAMS.c_e0) == pytest.approx(salt0, rel=1e-10)


def test_long_step_reaches_steady_state():
    for current in (50.0, -80.0, 166.0):
        state = electrolyte_step(UNIFORM_ELECTROLYTE, current, 1e6, PARAMS, 25.0, BASIS, D_E)
        assert np.allclose(state, steady_state(current, D_E, BASIS), rtol=1e-12, atol=0)


def test_steady_state_is_linear_in_current():
    one = np.array(steady_state(40.0, D_E, BASIS))
    three = np.array(steady_state(120.0, D_E, BASIS))
    assert np.allclose(three, 3*one, rtol=1e-12)


def test_discharge_depletes_the_positive_side():
    state = steady_state(166.0, D_E, BASIS)
    c_0, c_L = BASIS.boundary_values(state, PARAMS.c_e0)
    assert c_0 < PARAMS.c_e0 < c_L
    avg_p, avg_n = BASIS.electrode_averages(state, PARAMS.c_e0)
    assert c_0 < avg_p < PARAMS.c_e0 < avg_n < c_L


def test_two_half_steps_equal_one_step():
    for i in range(NUM_OF_RANDOM_INSTANCES):
        rng = np.random.default_rng(i)
        state = ElectrolyteRomState(*rng.uniform(-20, 20, 2))
        current = rng.uniform(-200, 200)
        one = electrolyte_step(state, current, 4.0, PARAMS, 25.0, BASIS, D_E)
        half = electrolyte_step(state, current, 2.0, PARAMS, 25.0, BASIS, D_E)
        two = electrolyte_step(half, current, 2.0, PARAMS, 25.0, BASIS, D_E)
        assert np.allclose(one, two, rtol=1e-12, atol=1e-12)


def test_depletion_is_reported():
    with pytest.raises(ElectrolyteDepletionError):
        electrolyte_step(UNIFORM_ELECTROLYTE, 1e4, 1e6, PARAMS, 25.0, BASIS, D_E)
    with pytest.raises(ValueError, match="dt must be positive"):
        electrolyte_step(UNIFORM_ELECTROLYTE, 1.0, 0.0, PARAMS, 25.0, BASIS, D_E)


if __name__ == "__main__":
     pytest.main(["-v",__file__])
