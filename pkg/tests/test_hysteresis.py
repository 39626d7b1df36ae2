"""
Test the one-state hysteresis model.

Programmer: cellpyx team
Since:  2024-05
"""

import math

import pytest

import numpy as np

from cellpyx.cells import ECM_SOC_GRID, ECM_TEMP_GRID
from cellpyx.hysteresis import (
    HysteresisParams, HysteresisState, NEUTRAL_HYSTERESIS, decay_factor, update_h, update_sign,
    hysteresis_step, hysteresis_voltage, reference_hysteresis_params,
)

NUM_OF_RANDOM_INSTANCES=10
CAPACITY_AH = 166.0


def test_constant_current_drives_h_to_minus_sign():
    for i in range(NUM_OF_RANDOM_INSTANCES):
        rng = np.random.default_rng(i)
        current = rng.choice([-1, 1]) * rng.uniform(30, 300)
        state = HysteresisState(rng.uniform(-1, 1), 0)
        for _ in range(20000):
            state = hysteresis_step(state, current, 1.0, 60.0, 1.0, CAPACITY_AH)
        assert state.h == pytest.approx(-np.sign(current), abs=1e-9)
        assert state.s == -np.sign(current)


def test_convergence_ratio_per_step():
    for i in range(NUM_OF_RANDOM_INSTANCES):
        rng = np.random.default_rng(i)
        current = rng.choice([-1, 1]) * rng.uniform(1, 300)
        eta, gamma, dt = rng.uniform(0.95, 1.0), rng.uniform(1, 200), rng.uniform(0.1, 10)
        target = -np.sign(current)
        state = HysteresisState(rng.uniform(-0.9, 0.9), 0)
        for _ in range(5):
            nxt = update_h(state, current, eta, gamma, dt, CAPACITY_AH)
            ratio = (nxt.h - target) / (state.h - target)
            expected = math.exp(-abs(eta * current * gamma * dt / (CAPACITY_AH * 3600)))
            assert ratio == pytest.approx(expected, abs=1e-12)
            state = nxt


def test_rest_holds_both_states():
    state = HysteresisState(0.37, -1)
    assert hysteresis_step(state, 0.0, 1.0, 60.0, 1.0, CAPACITY_AH) == state
    assert decay_factor(0.0, 1.0, 60.0, 1.0, CAPACITY_AH) == 1.0


def test_sign_state_follows_current():
    assert update_sign(NEUTRAL_HYSTERESIS, 10.0).s == -1
    assert update_sign(NEUTRAL_HYSTERESIS, -10.0).s == 1
    assert update_sign(HysteresisState(0.0, -1), 0.0).s == -1


def test_two_half_steps_equal_one_step():
    for i in range(NUM_OF_RANDOM_INSTANCES):
        rng = np.random.default_rng(i)
        current, gamma = rng.uniform(-200, 200), rng.uniform(1, 100)
        state = HysteresisState(rng.uniform(-1, 1), 0)
        one = update_h(state, current, 1.0, gamma, 2.0, CAPACITY_AH)
        two = update_h(update_h(state, current, 1.0, gamma, 1.0, CAPACITY_AH), current, 1.0, gamma, 1.0, CAPACITY_AH)
        assert one.h == pytest.approx(two.h, abs=1e-12)


def test_voltage_combines_instantaneous_and_dynamic_terms():
    params = HysteresisParams.constant(m0=0.004, m=0.015, gamma=30.0)
    state = HysteresisState(0.4, -1)
    assert hysteresis_voltage(state, 0.3, 10.0, params) == pytest.approx(-0.004 + 0.015*0.4, abs=1e-15)
    assert hysteresis_voltage(NEUTRAL_HYSTERESIS, 0.3, 10.0, HysteresisParams.zero()) == 0.0


def test_voltage_is_odd_in_the_state():
    for i in range(NUM_OF_RANDOM_INSTANCES):
        rng = np.random.default_rng(i)
        params = HysteresisParams(
            m0=rng.uniform(0, 0.01, len(ECM_TEMP_GRID)),
            m_map=rng.uniform(0, 0.03, (len(ECM_SOC_GRID), len(ECM_TEMP_GRID))),
            gamma=rng.uniform(1, 500))
        for _ in range(20):
            h, s = rng.uniform(-1, 1), int(rng.choice([-1, 0, 1]))
            soc, temp = rng.uniform(0, 1), rng.uniform(-20, 55)
            positive = hysteresis_voltage(HysteresisState(h, s), soc, temp, params)
            negative = hysteresis_voltage(HysteresisState(-h, -s), soc, temp, params)
            assert negative == pytest.approx(-positive, abs=1e-15)


def test_params_round_trip_and_validation():
    params = reference_hysteresis_params()
    loaded = HysteresisParams.from_dict(params.to_dict())
    assert loaded.gamma == params.gamma
    for soc,temp in [(0.0, -20.0), (0.45, 12.0), (1.0, 55.0)]:
        assert loaded.m_at(soc, temp) == pytest.approx(params.m_at(soc, temp), abs=1e-15)
        assert loaded.m0_at(temp) == pytest.approx(params.m0_at(temp), abs=1e-15)
    with pytest.raises(ValueError):
        HysteresisState(h=-1.01)


if __name__ == "__main__":
     pytest.main(["-v",__file__])
