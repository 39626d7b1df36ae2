"""
Test the second-order equivalent-circuit model.

Programmer: cellpyx team
Since:  2024-05
"""

import math

import pytest

import numpy as np

from cellpyx.cells import CellSpec, OcvSurface, ECM_SOC_GRID, ECM_TEMP_GRID
from cellpyx.hysteresis import HysteresisParams
from cellpyx.parameters import EcmParams, reference_ecm_params
from cellpyx.timeseries import TimeSeries
from cellpyx.models.ecm import EcmModel, EcmState, ecm_step, rc_branch_step, simulate_ecm

NUM_OF_RANDOM_INSTANCES=10
SPEC = CellSpec(capacity_Q=100.0, v_min=2.5, v_max=3.65)


def constant_tables(r0:float, r1:float, r2:float, tau1:float, tau2:float, eta_charge:float=1.0) -> EcmParams:
    shape = (len(ECM_SOC_GRID), len(ECM_TEMP_GRID))
    ocv = np.tile((3.0 + 0.5*np.array(ECM_SOC_GRID))[:,None], (1, len(ECM_TEMP_GRID)))
    return EcmParams(
        r0=np.full(shape, r0), r1=np.full(shape, r1), r2=np.full(shape, r2),
        c1=np.full(shape, tau1/r1), c2=np.full(shape, tau2/r2),
        ocv=OcvSurface(ECM_SOC_GRID, ECM_TEMP_GRID, ocv), eta_charge=eta_charge)


def test_two_half_steps_equal_one_step():
    params = constant_tables(1e-3, 5e-4, 8e-4, 15.0, 250.0)
    model = EcmModel(params, SPEC, HysteresisParams.constant(0.004, 0.015, 40.0))
    for i in range(NUM_OF_RANDOM_INSTANCES):
        rng = np.random.default_rng(i)
        state = EcmState(rng.uniform(-0.01, 0.01), rng.uniform(-0.01, 0.01), rng.uniform(0.3, 0.7))
        current = rng.uniform(-150, 150)
        one, v_one = model.step(state, current, 2.0, 25.0)
        half, _ = model.step(state, current, 1.0, 25.0)
        two, v_two = model.step(half, current, 1.0, 25.0)
        assert v_one == pytest.approx(v_two, abs=1e-12)
        assert one.soc == pytest.approx(two.soc, abs=1e-12)


def test_rc_branch_settles_at_r_times_i():
    assert rc_branch_step(0.0, 50.0, 1e6, 2e-3, 1e4) == pytest.approx(0.1, abs=1e-12)
    assert rc_branch_step(0.05, 0.0, 20.0, 1e-3, 2e4) == pytest.approx(0.05*math.exp(-1), rel=1e-12)


def test_step_response_of_constant_tables():
    r0, r1, r2, tau1, tau2 = 1e-3, 5e-4, 8e-4, 15.0, 250.0
    params = constant_tables(r0, r1, r2, tau1, tau2)
    current, duration = 50.0, 100
    result = simulate_ecm(params, SPEC, None, TimeSeries.constant(duration, current, 25.0), 0.5)
    soc = 0.5 - current*duration/(SPEC.capacity_Q*3600)
    expected = (params.ocv(soc, 25.0) - current*r0
                - current*r1*(1 - math.exp(-duration/tau1)) - current*r2*(1 - math.exp(-duration/tau2)))
    assert result.voltage[-1] == pytest.approx(expected, abs=1e-9)


def test_charge_efficiency_only_in_charge():
    params = constant_tables(1e-3, 5e-4, 8e-4, 15.0, 250.0, eta_charge=0.95)
    model = EcmModel(params, SPEC)
    state = model.init_state(0.5, 25.0)
    discharged = model.advance(state, 36.0, 100.0, 25.0)
    charged = model.advance(state, -36.0, 100.0, 25.0)
    assert 0.5 - discharged.soc == pytest.approx(0.01, rel=1e-12)
    assert charged.soc - 0.5 == pytest.approx(0.0095, rel=1e-12)


def test_soc_leaving_range_is_flagged_and_clamped():
    model = EcmModel(reference_ecm_params(), SPEC)
    state = model.init_state(0.001, 25.0)
    state = model.advance(state, 100.0, 100.0, 25.0)
    assert state.soc == 0.0
    assert state.soc_out_of_range
    assert model.output(state, 100.0, 25.0)[-1] is True


def test_rest_voltage_is_ocv():
    params = reference_ecm_params()
    for i in range(NUM_OF_RANDOM_INSTANCES):
        rng = np.random.default_rng(i)
        soc, temp = rng.uniform(0, 1), rng.uniform(-20, 55)
        _, voltage = ecm_step(EcmState(0.0, 0.0, soc), 0.0, 1.0, temp, params)
        assert voltage == pytest.approx(params.ocv(soc, temp), abs=1e-15)


if __name__ == "__main__":
     pytest.main(["-v",__file__])
