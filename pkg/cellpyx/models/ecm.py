"""
The second-order RC equivalent-circuit model with coulomb counting and the
shared hysteresis submodel:

    V1[k+1]  = exp(-dt/(R1 C1)) V1[k] + R1 (1 - exp(-dt/(R1 C1))) I[k]
    V2[k+1]  = exp(-dt/(R2 C2)) V2[k] + R2 (1 - exp(-dt/(R2 C2))) I[k]
    SOC[k+1] = SOC[k] - eta dt I[k] / (3600 Q)
    V[k]     = V_OCV(SOC[k]) - I[k] R0 - V1[k] - V2[k] + V_h[k]

R, C are looked up at the SOC and temperature at the start of each step.
The efficiency is 1 in discharge and the identified charge efficiency in charge.

Programmer: cellpyx team
Since: 2024-05
"""

import math
from typing import NamedTuple

from cellpyx.cells import CellSpec, REFERENCE_CELL, interp_table_2d
from cellpyx.parameters import EcmParams
from cellpyx.hysteresis import (
    HysteresisParams, HysteresisState, NEUTRAL_HYSTERESIS, hysteresis_step, hysteresis_voltage,
)
from cellpyx.models.simulation import SimulationResult, run_simulation
from cellpyx.timeseries import TimeSeries

import logging
logger = logging.getLogger(__name__)

SOC_TOLERANCE = 1e-9

ECM_DIAGNOSTIC_COLUMNS = (
    "voltage_v", "soc", "ocv_v", "r0_drop_v", "v1_v", "v2_v", "hysteresis_v", "soc_out_of_range",
)


class EcmState(NamedTuple):
    v1: float
    v2: float
    soc: float
    hysteresis: HysteresisState = NEUTRAL_HYSTERESIS
    soc_out_of_range: bool = False


def rc_branch_step(v:float, current_I:float, dt:float, r:float, c:float) -> float:
    """
    Exact discretization of one RC branch under a constant current.

    >>> round(rc_branch_step(1.0, 0.0, 2.0, 1.0, 2.0), 12) == round(math.exp(-1), 12)
    True
    >>> round(rc_branch_step(0.0, 10.0, 1e6, 0.002, 1000.0), 12)
    0.02
    >>> one = rc_branch_step(0.01, 50.0, 2.0, 1e-3, 2e4)
    >>> two = rc_branch_step(rc_branch_step(0.01, 50.0, 1.0, 1e-3, 2e4), 50.0, 1.0, 1e-3, 2e4)
    >>> abs(one - two) <= 1e-12 * abs(one)
    True
    """
    decay = math.exp(-dt / (r * c))
    return decay*v + r*(1 - decay)*current_I


class EcmModel:
    """
    A parameterized equivalent-circuit model.

    >>> from cellpyx.parameters import reference_ecm_params
    >>> model = EcmModel(reference_ecm_params())
    >>> state = model.init_state(0.5, 25.0)
    >>> model.output(state, 0.0, 25.0)[0] == model.params.ocv(0.5, 25.0)
    True
    """
    kind = "ecm"
    diagnostic_columns = ECM_DIAGNOSTIC_COLUMNS

    def __init__(self, params:EcmParams, spec:CellSpec=REFERENCE_CELL, hysteresis:HysteresisParams=None):
        self.params = params
        self.spec = spec
        self.hysteresis = hysteresis if hysteresis is not None else HysteresisParams.zero()
        self._soc_grid, self._temp_grid = params.soc_grid, params.temp_grid
        self._r0, self._r1, self._r2 = params.rows("r0"), params.rows("r1"), params.rows("r2")
        self._c1, self._c2 = params.rows("c1"), params.rows("c2")

    def lookup(self, rows:list, soc:float, temp_c:float) -> float:
        return interp_table_2d(rows, soc, temp_c, self._soc_grid, self._temp_grid)

    def efficiency(self, current_I:float) -> float:
        return self.params.eta_charge if current_I < 0 else 1.0

    def init_state(self, soc0:float, temp_c:float) -> EcmState:
        if not 0 <= soc0 <= 1:
            raise ValueError(f"EcmModel: initial SOC must lie in [0,1], got {soc0}.")
        return EcmState(0.0, 0.0, float(soc0), NEUTRAL_HYSTERESIS, False)

    def advance(self, state:EcmState, current_I:float, dt:float, temp_c:float) -> EcmState:
        if not dt > 0:
            raise ValueError(f"EcmModel: dt must be positive, got {dt}.")
        soc = state.soc
        r1, c1 = self.lookup(self._r1, soc, temp_c), self.lookup(self._c1, soc, temp_c)
        r2, c2 = self.lookup(self._r2, soc, temp_c), self.lookup(self._c2, soc, temp_c)
        eta = self.efficiency(current_I)
        capacity = self.spec.capacity_Q
        new_soc = soc - eta*dt*current_I/(capacity*3600)
        out_of_range = state.soc_out_of_range
        if new_soc < -SOC_TOLERANCE or new_soc > 1 + SOC_TOLERANCE:
            if not out_of_range:
                logger.debug("SOC left [0,1]: %g", new_soc)
            out_of_range = True
        return EcmState(
            v1=rc_branch_step(state.v1, current_I, dt, r1, c1),
            v2=rc_branch_step(state.v2, current_I, dt, r2, c2),
            soc=min(max(new_soc, 0.0), 1.0),
            hysteresis=hysteresis_step(state.hysteresis, current_I, eta, self.hysteresis.gamma, dt, capacity),
            soc_out_of_range=out_of_range)

    def soc(self, state:EcmState) -> float:
        return state.soc

    def output(self, state:EcmState, current_I:float, temp_c:float) -> tuple:
        ocv = self.params.ocv(state.soc, temp_c)
        r0_drop = current_I * self.lookup(self._r0, state.soc, temp_c)
        hyst = hysteresis_voltage(state.hysteresis, state.soc, temp_c, self.hysteresis)
        voltage = ocv - r0_drop - state.v1 - state.v2 + hyst
        return (voltage, state.soc, ocv, r0_drop, state.v1, state.v2, hyst, state.soc_out_of_range)

    def step(self, state:EcmState, current_I:float, dt:float, temp_c:float) -> tuple:
        """ Advance one sample and return (state', voltage). """
        new_state = self.advance(state, current_I, dt, temp_c)
        return new_state, self.output(new_state, current_I, temp_c)[0]


def ecm_step(state:EcmState, current_I:float, dt:float, temp_c:float, params:EcmParams,
             hysteresis:HysteresisParams=None, spec:CellSpec=REFERENCE_CELL) -> tuple:
    """
    One sample step: returns (state', voltage).

    >>> from cellpyx.parameters import reference_ecm_params
    >>> params = reference_ecm_params()
    >>> state, voltage = ecm_step(EcmState(0.0, 0.0, 0.5), 0.0, 1.0, 25.0, params)
    >>> voltage == params.ocv(0.5, 25.0)
    True
    """
    return EcmModel(params, spec, hysteresis).step(state, current_I, dt, temp_c)


def simulate_ecm(params:EcmParams, spec:CellSpec, hysteresis:HysteresisParams, profile:TimeSeries, soc0:float,
                 dataset_id:str=None, model:EcmModel=None) -> SimulationResult:
    """
    >>> from cellpyx.parameters import reference_ecm_params
    >>> params = reference_ecm_params()
    >>> result = simulate_ecm(params, REFERENCE_CELL, None, TimeSeries.constant(5, 0.0, 25.0), 0.3)
    >>> bool(all(result.voltage == params.ocv(0.3, 25.0)))
    True
    """
    model = model or EcmModel(params, spec, hysteresis)
    return run_simulation(model, profile, soc0, kind="ecm", dataset_id=dataset_id)


if __name__ == "__main__":
    import doctest, sys
    logger.addHandler(logging.StreamHandler(sys.stdout))
    logger.setLevel(logging.INFO)
    print(doctest.testmod())
