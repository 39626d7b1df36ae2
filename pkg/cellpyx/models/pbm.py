"""
The reduced-order physics-based model: one representative particle per
electrode (Pade solid ROM), the two-mode electrolyte, modified Butler-Volmer
kinetics and the shared hysteresis submodel. The terminal voltage is

    V = (U_p - U_n) - (eta_p - eta_n) - I/(2A) (L_p + 2 L_s + L_n)/kappa_eff
        + (2 R T (1 - t+)(1 + beta)/F) (ln c_e(0) - ln c_e(L)) - I R_c + V_h

Kinetics use J_p = I/(a_p A L_p) and J_n = -I/(a_n A L_n); the particles and
the electrolyte see the lithium flux leaving the particle, j_k = -J_k.

Programmer: cellpyx team
Since: 2024-05
"""

import math
from typing import NamedTuple

from cellpyx.cells import CellSpec, GAS_CONSTANT, FARADAY, ZERO_CELSIUS, REFERENCE_CELL
from cellpyx.parameters import PbmParams, soc_from_bulk_concentration
from cellpyx.hysteresis import (
    HysteresisParams, HysteresisState, NEUTRAL_HYSTERESIS, hysteresis_step, hysteresis_voltage,
)
from cellpyx.models.kinetics import effective_diffusivity, exchange_current, kinetic_overpotential, intercalation_current_density
from cellpyx.models.solid_rom import SolidRomState, solid_equilibrium, solid_step
from cellpyx.models.electrolyte import (
    ElectrolyteRomState, UNIFORM_ELECTROLYTE, electrolyte_basis, electrolyte_step,
)
from cellpyx.models.simulation import (
    SolidSaturationError, ElectrolyteDepletionError, SimulationResult, run_simulation,
)
from cellpyx.timeseries import TimeSeries

import logging
logger = logging.getLogger(__name__)


PBM_DIAGNOSTIC_COLUMNS = (
    "voltage_v", "soc",
    "c_surf_p", "c_surf_n", "c_bulk_p", "c_bulk_n", "c_e_0", "c_e_L",
    "ocp_v", "kinetic_v", "eta_p_v", "eta_n_v",
    "electrolyte_ohmic_v", "electrolyte_diffusion_v", "contact_v", "hysteresis_v",
)


class PbmState(NamedTuple):
    solid_p: SolidRomState
    solid_n: SolidRomState
    electrolyte: ElectrolyteRomState
    hysteresis: HysteresisState
    last_voltage: float


class TemperatureProperties(NamedTuple):
    """ The segmented-Arrhenius properties evaluated at one temperature. """
    temp_K: float
    D_s_p: float
    D_s_n: float
    D_e: float
    k0_p: float
    k0_n: float
    kappa_eff: float


def properties_at(params:PbmParams, temp_c:float) -> TemperatureProperties:
    return TemperatureProperties(
        temp_K=temp_c + ZERO_CELSIUS,
        D_s_p=params.D_s_p(temp_c), D_s_n=params.D_s_n(temp_c), D_e=params.D_e(temp_c),
        k0_p=params.k0_p(temp_c), k0_n=params.k0_n(temp_c),
        kappa_eff=params.kappa(temp_c) * params.eps_e**params.bruggeman)


def assemble_voltage(params:PbmParams, hysteresis:HysteresisParams, props:TemperatureProperties,
                     current_I:float, temp_c:float, soc:float,
                     c_surf_p:float, c_surf_n:float, c_e_avg_p:float, c_e_avg_n:float,
                     c_e_0:float, c_e_L:float, hysteresis_state:HysteresisState) -> tuple:
    """
    Terminal voltage and its terms:
    (voltage, ocp, kinetic, eta_p, eta_n, electrolyte ohmic, electrolyte diffusion, contact, hysteresis).
    The voltage is the sum of the terms in exactly this order.
    """
    if min(c_e_0, c_e_L, c_e_avg_p, c_e_avg_n) <= 0:
        raise ElectrolyteDepletionError("electrolyte concentration", min(c_e_0, c_e_L, c_e_avg_p, c_e_avg_n), "electrolyte")
    try:
        ocp = params.ocp_p(c_surf_p / params.c_s_max_p) - params.ocp_n(c_surf_n / params.c_s_max_n)
        J_p = intercalation_current_density(current_I, params.a_p, params.electrode_area_A, params.L_p)
        J_n = -intercalation_current_density(current_I, params.a_n, params.electrode_area_A, params.L_n)
        i0_p = exchange_current(c_surf_p, params.c_s_max_p, c_e_avg_p, props.k0_p)
        i0_n = exchange_current(c_surf_n, params.c_s_max_n, c_e_avg_n, props.k0_n)
    except ValueError as err:
        raise SolidSaturationError("surface stoichiometry", min(c_surf_p/params.c_s_max_p, c_surf_n/params.c_s_max_n), "kinetics") from err
    eta_p = kinetic_overpotential(J_p, i0_p, c_surf_p, params.c_s_max_p, params.theta_c, params.rho, params.alpha, props.temp_K)
    eta_n = kinetic_overpotential(J_n, i0_n, c_surf_n, params.c_s_max_n, params.theta_c, params.rho, params.alpha, props.temp_K)
    kinetic = -(eta_p - eta_n)
    ohmic = -current_I / (2 * params.electrode_area_A) * (params.L_p + 2*params.L_s + params.L_n) / props.kappa_eff
    diffusion = (2 * GAS_CONSTANT * props.temp_K * (1 - params.t0_plus) * (1 + params.beta) / FARADAY) * (math.log(c_e_0) - math.log(c_e_L))
    contact = -current_I * params.R_c
    hyst = hysteresis_voltage(hysteresis_state, soc, temp_c, hysteresis)
    voltage = ocp + kinetic + ohmic + diffusion + contact + hyst
    return (voltage, ocp, kinetic, eta_p, eta_n, ohmic, diffusion, contact, hyst)


class PbmModel:
    """
    A parameterized reduced-order model. Instances hold no simulation state and
    can be shared; the stepping itself is sequential per state.

    >>> from cellpyx.parameters import reference_pbm_params
    >>> model = PbmModel(reference_pbm_params())
    >>> state = model.init_state(0.5, 25.0)
    >>> round(state.last_voltage, 3)
    3.286
    >>> model.init_state(1.2, 25.0)
    Traceback (most recent call last):
    ...
    ValueError: PbmModel: initial SOC must lie in [0,1], got 1.2.
    """
    kind = "pbm"
    diagnostic_columns = PBM_DIAGNOSTIC_COLUMNS
    MAX_CACHED_TEMPERATURES = 4096

    def __init__(self, params:PbmParams, spec:CellSpec=REFERENCE_CELL, hysteresis:HysteresisParams=None, n_per_region:int=400):
        self.params = params
        self.spec = spec
        self.hysteresis = hysteresis if hysteresis is not None else HysteresisParams.zero()
        self.basis = electrolyte_basis(params, n_per_region)
        self._flux_p_per_ampere = intercalation_current_density(1.0, params.a_p, params.electrode_area_A, params.L_p)
        self._flux_n_per_ampere = intercalation_current_density(1.0, params.a_n, params.electrode_area_A, params.L_n)
        self._properties = {}

    def properties(self, temp_c:float) -> TemperatureProperties:
        props = self._properties.get(temp_c)
        if props is None:
            if len(self._properties) >= self.MAX_CACHED_TEMPERATURES:
                self._properties.clear()
            props = self._properties[temp_c] = properties_at(self.params, temp_c)
        return props

    def init_state(self, soc0:float, temp_c:float) -> PbmState:
        if not 0 <= soc0 <= 1:
            raise ValueError(f"PbmModel: initial SOC must lie in [0,1], got {soc0}.")
        params = self.params
        theta_p, theta_n = params.theta_p(soc0), params.theta_n(soc0)
        return PbmState(
            solid_p=solid_equilibrium(theta_p * params.c_s_max_p),
            solid_n=solid_equilibrium(theta_n * params.c_s_max_n),
            electrolyte=UNIFORM_ELECTROLYTE,
            hysteresis=NEUTRAL_HYSTERESIS,
            last_voltage=params.ocp_p(theta_p) - params.ocp_n(theta_n))

    def advance(self, state:PbmState, current_I:float, dt:float, temp_c:float) -> PbmState:
        params, props = self.params, self.properties(temp_c)
        solid_p, solid_n = state.solid_p, state.solid_n
        # leaving fluxes: the positive particle takes lithium in during discharge
        j_p = -current_I * self._flux_p_per_ampere
        j_n = current_I * self._flux_n_per_ampere
        D_p = effective_diffusivity(solid_p.c_surf, solid_p.c_bulk, params.mu_p, props.D_s_p)
        D_n = effective_diffusivity(solid_n.c_surf, solid_n.c_bulk, params.mu_n, props.D_s_n)
        return PbmState(
            solid_p=solid_step(solid_p, j_p, dt, D_p, params.R_p, params.c_s_max_p, "positive electrode"),
            solid_n=solid_step(solid_n, j_n, dt, D_n, params.R_n, params.c_s_max_n, "negative electrode"),
            electrolyte=electrolyte_step(state.electrolyte, current_I, dt, params, temp_c, self.basis, props.D_e),
            # charge efficiency comes from the cell spec here; the ECM identifies its own
            hysteresis=hysteresis_step(state.hysteresis, current_I, self.spec.coulombic_efficiency_eta,
                                       self.hysteresis.gamma, dt, self.spec.capacity_Q),
            last_voltage=state.last_voltage)

    def soc(self, state:PbmState) -> float:
        return soc_from_bulk_concentration(state.solid_n.c_bulk, self.params)

    def output(self, state:PbmState, current_I:float, temp_c:float) -> tuple:
        """ The diagnostic row of PBM_DIAGNOSTIC_COLUMNS for the given state. """
        params = self.params
        c_e_0, c_e_L = self.basis.boundary_values(state.electrolyte, params.c_e0)
        c_e_avg_p, c_e_avg_n = self.basis.electrode_averages(state.electrolyte, params.c_e0)
        soc = self.soc(state)
        c_surf_p, c_surf_n = state.solid_p.c_surf, state.solid_n.c_surf
        voltage, ocp, kinetic, eta_p, eta_n, ohmic, diffusion, contact, hyst = assemble_voltage(
            params, self.hysteresis, self.properties(temp_c), current_I, temp_c, soc,
            c_surf_p, c_surf_n, c_e_avg_p, c_e_avg_n, c_e_0, c_e_L, state.hysteresis)
        return (voltage, soc, c_surf_p, c_surf_n, state.solid_p.c_bulk, state.solid_n.c_bulk, c_e_0, c_e_L,
                ocp, kinetic, eta_p, eta_n, ohmic, diffusion, contact, hyst)

    def step(self, state:PbmState, current_I:float, dt:float, temp_c:float) -> tuple:
        """ Advance one sample and return (state', voltage). """
        new_state = self.advance(state, current_I, dt, temp_c)
        voltage = self.output(new_state, current_I, temp_c)[0]
        return new_state._replace(last_voltage=voltage), voltage


def init_pbm_state(soc0:float, temp_c:float, params:PbmParams, spec:CellSpec=REFERENCE_CELL, hysteresis:HysteresisParams=None) -> PbmState:
    """
    Equilibrium state at the given SOC: uniform particles, uniform electrolyte, neutral hysteresis.

    >>> from cellpyx.parameters import reference_pbm_params
    >>> params = reference_pbm_params()
    >>> state = init_pbm_state(1.0, 25.0, params)
    >>> state.solid_n.c_bulk == params.theta_n_100pct * params.c_s_max_n
    True
    """
    return PbmModel(params, spec, hysteresis).init_state(soc0, temp_c)


def pbm_step(state:PbmState, current_I:float, dt:float, temp_c:float, model:PbmModel) -> tuple:
    """ One sample step of the given model: returns (state', voltage). """
    return model.step(state, current_I, dt, temp_c)


def simulate_pbm(params:PbmParams, spec:CellSpec, profile:TimeSeries, soc0:float,
                 hysteresis:HysteresisParams=None, dataset_id:str=None, model:PbmModel=None) -> SimulationResult:
    """
    Simulate the profile; one voltage sample per input sample, with per-step
    diagnostics. Model-validity errors end the run and keep the partial output.

    >>> from cellpyx.parameters import reference_pbm_params
    >>> params = reference_pbm_params()
    >>> rest = TimeSeries.constant(5, 0.0, 25.0)
    >>> result = simulate_pbm(params, REFERENCE_CELL, rest, 0.5)
    >>> result.completed, len(result.diagnostics)
    (True, 6)
    >>> bool(abs(result.voltage - params.open_circuit_voltage(0.5)).max() < 1e-9)
    True
    """
    model = model or PbmModel(params, spec, hysteresis)
    return run_simulation(model, profile, soc0, kind="pbm", dataset_id=dataset_id)


if __name__ == "__main__":
    import doctest, sys
    logger.addHandler(logging.StreamHandler(sys.stdout))
    logger.setLevel(logging.INFO)
    print(doctest.testmod())
