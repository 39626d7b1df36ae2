"""
High-resolution finite-volume reference solvers for the diffusion equations
that the reduced-order model approximates. Used in tests to measure the
model-order-reduction error.

Both solvers use backward Euler in time and conservative finite volumes in
space, so the stored lithium changes exactly by the applied flux:

    solid:       dc/dt = (1/r^2) d/dr( D r^2 dc/dr ),      -D dc/dr (R) = j/F,  dc/dr (0) = 0
    electrolyte: eps dc/dt = d/dx( D_e eps^b dc/dx ) + s(x) I,  dc/dx = 0 at x = 0, L

The full-cell oracle composes them with the same kinetics and voltage
assembly as the reduced-order model.

Programmer: cellpyx team
Since: 2024-05
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.linalg import solve_banded

from cellpyx.cells import CellSpec, FARADAY, REFERENCE_CELL
from cellpyx.parameters import PbmParams, soc_from_bulk_concentration
from cellpyx.hysteresis import HysteresisParams, HysteresisState, NEUTRAL_HYSTERESIS, hysteresis_step
from cellpyx.models.kinetics import effective_diffusivity, intercalation_current_density
from cellpyx.models.electrolyte import source_per_ampere
from cellpyx.models.pbm import PBM_DIAGNOSTIC_COLUMNS, TemperatureProperties, properties_at, assemble_voltage
from cellpyx.models.simulation import (
    SolidSaturationError, ElectrolyteDepletionError, SimulationResult, run_simulation,
)
from cellpyx.timeseries import TimeSeries

import logging
logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FdmGridConfig:
    """
    >>> FdmGridConfig(radial_nodes=5)
    Traceback (most recent call last):
    ...
    ValueError: FdmGridConfig: need at least 10 radial nodes, got 5.
    """
    radial_nodes: int = 100
    nodes_per_region: int = 50
    substep_s: float = 1.0

    def __post_init__(self):
        if self.radial_nodes < 10:
            raise ValueError(f"FdmGridConfig: need at least 10 radial nodes, got {self.radial_nodes}.")
        if self.nodes_per_region < 10:
            raise ValueError(f"FdmGridConfig: need at least 10 nodes per region, got {self.nodes_per_region}.")
        if not self.substep_s > 0:
            raise ValueError(f"FdmGridConfig: substep must be positive, got {self.substep_s}.")

    def check_sampling(self, time:np.ndarray):
        smallest = float(np.min(np.diff(time)))
        if self.substep_s > smallest + 1e-12:
            raise ValueError(f"FdmGridConfig: substep {self.substep_s} s exceeds the sampling interval {smallest} s.")

    def substeps(self, dt:float) -> int:
        return max(1, math.ceil(dt / self.substep_s - 1e-9))


def _tridiagonal_step(capacity:np.ndarray, conductance:np.ndarray, rhs:np.ndarray, dt:float) -> np.ndarray:
    """ Solve (diag(capacity) + dt K) x = rhs, K the graph Laplacian of the face conductances. """
    diagonal = capacity.copy()
    diagonal[:-1] += dt*conductance
    diagonal[1:] += dt*conductance
    banded = np.zeros((3, len(capacity)))
    banded[0,1:] = -dt*conductance
    banded[1] = diagonal
    banded[2,:-1] = -dt*conductance
    return solve_banded((1, 1), banded, rhs)


class SphereGrid:
    """
    Equal-width shells of a sphere. Volumes and areas are divided by 4 pi.

    >>> grid = SphereGrid(1.0, 10)
    >>> round(float(grid.volumes.sum()), 12)
    0.333333333333
    """

    def __init__(self, radius:float, n:int):
        faces = np.linspace(0.0, radius, n + 1)
        self.radius = radius
        self.dr = radius / n
        self.volumes = (faces[1:]**3 - faces[:-1]**3) / 3
        self.inner_areas = faces[1:-1]**2
        self.total_volume = radius**3 / 3

    def step(self, c:np.ndarray, u:float, dt:float, diffusivity:float) -> np.ndarray:
        """ One backward-Euler step with the leaving molar flux u (mol/(m2 s)) at the surface. """
        rhs = self.volumes * c
        rhs[-1] -= dt * self.radius**2 * u
        return _tridiagonal_step(self.volumes, diffusivity*self.inner_areas/self.dr, rhs, dt)

    def surface(self, c:np.ndarray, u:float, diffusivity:float) -> float:
        """ Extrapolated to r = R with the boundary gradient -u/D. """
        return float(c[-1] - u*self.dr/(2*diffusivity))

    def bulk(self, c:np.ndarray) -> float:
        return float(self.volumes @ c / self.total_volume)


def _particle_diffusivity(grid:SphereGrid, c:np.ndarray, u:float, D_ref:float, mu:float) -> float:
    """ The concentration-dependent diffusivity, lagged to the start of the step. """
    return effective_diffusivity(grid.surface(c, u, D_ref), grid.bulk(c), mu, D_ref)


class SolidTrajectory(NamedTuple):
    time: np.ndarray
    c_surf: np.ndarray
    c_bulk: np.ndarray


def fdm_solid(time, flux_J, D_s, radius:float, c0:float, c_s_max:float=math.inf, mu:float=0.0,
              config:FdmGridConfig=FdmGridConfig()) -> SolidTrajectory:
    """
    Solve spherical diffusion for a sampled leaving flux (A/m2). Sample k's
    flux is held over (t[k-1], t[k]]. D_s is the diffusivity, made
    concentration dependent through mu as in the reduced model.

    >>> t = np.arange(0.0, 11.0)
    >>> rest = fdm_solid(t, np.zeros_like(t), 1e-14, 5e-6, 15000.0)
    >>> bool(np.allclose(rest.c_surf, 15000.0, rtol=1e-12))
    True
    """
    time = np.asarray(time, dtype=float)
    flux_J = np.asarray(flux_J, dtype=float)
    config.check_sampling(time)
    grid = SphereGrid(radius, config.radial_nodes)
    c = np.full(config.radial_nodes, float(c0))
    c_surf, c_bulk = [float(c0)], [float(c0)]
    for k in range(1, len(time)):
        u = flux_J[k] / FARADAY
        n_sub = config.substeps(time[k] - time[k-1])
        dt = (time[k] - time[k-1]) / n_sub
        for _ in range(n_sub):
            c = grid.step(c, u, dt, _particle_diffusivity(grid, c, u, D_s, mu))
        surface = grid.surface(c, u, _particle_diffusivity(grid, c, u, D_s, mu))
        if not 0 < surface < c_s_max:
            raise SolidSaturationError("surface concentration", surface, f"particle at sample {k}")
        if not (np.min(c) > 0 and np.max(c) < c_s_max):
            raise SolidSaturationError("concentration", float(np.min(c) if np.min(c) <= 0 else np.max(c)), f"particle at sample {k}")
        c_surf.append(surface)
        c_bulk.append(grid.bulk(c))
    return SolidTrajectory(time, np.array(c_surf), np.array(c_bulk))


class ElectrolyteGrid:
    """ Equal-width cells in each of the three regions (x = 0 at the positive collector). """

    def __init__(self, params:PbmParams, n_per_region:int):
        L_p, L_s, L_n = params.L_p, params.L_s, params.L_n
        faces = np.concatenate([
            np.linspace(0.0, L_p, n_per_region + 1),
            np.linspace(L_p, L_p + L_s, n_per_region + 1)[1:],
            np.linspace(L_p + L_s, L_p + L_s + L_n, n_per_region + 1)[1:],
        ])
        self.widths = np.diff(faces)
        self.centers = (faces[1:] + faces[:-1]) / 2
        self.region = np.repeat([0, 1, 2], n_per_region)
        self.eps_e = params.eps_e
        self.bruggeman = params.bruggeman
        self.capacity = params.eps_e * self.widths
        self.source = source_per_ampere(self.region, params) * self.widths
        self.distances = np.diff(self.centers)

    def step(self, c:np.ndarray, current_I:float, dt:float, D_e:float) -> np.ndarray:
        conductance = D_e * self.eps_e**self.bruggeman / self.distances
        rhs = self.capacity*c + dt*self.source*current_I
        return _tridiagonal_step(self.capacity, conductance, rhs, dt)

    def boundary_values(self, c:np.ndarray) -> tuple:
        """ Values at x = 0 and x = L, extrapolated with zero slope at the wall. """
        return float(c[0] - (c[1] - c[0])/8), float(c[-1] - (c[-2] - c[-1])/8)

    def electrode_averages(self, c:np.ndarray) -> tuple:
        positive, negative = self.region == 0, self.region == 2
        return (float(self.widths[positive] @ c[positive] / self.widths[positive].sum()),
                float(self.widths[negative] @ c[negative] / self.widths[negative].sum()))

    def total_salt(self, c:np.ndarray) -> float:
        return float(self.capacity @ c)


class ElectrolyteTrajectory(NamedTuple):
    time: np.ndarray
    x: np.ndarray
    c: np.ndarray          # samples x cells
    c_0: np.ndarray
    c_L: np.ndarray
    total_salt: np.ndarray


def fdm_electrolyte(profile:TimeSeries, params:PbmParams, config:FdmGridConfig=FdmGridConfig()) -> ElectrolyteTrajectory:
    """
    Solve electrolyte diffusion for a current profile, starting uniform at c_e0.

    >>> from cellpyx.parameters import reference_pbm_params
    >>> trajectory = fdm_electrolyte(TimeSeries.constant(5, 0.0, 25.0), reference_pbm_params())
    >>> bool(np.allclose(trajectory.c, 1200.0, rtol=1e-12))
    True
    """
    config.check_sampling(profile.time)
    grid = ElectrolyteGrid(params, config.nodes_per_region)
    c = np.full(len(grid.centers), float(params.c_e0))
    rows = [c]
    time, current, temperature = profile.time, profile.current, profile.temperature
    for k in range(1, len(time)):
        n_sub = config.substeps(time[k] - time[k-1])
        dt = (time[k] - time[k-1]) / n_sub
        D_e = params.D_e(float(temperature[k]))
        for _ in range(n_sub):
            c = grid.step(c, float(current[k]), dt, D_e)
        if np.min(c) <= 0:
            raise ElectrolyteDepletionError("electrolyte concentration", float(np.min(c)), f"electrolyte at sample {k}")
        rows.append(c)
    c_all = np.array(rows)
    boundary = np.array([grid.boundary_values(row) for row in c_all])
    return ElectrolyteTrajectory(
        time=profile.time, x=grid.centers, c=c_all, c_0=boundary[:,0], c_L=boundary[:,1],
        total_salt=c_all @ grid.capacity)


class FdmState(NamedTuple):
    c_p: np.ndarray
    c_n: np.ndarray
    c_e: np.ndarray
    hysteresis: HysteresisState
    u_p: float           # leaving molar flux of the last step, for the surface extrapolation
    u_n: float


class FdmCellModel:
    """
    The full cell without model-order reduction: finite-volume particles and
    electrolyte, with the kinetics and voltage terms of the reduced model.
    Follows the model interface of the simulation driver.

    >>> from cellpyx.parameters import reference_pbm_params
    >>> params = reference_pbm_params()
    >>> model = FdmCellModel(params)
    >>> state = model.init_state(0.5, 25.0)
    >>> bool(abs(model.output(state, 0.0, 25.0)[0] - params.open_circuit_voltage(0.5)) < 1e-9)
    True
    """
    kind = "fdm"
    diagnostic_columns = PBM_DIAGNOSTIC_COLUMNS

    def __init__(self, params:PbmParams, spec:CellSpec=REFERENCE_CELL, hysteresis:HysteresisParams=None,
                 config:FdmGridConfig=FdmGridConfig()):
        self.params = params
        self.spec = spec
        self.hysteresis = hysteresis if hysteresis is not None else HysteresisParams.zero()
        self.config = config
        self.sphere_p = SphereGrid(params.R_p, config.radial_nodes)
        self.sphere_n = SphereGrid(params.R_n, config.radial_nodes)
        self.electrolyte = ElectrolyteGrid(params, config.nodes_per_region)
        self._u_p_per_ampere = -intercalation_current_density(1.0, params.a_p, params.electrode_area_A, params.L_p) / FARADAY
        self._u_n_per_ampere = intercalation_current_density(1.0, params.a_n, params.electrode_area_A, params.L_n) / FARADAY
        self._properties = {}

    def properties(self, temp_c:float) -> TemperatureProperties:
        props = self._properties.get(temp_c)
        if props is None:
            props = self._properties[temp_c] = properties_at(self.params, temp_c)
        return props

    def init_state(self, soc0:float, temp_c:float) -> FdmState:
        if not 0 <= soc0 <= 1:
            raise ValueError(f"FdmCellModel: initial SOC must lie in [0,1], got {soc0}.")
        params, n = self.params, self.config.radial_nodes
        return FdmState(
            c_p=np.full(n, params.theta_p(soc0) * params.c_s_max_p),
            c_n=np.full(n, params.theta_n(soc0) * params.c_s_max_n),
            c_e=np.full(len(self.electrolyte.centers), float(params.c_e0)),
            hysteresis=NEUTRAL_HYSTERESIS, u_p=0.0, u_n=0.0)

    def _surfaces(self, state:FdmState, props:TemperatureProperties) -> tuple:
        D_p = _particle_diffusivity(self.sphere_p, state.c_p, state.u_p, props.D_s_p, self.params.mu_p)
        D_n = _particle_diffusivity(self.sphere_n, state.c_n, state.u_n, props.D_s_n, self.params.mu_n)
        return self.sphere_p.surface(state.c_p, state.u_p, D_p), self.sphere_n.surface(state.c_n, state.u_n, D_n), D_p, D_n

    def advance(self, state:FdmState, current_I:float, dt:float, temp_c:float) -> FdmState:
        props = self.properties(temp_c)
        u_p, u_n = current_I*self._u_p_per_ampere, current_I*self._u_n_per_ampere
        n_sub = self.config.substeps(dt)
        h = dt / n_sub
        c_p, c_n, c_e = state.c_p, state.c_n, state.c_e
        for _ in range(n_sub):
            _, _, D_p, D_n = self._surfaces(FdmState(c_p, c_n, c_e, state.hysteresis, u_p, u_n), props)
            c_p = self.sphere_p.step(c_p, u_p, h, D_p)
            c_n = self.sphere_n.step(c_n, u_n, h, D_n)
            c_e = self.electrolyte.step(c_e, current_I, h, props.D_e)
        new_state = FdmState(c_p, c_n, c_e, hysteresis_step(
            state.hysteresis, current_I, self.spec.coulombic_efficiency_eta, self.hysteresis.gamma, dt, self.spec.capacity_Q),
            u_p, u_n)
        c_surf_p, c_surf_n, _, _ = self._surfaces(new_state, props)
        for where,surface,c,c_max in (("positive electrode", c_surf_p, c_p, self.params.c_s_max_p),
                                      ("negative electrode", c_surf_n, c_n, self.params.c_s_max_n)):
            if not 0 < surface < c_max:
                raise SolidSaturationError("surface concentration", surface, where)
            if not (np.min(c) > 0 and np.max(c) < c_max):
                raise SolidSaturationError("concentration", float(np.min(c) if np.min(c) <= 0 else np.max(c)), where)
        if np.min(c_e) <= 0:
            raise ElectrolyteDepletionError("electrolyte concentration", float(np.min(c_e)), "electrolyte")
        return new_state

    def soc(self, state:FdmState) -> float:
        return soc_from_bulk_concentration(self.sphere_n.bulk(state.c_n), self.params)

    def output(self, state:FdmState, current_I:float, temp_c:float) -> tuple:
        params, props = self.params, self.properties(temp_c)
        c_surf_p, c_surf_n, _, _ = self._surfaces(state, props)
        c_e_0, c_e_L = self.electrolyte.boundary_values(state.c_e)
        c_e_avg_p, c_e_avg_n = self.electrolyte.electrode_averages(state.c_e)
        soc = self.soc(state)
        voltage, ocp, kinetic, eta_p, eta_n, ohmic, diffusion, contact, hyst = assemble_voltage(
            params, self.hysteresis, props, current_I, temp_c, soc,
            c_surf_p, c_surf_n, c_e_avg_p, c_e_avg_n, c_e_0, c_e_L, state.hysteresis)
        return (voltage, soc, c_surf_p, c_surf_n, self.sphere_p.bulk(state.c_p), self.sphere_n.bulk(state.c_n),
                c_e_0, c_e_L, ocp, kinetic, eta_p, eta_n, ohmic, diffusion, contact, hyst)


def fdm_full_cell(profile:TimeSeries, params:PbmParams, soc0:float, spec:CellSpec=REFERENCE_CELL,
                  hysteresis:HysteresisParams=None, config:FdmGridConfig=FdmGridConfig(),
                  dataset_id:str=None) -> SimulationResult:
    """ The reference voltage trajectory of a profile. """
    config.check_sampling(profile.time)
    model = FdmCellModel(params, spec, hysteresis, config)
    return run_simulation(model, profile, soc0, kind="fdm", dataset_id=dataset_id)


if __name__ == "__main__":
    import doctest, sys
    logger.addHandler(logging.StreamHandler(sys.stdout))
    logger.setLevel(logging.INFO)
    print(doctest.testmod())
