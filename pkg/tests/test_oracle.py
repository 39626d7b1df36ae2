"""
Test the finite-volume reference solvers and measure the reduced model against them.

Programmer: cellpyx team
Since:  2024-05
"""

import pytest

import numpy as np

from cellpyx.cells import FARADAY, REFERENCE_CELL
from cellpyx.parameters import reference_pbm_params
from cellpyx.timeseries import TimeSeries
from cellpyx.models.solid_rom import solid_equilibrium, solid_step, steady_surface_offset
from cellpyx.models.electrolyte import electrolyte_basis, steady_state
from cellpyx.models.pbm import simulate_pbm
from cellpyx.models.simulation import SolidSaturationError
from cellpyx.oracle import FdmGridConfig, fdm_solid, fdm_electrolyte, fdm_full_cell

NUM_OF_RANDOM_INSTANCES=10
RADIUS = 5e-6
DIFFUSIVITY = 3e-14
C0 = 20000.0


def rom_trajectory(time, flux) -> tuple:
    state, surface, bulk = solid_equilibrium(C0), [C0], [C0]
    for k in range(1, len(time)):
        state = solid_step(state, flux[k], time[k] - time[k-1], DIFFUSIVITY, RADIUS)
        surface.append(state.c_surf)
        bulk.append(state.c_bulk)
    return np.array(surface), np.array(bulk)


def test_zero_flux_stays_uniform():
    t = np.arange(0.0, 101.0)
    trajectory = fdm_solid(t, np.zeros_like(t), DIFFUSIVITY, RADIUS, C0)
    assert np.allclose(trajectory.c_surf, C0, rtol=1e-12)
    assert np.allclose(trajectory.c_bulk, C0, rtol=1e-12)


def test_bulk_follows_the_applied_flux():
    for i in range(NUM_OF_RANDOM_INSTANCES):
        rng = np.random.default_rng(i)
        t = np.arange(0.0, 201.0)
        flux = rng.uniform(-0.2, 0.2, len(t))
        trajectory = fdm_solid(t, flux, DIFFUSIVITY, RADIUS, C0)
        expected = C0 - 3*np.concatenate(([0.0], np.cumsum(flux[1:])))/(FARADAY*RADIUS)
        assert np.allclose(trajectory.c_bulk, expected, rtol=1e-9)


def test_grid_refinement_changes_little():
    t = np.arange(0.0, 601.0)
    flux = np.full(len(t), 0.1)
    coarse = fdm_solid(t, flux, DIFFUSIVITY, RADIUS, C0, config=FdmGridConfig(radial_nodes=100))
    fine = fdm_solid(t, flux, DIFFUSIVITY, RADIUS, C0, config=FdmGridConfig(radial_nodes=400))
    offset_coarse = coarse.c_surf - coarse.c_bulk
    offset_fine = fine.c_surf - fine.c_bulk
    assert abs(offset_coarse[-1] - offset_fine[-1]) < 0.01*abs(offset_fine[-1])
    assert np.allclose(coarse.c_surf, fine.c_surf, rtol=1e-3)


def test_rom_surface_matches_the_reference():
    t = np.arange(0.0, 3001.0)
    flux = np.full(len(t), 0.1)
    flux[0] = 0.0
    reference = fdm_solid(t, flux, DIFFUSIVITY, RADIUS, C0)
    surface, bulk = rom_trajectory(t, flux)
    assert surface[5] == pytest.approx(reference.c_surf[5], rel=0.01)
    assert np.allclose(bulk, reference.c_bulk, rtol=1e-9)
    steady = abs(steady_surface_offset(0.1, RADIUS, DIFFUSIVITY))
    for k in (300, 1000, 3000):
        rom_offset = surface[k] - bulk[k]
        reference_offset = reference.c_surf[k] - reference.c_bulk[k]
        assert abs(rom_offset - reference_offset) < 0.02*steady


def test_solid_saturation_is_reported():
    t = np.arange(0.0, 11.0)
    with pytest.raises(SolidSaturationError, match="particle at sample"):
        fdm_solid(t, np.full(len(t), -50.0), DIFFUSIVITY, RADIUS, 22000.0, c_s_max=22800.0)


def test_sampling_finer_than_substep_is_rejected():
    with pytest.raises(ValueError, match="exceeds the sampling interval"):
        fdm_solid([0.0, 0.5, 1.0], [0.0, 0.0, 0.0], DIFFUSIVITY, RADIUS, C0)


#### Electrolyte


PARAMS = reference_pbm_params()


def test_electrolyte_conserves_salt():
    for i in range(NUM_OF_RANDOM_INSTANCES):
        rng = np.random.default_rng(i)
        profile = TimeSeries(time=np.arange(0.0, 101.0), current=rng.uniform(-300, 300, 101), temperature=np.full(101, 25.0))
        trajectory = fdm_electrolyte(profile, PARAMS)
        assert np.allclose(trajectory.total_salt, trajectory.total_salt[0], rtol=1e-10)


def test_electrolyte_reaches_the_rom_steady_state():
    current = REFERENCE_CELL.c_rate_current(1.0)
    profile = TimeSeries.constant(3000, current, 25.0, dt=10.0)
    trajectory = fdm_electrolyte(profile, PARAMS)
    basis = electrolyte_basis(PARAMS)
    c_0, c_L = basis.boundary_values(steady_state(current, PARAMS.D_e(25.0), basis), PARAMS.c_e0)
    assert trajectory.c_0[-1] < PARAMS.c_e0 < trajectory.c_L[-1]
    assert trajectory.c_0[-1] == pytest.approx(c_0, abs=0.01*(PARAMS.c_e0 - c_0))
    assert trajectory.c_L[-1] == pytest.approx(c_L, abs=0.01*(c_L - PARAMS.c_e0))


#### Full cell


@pytest.mark.parametrize("c_rate, duration, tolerance", [(0.25, 3600, 2e-3), (1.0, 1800, 5e-3)])
def test_reduced_model_tracks_the_full_cell(c_rate, duration, tolerance):
    profile = TimeSeries.constant(duration, REFERENCE_CELL.c_rate_current(c_rate), 25.0)
    reference = fdm_full_cell(profile, PARAMS, 0.9)
    reduced = simulate_pbm(PARAMS, REFERENCE_CELL, profile, 0.9)
    assert reference.completed and reduced.completed
    rmse = float(np.sqrt(np.mean((reference.voltage - reduced.voltage)**2)))
    assert rmse <= tolerance
    assert np.allclose(reference.diagnostics["soc"], reduced.diagnostics["soc"], atol=1e-6)


if __name__ == "__main__":
     pytest.main(["-v",__file__])
