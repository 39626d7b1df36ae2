"""
Test the reduced-order solid diffusion model.

Programmer: cellpyx team
Since:  2024-05
"""

import pytest

import numpy as np

from cellpyx.cells import FARADAY
from cellpyx.models.solid_rom import (
    SolidRomState, PADE_POLES, PADE_RESIDUES, pade_transfer_remainder, solid_equilibrium,
    solid_step, steady_surface_offset,
)
from cellpyx.models.simulation import SolidSaturationError

NUM_OF_RANDOM_INSTANCES=10
RADIUS = 5e-6
DIFFUSIVITY = 1e-14


def test_modes_decay():
    assert all(pole < 0 for pole in PADE_POLES)
    # the remainder is 693/3465 = 0.2 at zero frequency
    assert pade_transfer_remainder(0.0) == pytest.approx(0.2, rel=1e-12)


def test_zero_flux_keeps_equilibrium():
    for i in range(NUM_OF_RANDOM_INSTANCES):
        rng = np.random.default_rng(i)
        state = solid_equilibrium(rng.uniform(1000, 30000))
        for _ in range(10):
            state_next = solid_step(state, 0.0, rng.uniform(0.1, 100), DIFFUSIVITY, RADIUS)
            assert state_next == state


def test_bulk_mass_balance_is_exact():
    for i in range(NUM_OF_RANDOM_INSTANCES):
        rng = np.random.default_rng(i)
        state = solid_equilibrium(15000.0)
        fluxes = rng.uniform(-0.5, 0.5, 50)
        for flux in fluxes:
            state = solid_step(state, flux, 1.0, DIFFUSIVITY, RADIUS)
        expected = 15000.0 - 3*fluxes.sum()/(FARADAY*RADIUS)
        assert state.c_bulk == pytest.approx(expected, rel=1e-12)


def test_two_half_steps_equal_one_step():
    for i in range(NUM_OF_RANDOM_INSTANCES):
        rng = np.random.default_rng(i)
        state = SolidRomState(15000.0, rng.uniform(-5, 5), rng.uniform(-5, 5))
        flux, dt = rng.uniform(-1, 1), rng.uniform(0.5, 20)
        one = solid_step(state, flux, dt, DIFFUSIVITY, RADIUS)
        two = solid_step(solid_step(state, flux, dt/2, DIFFUSIVITY, RADIUS), flux, dt/2, DIFFUSIVITY, RADIUS)
        assert np.allclose(one, two, rtol=1e-12, atol=1e-9)


def test_surface_offset_settles_under_constant_flux():
    flux = 0.01
    state = solid_equilibrium(15000.0)
    state = solid_step(state, flux, 1e5, DIFFUSIVITY, RADIUS)
    offset = state.c_surf - state.c_bulk
    assert offset == pytest.approx(steady_surface_offset(flux, RADIUS, DIFFUSIVITY), rel=1e-9)
    assert offset < 0


def test_surface_moves_faster_than_bulk():
    state = solid_step(solid_equilibrium(15000.0), 1.0, 5.0, DIFFUSIVITY, RADIUS)
    assert state.c_surf < state.c_bulk < 15000.0
    state = solid_step(solid_equilibrium(15000.0), -1.0, 5.0, DIFFUSIVITY, RADIUS)
    assert state.c_surf > state.c_bulk > 15000.0


def test_residues_reproduce_the_remainder():
    for s in (0.5, 3.0, 40.0):
        expected = (18*s + 693) / (s*s + 189*s + 3465)
        assert sum(r/(s - lam) for r,lam in zip(PADE_RESIDUES, PADE_POLES)) == pytest.approx(expected, rel=1e-12)


def test_saturation_is_reported():
    with pytest.raises(SolidSaturationError, match="positive electrode"):
        solid_step(solid_equilibrium(22000.0), -50.0, 10.0, DIFFUSIVITY, RADIUS, c_s_max=22800.0, where="positive electrode")
    with pytest.raises(ValueError, match="must be positive"):
        solid_step(solid_equilibrium(15000.0), 1.0, 0.0, DIFFUSIVITY, RADIUS)


if __name__ == "__main__":
     pytest.main(["-v",__file__])
