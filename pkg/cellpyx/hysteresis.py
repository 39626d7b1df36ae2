"""
The one-state hysteresis submodel shared by the physics-based and the
equivalent-circuit models:

    V_h[k]   = M0 * s[k] + M(soc, T) * h[k]
    s[k+1]   = -sgn(i[k])          if i[k] != 0, else s[k]
    h[k+1]   = e * h[k] - (1 - e) * sgn(i[k]),   e = exp(-|eta * i * gamma * dt / (3600 Q)|)

Positive current is discharge, so a discharge drives h and s towards -1.

Programmer: cellpyx team
Since: 2024-05
"""

import math
from dataclasses import dataclass

import numpy as np

from cellpyx.cells import ECM_SOC_GRID, ECM_TEMP_GRID, frozen_array, interp_table_2d, _bracket

import logging
logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class HysteresisParams:
    """
    >>> params = HysteresisParams.constant(m0=0.005, m=0.020, gamma=60.0)
    >>> params.m0_at(10.0), params.m_at(0.5, 10.0)
    (0.005, 0.02)
    >>> HysteresisParams.constant(m0=0.005, m=0.020, gamma=0.0)
    Traceback (most recent call last):
    ...
    ValueError: HysteresisParams: gamma must be positive, got 0.0.
    """
    m0: np.ndarray                 # V, one per temperature grid point
    m_map: np.ndarray              # V, SOC x temperature
    gamma: float
    soc_grid: tuple = ECM_SOC_GRID
    temp_grid: tuple = ECM_TEMP_GRID

    def __post_init__(self):
        soc_grid = tuple(float(x) for x in self.soc_grid)
        temp_grid = tuple(float(x) for x in self.temp_grid)
        m0 = frozen_array(self.m0, "HysteresisParams", "M0", ndim=1)
        m_map = frozen_array(self.m_map, "HysteresisParams", "M map", ndim=2)
        if m0.shape != (len(temp_grid),):
            raise ValueError(f"HysteresisParams: M0 has shape {m0.shape}, expected ({len(temp_grid)},).")
        if m_map.shape != (len(soc_grid), len(temp_grid)):
            raise ValueError(f"HysteresisParams: M map has shape {m_map.shape}, expected {(len(soc_grid), len(temp_grid))}.")
        if np.any(m0 < 0) or np.any(m_map < 0):
            raise ValueError("HysteresisParams: M0 and the M map must be non-negative.")
        if not (math.isfinite(self.gamma) and self.gamma > 0):
            raise ValueError(f"HysteresisParams: gamma must be positive, got {self.gamma}.")
        object.__setattr__(self, "soc_grid", soc_grid)
        object.__setattr__(self, "temp_grid", temp_grid)
        object.__setattr__(self, "m0", m0)
        object.__setattr__(self, "m_map", m_map)
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "_m0_list", m0.tolist())
        object.__setattr__(self, "_m_rows", m_map.tolist())

    def m0_at(self, temp_c:float) -> float:
        """ M0 interpolated linearly in temperature, clamped to the grid. """
        j0, j1, w = _bracket(self.temp_grid, temp_c)
        return (1-w)*self._m0_list[j0] + w*self._m0_list[j1]

    def m_at(self, soc:float, temp_c:float) -> float:
        return interp_table_2d(self._m_rows, soc, temp_c, self.soc_grid, self.temp_grid)

    @staticmethod
    def constant(m0:float, m:float, gamma:float, soc_grid=ECM_SOC_GRID, temp_grid=ECM_TEMP_GRID) -> "HysteresisParams":
        return HysteresisParams(
            m0=np.full(len(temp_grid), m0),
            m_map=np.full((len(soc_grid), len(temp_grid)), m),
            gamma=gamma, soc_grid=soc_grid, temp_grid=temp_grid)

    @staticmethod
    def zero(soc_grid=ECM_SOC_GRID, temp_grid=ECM_TEMP_GRID) -> "HysteresisParams":
        """ No hysteresis at all (gamma is irrelevant and set to 1). """
        return HysteresisParams.constant(0.0, 0.0, 1.0, soc_grid, temp_grid)

    def to_dict(self) -> dict:
        return {
            "soc_grid": list(self.soc_grid),
            "temp_grid_C": list(self.temp_grid),
            "M0_V": self.m0.tolist(),
            "M_map_V": self.m_map.tolist(),
            "gamma": self.gamma,
        }

    @staticmethod
    def from_dict(data:dict) -> "HysteresisParams":
        return HysteresisParams(
            m0=data["M0_V"], m_map=data["M_map_V"], gamma=float(data["gamma"]),
            soc_grid=tuple(data.get("soc_grid", ECM_SOC_GRID)),
            temp_grid=tuple(data.get("temp_grid_C", ECM_TEMP_GRID)))


def reference_hysteresis_params(soc_grid=ECM_SOC_GRID, temp_grid=ECM_TEMP_GRID) -> HysteresisParams:
    """ Hysteresis of the synthetic reference cell: wider at low SOC and in the cold. """
    m0 = np.array([0.008 - 0.004*(temp - temp_grid[0])/(temp_grid[-1] - temp_grid[0]) for temp in temp_grid])
    m_map = np.array([
        [(0.012 + 0.010*(1 - soc)) * (1 + 0.02*max(0.0, 25.0 - temp)) for temp in temp_grid]
        for soc in soc_grid])
    return HysteresisParams(m0=m0, m_map=m_map, gamma=60.0, soc_grid=soc_grid, temp_grid=temp_grid)


@dataclass(frozen=True)
class HysteresisState:
    """
    >>> HysteresisState()
    HysteresisState(h=0.0, s=0)
    >>> HysteresisState(h=1.5, s=0)
    Traceback (most recent call last):
    ...
    ValueError: HysteresisState: h must lie in [-1, 1], got 1.5.
    """
    h: float = 0.0
    s: int = 0

    def __post_init__(self):
        if not -1.0 <= self.h <= 1.0:
            raise ValueError(f"HysteresisState: h must lie in [-1, 1], got {self.h}.")
        if self.s not in (-1, 0, 1):
            raise ValueError(f"HysteresisState: s must be -1, 0 or +1, got {self.s}.")


NEUTRAL_HYSTERESIS = HysteresisState(0.0, 0)


def _sign(x:float) -> int:
    return int(x > 0) - int(x < 0)


def update_sign(state:HysteresisState, current_i:float) -> HysteresisState:
    """
    The instantaneous sign state follows the current direction and holds at rest.

    >>> update_sign(HysteresisState(0.0, +1), 0.0).s
    1
    >>> update_sign(HysteresisState(0.0, -1), -50.0).s
    1
    >>> update_sign(HysteresisState(0.0, 0), 83.0).s
    -1
    """
    if current_i == 0:
        return state
    return HysteresisState(state.h, -_sign(current_i))


def decay_factor(current_i:float, eta:float, gamma:float, dt:float, capacity_ah:float) -> float:
    """
    >>> decay_factor(0.0, 1.0, 60.0, 1.0, 166.0)
    1.0
    >>> round(decay_factor(166.0, 1.0, 3600*math.log(2), 1.0, 166.0), 12)
    0.5
    """
    return math.exp(-abs(eta * current_i * gamma * dt / (capacity_ah * 3600)))


def update_h(state:HysteresisState, current_i:float, eta:float, gamma:float, dt:float, capacity_ah:float) -> HysteresisState:
    """
    Advance the dynamic hysteresis state over one step of constant current.

    >>> update_h(HysteresisState(0.3, 0), 0.0, 1.0, 60.0, 1.0, 166.0).h
    0.3
    >>> update_h(HysteresisState(-1.0, -1), 83.0, 1.0, 60.0, 1.0, 166.0).h
    -1.0
    >>> round(update_h(HysteresisState(0.0, 0), 166.0, 1.0, 3600*math.log(2), 1.0, 166.0).h, 12)
    -0.5
    >>> update_h(HysteresisState(0.0, 0), 1.0, 1.0, 60.0, 0.0, 166.0)
    Traceback (most recent call last):
    ...
    ValueError: update_h: dt and capacity must be positive, got dt=0.0, capacity=166.0.
    """
    if not (dt > 0 and capacity_ah > 0):
        raise ValueError(f"update_h: dt and capacity must be positive, got dt={dt}, capacity={capacity_ah}.")
    if current_i == 0:
        return state
    e = decay_factor(current_i, eta, gamma, dt, capacity_ah)
    sign = _sign(current_i)
    h = -sign + e*(state.h + sign)
    return HysteresisState(min(max(h, -1.0), 1.0), state.s)


def hysteresis_step(state:HysteresisState, current_i:float, eta:float, gamma:float, dt:float, capacity_ah:float) -> HysteresisState:
    """ Both updates of one sample step. """
    return update_sign(update_h(state, current_i, eta, gamma, dt, capacity_ah), current_i)


def hysteresis_voltage(state:HysteresisState, soc:float, temp_c:float, params:HysteresisParams) -> float:
    """
    >>> params = HysteresisParams.constant(m0=0.005, m=0.020, gamma=60.0)
    >>> hysteresis_voltage(HysteresisState(0.0, 0), 0.5, 25.0, params)
    0.0
    >>> round(hysteresis_voltage(HysteresisState(-1.0, -1), 0.5, 25.0, params), 12)
    -0.025
    >>> round(hysteresis_voltage(HysteresisState(0.5, 1), 0.5, 25.0, params), 12)
    0.015
    """
    return params.m0_at(temp_c)*state.s + params.m_at(soc, temp_c)*state.h


if __name__ == "__main__":
    import doctest, sys
    logger.addHandler(logging.StreamHandler(sys.stdout))
    logger.setLevel(logging.INFO)
    print(doctest.testmod())
