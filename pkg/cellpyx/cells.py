"""
Cell-level data shared by every model: ratings of the cell, open-circuit curves,
the OCV surface, segmented-Arrhenius properties and bilinear lookup tables.

Programmer: cellpyx team
Since: 2024-05
"""

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field

import numpy as np

import logging
logger = logging.getLogger(__name__)


GAS_CONSTANT = 8.314           # J/(mol K)
FARADAY = 96485.33212          # C/mol
ZERO_CELSIUS = 273.15          # K

ECM_SOC_GRID = tuple(round(0.1*i, 10) for i in range(11))
ECM_TEMP_GRID = (-20.0, -5.0, 10.0, 25.0, 40.0, 55.0)

ARRHENIUS_REFERENCE_TEMPS_C = (-17.0, -5.0, 10.0, 30.0, 38.0)
ARRHENIUS_RANGE_C = (-20.0, 40.0)


def frozen_array(values, title:str="", name:str="array", ndim:int=None) -> np.ndarray:
    """
    Copy `values` into a read-only float array, rejecting NaN and infinities.

    >>> frozen_array([1, 2]).tolist()
    [1.0, 2.0]
    >>> frozen_array([1, float("nan")], title="demo", name="x")
    Traceback (most recent call last):
    ...
    ValueError: demo: x contains non-finite values.
    """
    array = np.array(values, dtype=float)
    if ndim is not None and array.ndim != ndim:
        raise ValueError(f"{title}: {name} must be {ndim}-dimensional, got shape {array.shape}.")
    if not np.all(np.isfinite(array)):
        raise ValueError(f"{title}: {name} contains non-finite values.")
    array.setflags(write=False)
    return array


def _check_ascending(grid:np.ndarray, title:str, name:str):
    if len(grid) >= 2 and not np.all(np.diff(grid) > 0):
        raise ValueError(f"{title}: {name} must be strictly ascending, got {grid.tolist()}.")


def _bracket(grid, x:float) -> tuple[int,int,float]:
    """
    Locate `x` in an ascending grid, clamping to the hull.
    Returns (lower index, upper index, fraction).

    >>> _bracket([0.0, 1.0, 2.0], 1.5)
    (1, 2, 0.5)
    >>> _bracket([0.0, 1.0, 2.0], -3)
    (0, 1, 0.0)
    >>> _bracket([0.0, 1.0, 2.0], 7)
    (1, 2, 1.0)
    >>> _bracket([5.0], 7)
    (0, 0, 0.0)
    """
    n = len(grid)
    if n == 1:
        return 0, 0, 0.0
    if x <= grid[0]:
        return 0, 1, 0.0
    if x >= grid[n-1]:
        return n-2, n-1, 1.0
    i = bisect_right(grid, x) - 1
    lo, hi = grid[i], grid[i+1]
    return i, i+1, float((x - lo) / (hi - lo))


def interp_table_2d(table, soc:float, temp_c:float, soc_grid=ECM_SOC_GRID, temp_grid=ECM_TEMP_GRID) -> float:
    """
    Bilinear interpolation on a SOC x temperature table.
    Inputs outside the grid are clamped to the hull, so the result always lies
    between the extrema of the surrounding nodes.

    >>> table = np.array([[1.0, 2.0], [3.0, 4.0]])
    >>> interp_table_2d(table, 0.5, 0.5, soc_grid=(0.0, 1.0), temp_grid=(0.0, 1.0))
    2.5
    >>> interp_table_2d(table, 1.0, 0.0, soc_grid=(0.0, 1.0), temp_grid=(0.0, 1.0))
    3.0
    >>> interp_table_2d(table, 9.0, -9.0, soc_grid=(0.0, 1.0), temp_grid=(0.0, 1.0))
    3.0
    >>> round(interp_table_2d(np.full((11, 6), 7.0), 0.33, 12.0), 12)
    7.0
    """
    i0, i1, u = _bracket(soc_grid, soc)
    j0, j1, w = _bracket(temp_grid, temp_c)
    return float(
        (1-u)*(1-w)*table[i0][j0] + u*(1-w)*table[i1][j0]
        + (1-u)*w*table[i0][j1] + u*w*table[i1][j1]
    )


@dataclass(frozen=True)
class CellSpec:
    """
    Ratings of the cell under test.

    >>> cell = CellSpec(capacity_Q=166.0, v_min=2.5, v_max=3.65)
    >>> cell.c_rate_current(0.5)
    83.0
    >>> CellSpec(capacity_Q=166.0, v_min=3.0, v_max=2.0)
    Traceback (most recent call last):
    ...
    ValueError: CellSpec: v_min=3.0 must be below v_max=2.0.
    """
    capacity_Q: float                      # Ah
    v_min: float                           # V
    v_max: float                           # V
    coulombic_efficiency_eta: float = 1.0
    sampling_dt: float = 1.0               # s

    def __post_init__(self):
        if not self.capacity_Q > 0:
            raise ValueError(f"CellSpec: capacity must be positive, got {self.capacity_Q}.")
        if not self.v_min < self.v_max:
            raise ValueError(f"CellSpec: v_min={self.v_min} must be below v_max={self.v_max}.")
        if not 0 < self.coulombic_efficiency_eta <= 1:
            raise ValueError(f"CellSpec: coulombic efficiency must be in (0,1], got {self.coulombic_efficiency_eta}.")
        if not self.sampling_dt > 0:
            raise ValueError(f"CellSpec: sampling period must be positive, got {self.sampling_dt}.")

    def c_rate_current(self, c_rate:float) -> float:
        """ Current (A) corresponding to the given C-rate. """
        return c_rate * self.capacity_Q

    def to_dict(self) -> dict:
        return {
            "capacity_Ah": self.capacity_Q,
            "v_min_V": self.v_min,
            "v_max_V": self.v_max,
            "coulombic_efficiency": self.coulombic_efficiency_eta,
            "sampling_dt_s": self.sampling_dt,
        }

    @staticmethod
    def from_dict(data:dict) -> "CellSpec":
        return CellSpec(
            capacity_Q=float(data["capacity_Ah"]),
            v_min=float(data["v_min_V"]),
            v_max=float(data["v_max_V"]),
            coulombic_efficiency_eta=float(data.get("coulombic_efficiency", 1.0)),
            sampling_dt=float(data.get("sampling_dt_s", 1.0)),
        )


# 166 Ah LFP/graphite cell, 2.5 V to 3.65 V, logged at 1 Hz.
REFERENCE_CELL = CellSpec(capacity_Q=166.0, v_min=2.5, v_max=3.65, coulombic_efficiency_eta=1.0, sampling_dt=1.0)


@dataclass(frozen=True)
class OcpCurve:
    """
    Open-circuit potential of one electrode (V vs Li/Li+) tabulated over stoichiometry.

    >>> curve = OcpCurve([0.0, 0.5, 1.0], [1.0, 0.5, 0.1])
    >>> curve(0.25)
    0.75
    >>> curve(1.2)
    Traceback (most recent call last):
    ...
    ValueError: OcpCurve: stoichiometry 1.2 is outside the tabulated range [0.0, 1.0].
    >>> OcpCurve([0.0, 0.5, 0.4], [1.0, 0.5, 0.1])
    Traceback (most recent call last):
    ...
    ValueError: OcpCurve: stoichiometry grid must be strictly ascending, got [0.0, 0.5, 0.4].
    """
    stoichiometry_grid: np.ndarray
    potential: np.ndarray

    def __post_init__(self):
        grid = frozen_array(self.stoichiometry_grid, "OcpCurve", "stoichiometry grid", ndim=1)
        potential = frozen_array(self.potential, "OcpCurve", "potential", ndim=1)
        if len(grid) < 2 or len(grid) != len(potential):
            raise ValueError(f"OcpCurve: need at least 2 points and equal lengths, got {len(grid)} and {len(potential)}.")
        _check_ascending(grid, "OcpCurve", "stoichiometry grid")
        if grid[0] < 0 or grid[-1] > 1:
            raise ValueError(f"OcpCurve: stoichiometry grid must lie in [0,1], got [{grid[0]}, {grid[-1]}].")
        object.__setattr__(self, "stoichiometry_grid", grid)
        object.__setattr__(self, "potential", potential)

    def __call__(self, theta:float) -> float:
        grid = self.stoichiometry_grid
        if theta < grid[0] or theta > grid[-1]:
            raise ValueError(f"OcpCurve: stoichiometry {theta} is outside the tabulated range [{grid[0]}, {grid[-1]}].")
        return float(np.interp(theta, grid, self.potential))

    @staticmethod
    def from_function(func:callable, num_of_points:int=401) -> "OcpCurve":
        """
        Tabulate an analytic OCP expression on [0,1].

        >>> curve = OcpCurve.from_function(lambda x: 4.0 - x, num_of_points=5)
        >>> curve.stoichiometry_grid.tolist()
        [0.0, 0.25, 0.5, 0.75, 1.0]
        >>> curve(0.5)
        3.5
        """
        grid = np.linspace(0.0, 1.0, num_of_points)
        return OcpCurve(grid, np.array([func(x) for x in grid]))

    def to_dict(self) -> dict:
        return {"stoichiometry": self.stoichiometry_grid.tolist(), "potential_V": self.potential.tolist()}

    @staticmethod
    def from_dict(data:dict) -> "OcpCurve":
        return OcpCurve(data["stoichiometry"], data["potential_V"])


@dataclass(frozen=True)
class OcvSurface:
    """
    Full-cell open-circuit voltage over SOC x temperature.
    Each temperature column must be non-decreasing in SOC;
    use `OcvSurface.projected` to repair measured data first.

    >>> surface = OcvSurface([0.0, 1.0], [25.0], [[3.0], [3.4]])
    >>> round(surface(0.5, 25.0), 12)
    3.2
    >>> round(surface.soc_from_ocv(3.3, 25.0), 12)
    0.75
    >>> OcvSurface([0.0, 1.0], [25.0], [[3.4], [3.0]])
    Traceback (most recent call last):
    ...
    ValueError: OcvSurface: OCV decreases with SOC at temperature 25.0 C.
    """
    soc_grid: np.ndarray
    temp_grid: np.ndarray
    ocv: np.ndarray

    def __post_init__(self):
        soc_grid = frozen_array(self.soc_grid, "OcvSurface", "SOC grid", ndim=1)
        temp_grid = frozen_array(self.temp_grid, "OcvSurface", "temperature grid", ndim=1)
        ocv = frozen_array(self.ocv, "OcvSurface", "OCV table", ndim=2)
        if ocv.shape != (len(soc_grid), len(temp_grid)):
            raise ValueError(f"OcvSurface: OCV table has shape {ocv.shape}, expected {(len(soc_grid), len(temp_grid))}.")
        _check_ascending(soc_grid, "OcvSurface", "SOC grid")
        _check_ascending(temp_grid, "OcvSurface", "temperature grid")
        if soc_grid[0] < 0 or soc_grid[-1] > 1:
            raise ValueError(f"OcvSurface: SOC grid must lie in [0,1].")
        for j,temp in enumerate(temp_grid):
            if np.any(np.diff(ocv[:,j]) < -1e-12):
                raise ValueError(f"OcvSurface: OCV decreases with SOC at temperature {temp} C.")
        object.__setattr__(self, "soc_grid", soc_grid)
        object.__setattr__(self, "temp_grid", temp_grid)
        object.__setattr__(self, "ocv", ocv)
        object.__setattr__(self, "_soc_list", tuple(soc_grid.tolist()))
        object.__setattr__(self, "_temp_list", tuple(temp_grid.tolist()))
        object.__setattr__(self, "_table", ocv.tolist())

    def __call__(self, soc:float, temp_c:float) -> float:
        return interp_table_2d(self._table, soc, temp_c, self._soc_list, self._temp_list)

    def column(self, temp_c:float) -> np.ndarray:
        """ OCV over the SOC grid at the given temperature (linear in temperature, clamped). """
        j0, j1, w = _bracket(self._temp_list, temp_c)
        return (1-w)*self.ocv[:,j0] + w*self.ocv[:,j1]

    def soc_from_ocv(self, voltage:float, temp_c:float) -> float:
        """ Invert the OCV column at the given temperature (clamped to [soc_grid[0], soc_grid[-1]]). """
        return float(np.interp(voltage, self.column(temp_c), self.soc_grid))

    @staticmethod
    def projected(soc_grid, temp_grid, ocv, solvers:list=None) -> "OcvSurface":
        """
        Build a surface from possibly non-monotone data by projecting each
        temperature column onto the non-decreasing sequences (least squares).

        >>> surface = OcvSurface.projected([0.0, 0.5, 1.0], [25.0], [[3.0], [3.3], [3.2]])
        >>> np.round(surface.ocv[:,0], 3).tolist()
        [3.0, 3.25, 3.25]
        """
        from cellpyx.utils.solve import monotone_projection
        ocv = np.array(ocv, dtype=float)
        columns = [monotone_projection(ocv[:,j], solvers=solvers) for j in range(ocv.shape[1])]
        return OcvSurface(soc_grid, temp_grid, np.column_stack(columns))

    def to_dict(self) -> dict:
        return {"soc_grid": self.soc_grid.tolist(), "temp_grid_C": self.temp_grid.tolist(), "ocv_V": self.ocv.tolist()}

    @staticmethod
    def from_dict(data:dict) -> "OcvSurface":
        return OcvSurface(data["soc_grid"], data["temp_grid_C"], data["ocv_V"])


def arrhenius(ref_value:float, activation_energy:float, ref_temp_k:float, temp_k:float) -> float:
    """
    Single-segment Arrhenius scaling.

    >>> arrhenius(2.0, 30000, 298.15, 298.15)
    2.0
    >>> value = arrhenius(1e-14, 30000, 298.15, 308.15)
    >>> bool(np.isclose(value, 1e-14 * np.exp((30000/8.314)*(1/298.15 - 1/308.15)), rtol=1e-15))
    True
    """
    return ref_value * math.exp((activation_energy / GAS_CONSTANT) * (1.0/ref_temp_k - 1.0/temp_k))


@dataclass(frozen=True)
class SegmentedArrhenius:
    """
    A transport or kinetic property with one Arrhenius law per temperature segment.
    The reference temperatures are the segment centres; segment boundaries are
    the midpoints between consecutive references, and a boundary belongs to
    the lower segment. Temperatures are clamped to the operating range first.

    >>> prop = SegmentedArrhenius(ref_values=(1.0, 2.0, 3.0, 4.0, 5.0), activation_energies=(0, 0, 0, 0, 0))
    >>> prop.boundaries_c
    (-11.0, 2.5, 20.0, 34.0)
    >>> [prop(t) for t in (-30, -11, -10.9, 2.5, 20, 34, 34.1, 60)]
    [1.0, 1.0, 2.0, 2.0, 3.0, 4.0, 5.0, 5.0]
    """
    ref_values: tuple
    activation_energies: tuple             # J/mol
    ref_temps_c: tuple = ARRHENIUS_REFERENCE_TEMPS_C
    temp_range_c: tuple = ARRHENIUS_RANGE_C

    def __post_init__(self):
        refs = tuple(float(v) for v in self.ref_values)
        energies = tuple(float(v) for v in self.activation_energies)
        temps = tuple(float(v) for v in self.ref_temps_c)
        if not (len(refs) == len(energies) == len(temps) == len(ARRHENIUS_REFERENCE_TEMPS_C)):
            raise ValueError(f"SegmentedArrhenius: need {len(ARRHENIUS_REFERENCE_TEMPS_C)} segments, got {len(refs)}, {len(energies)}, {len(temps)}.")
        if not all(v > 0 and math.isfinite(v) for v in refs):
            raise ValueError(f"SegmentedArrhenius: reference values must be positive, got {refs}.")
        if not all(math.isfinite(v) for v in energies):
            raise ValueError(f"SegmentedArrhenius: activation energies must be finite, got {energies}.")
        if not all(a < b for a,b in zip(temps, temps[1:])):
            raise ValueError(f"SegmentedArrhenius: reference temperatures must ascend, got {temps}.")
        object.__setattr__(self, "ref_values", refs)
        object.__setattr__(self, "activation_energies", energies)
        object.__setattr__(self, "ref_temps_c", temps)
        object.__setattr__(self, "temp_range_c", tuple(float(v) for v in self.temp_range_c))

    @property
    def boundaries_c(self) -> tuple:
        return tuple((a+b)/2 for a,b in zip(self.ref_temps_c, self.ref_temps_c[1:]))

    @property
    def ref_temps_k(self) -> tuple:
        return tuple(t + ZERO_CELSIUS for t in self.ref_temps_c)

    def segment_index(self, temp_c:float) -> int:
        return bisect_left(self.boundaries_c, temp_c)

    def __call__(self, temp_c:float) -> float:
        return arrhenius_eval(self, temp_c)

    @staticmethod
    def from_reference(value_at_ref:float, ref_temp_c:float, activation_energies:tuple, ref_temps_c:tuple=ARRHENIUS_REFERENCE_TEMPS_C) -> "SegmentedArrhenius":
        """
        Build segment reference values from one known value, scaling to each
        segment's reference temperature with that segment's activation energy.

        >>> prop = SegmentedArrhenius.from_reference(1.0, 30.0, (1e4, 1e4, 1e4, 1e4, 1e4))
        >>> prop(30.0)
        1.0
        >>> prop(10.0) < 1.0 < prop(38.0)
        True
        """
        refs = tuple(
            arrhenius(value_at_ref, energy, ref_temp_c + ZERO_CELSIUS, temp + ZERO_CELSIUS)
            for energy,temp in zip(activation_energies, ref_temps_c))
        return SegmentedArrhenius(ref_values=refs, activation_energies=tuple(activation_energies), ref_temps_c=ref_temps_c)

    def to_dict(self) -> dict:
        return {
            "ref_temps_C": list(self.ref_temps_c),
            "ref_values": list(self.ref_values),
            "activation_energies_J_mol": list(self.activation_energies),
        }

    @staticmethod
    def from_dict(data:dict) -> "SegmentedArrhenius":
        return SegmentedArrhenius(
            ref_values=tuple(data["ref_values"]),
            activation_energies=tuple(data["activation_energies_J_mol"]),
            ref_temps_c=tuple(data.get("ref_temps_C", ARRHENIUS_REFERENCE_TEMPS_C)),
        )


def arrhenius_eval(prop:SegmentedArrhenius, temp_c:float) -> float:
    """
    Evaluate a segmented-Arrhenius property at the given temperature (C).

    >>> prop = SegmentedArrhenius(ref_values=(1e-14,)*5, activation_energies=(30000,)*5)
    >>> [arrhenius_eval(prop, t) == 1e-14 for t in ARRHENIUS_REFERENCE_TEMPS_C]
    [True, True, True, True, True]
    >>> arrhenius_eval(prop, -40) == arrhenius_eval(prop, -20)
    True
    >>> arrhenius_eval(prop, 70) == arrhenius_eval(prop, 40)
    True
    """
    lo, hi = prop.temp_range_c
    temp_c = min(max(temp_c, lo), hi)
    k = prop.segment_index(temp_c)
    return arrhenius(prop.ref_values[k], prop.activation_energies[k], prop.ref_temps_c[k] + ZERO_CELSIUS, temp_c + ZERO_CELSIUS)


if __name__ == "__main__":
    import doctest, sys
    logger.addHandler(logging.StreamHandler(sys.stdout))
    logger.setLevel(logging.INFO)
    print(doctest.testmod())
