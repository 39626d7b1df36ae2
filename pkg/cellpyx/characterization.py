"""
Characterization of the open-circuit voltage and its hysteresis from pulse tests.

Each rest after a pulse is fitted with the power law

    V(t) = k1 * t^k2 + k3,        t measured from the start of the rest,

and extrapolated to 8 hours to estimate the equilibrium voltage. Rests that
follow a charge pulse give the upper (charge-side) OCV, rests after a
discharge pulse the lower one. Half their gap and their mean, per SOC node and
temperature, form the hysteresis map. The hysteresis submodel parameters are
then fitted by PSO so that its predicted rest voltages match the extrapolated ones.

Programmer: cellpyx team
Since: 2024-05
"""

import math
import pathlib
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import pandas as pd
from scipy.optimize import least_squares

from cellpyx.cells import CellSpec, OcvSurface, ECM_SOC_GRID, ECM_TEMP_GRID, interp_table_2d
from cellpyx.hysteresis import HysteresisParams, HysteresisState, NEUTRAL_HYSTERESIS, decay_factor
from cellpyx.identify.search_space import SearchSpace
from cellpyx.identify.pso import PsoConfig, IdentificationResult, run_pso
from cellpyx.timeseries import TimeSeries, Dataset

import logging
logger = logging.getLogger(__name__)

EXTRAPOLATION_TIME_S = 8 * 3600
BLANKING_S = 10.0
MIN_REST_S = 1800.0
ZERO_CURRENT_A = 1e-3
EXPONENT_BOUNDS = (-2.0, -0.05)
NUM_OF_STARTS = 20
FLAT_TOLERANCE_V = 1e-12
SIDES = ("charge", "discharge")


class RelaxationFitError(RuntimeError):
    """ The power-law fit did not converge. """

    def __init__(self, message:str, best_residual:float):
        super().__init__(f"{message} (best RMS residual {best_residual:.3g} V)")
        self.best_residual = best_residual


@dataclass(frozen=True)
class RelaxationFit:
    k1: float
    k2: float
    k3: float
    rms_residual: float           # V
    best_start_residual: float    # V, best of the linear multi-start fits
    n_points: int

    def predict(self, t_s) -> np.ndarray:
        return self.k1 * np.power(t_s, self.k2) + self.k3

    @property
    def v_at_8h(self) -> float:
        return float(self.k1 * EXTRAPOLATION_TIME_S**self.k2 + self.k3)


class RestSegment(NamedTuple):
    start: int          # first zero-current sample
    stop: int           # one past the last zero-current sample
    side: str           # "charge" or "discharge": the direction of the preceding current
    onset_time: float   # s, time of the last loaded sample


def find_rest_segments(series:TimeSeries, min_duration_s:float=MIN_REST_S, zero_current_a:float=ZERO_CURRENT_A) -> list:
    """
    Zero-current runs that follow a pulse and last at least min_duration_s.
    A rest at the very start of the series has no preceding pulse and is skipped.

    >>> series = TimeSeries.concatenate([TimeSeries.constant(5, 0.0, 25.0), TimeSeries.constant(3, 10.0, 25.0),
    ...                                  TimeSeries.constant(4, 0.0, 25.0), TimeSeries.constant(2, -10.0, 25.0),
    ...                                  TimeSeries.constant(1, 0.0, 25.0)])
    >>> find_rest_segments(series, min_duration_s=2)
    [RestSegment(start=9, stop=13, side='discharge', onset_time=8.0)]
    >>> [segment.side for segment in find_rest_segments(series, min_duration_s=0)]
    ['discharge', 'charge']
    """
    at_rest = np.abs(series.current) <= zero_current_a
    edges = np.diff(at_rest.astype(int))
    starts = np.flatnonzero(edges == 1) + 1
    stops = np.flatnonzero(edges == -1) + 1
    if at_rest[-1]:
        stops = np.append(stops, len(series))
    segments = []
    for start in starts:
        stop = int(stops[np.searchsorted(stops, start, side="right")])
        onset = float(series.time[start - 1])
        if series.time[stop - 1] - onset < min_duration_s:
            continue
        side = "discharge" if series.current[start - 1] > 0 else "charge"
        segments.append(RestSegment(int(start), stop, side, onset))
    return segments


def _linear_fit(t:np.ndarray, v:np.ndarray, k2:float) -> tuple:
    basis = np.column_stack([np.power(t, k2), np.ones_like(t)])
    (k1, k3), *_ = np.linalg.lstsq(basis, v, rcond=None)
    residual = v - (k1*basis[:,0] + k3)
    return float(k1), float(k3), float(np.sqrt(np.mean(residual**2)))


def fit_relaxation(segment:TimeSeries, onset_time:float=None, blanking_s:float=BLANKING_S,
                   min_duration_s:float=MIN_REST_S, zero_current_a:float=ZERO_CURRENT_A,
                   max_evaluations:int=1000) -> RelaxationFit:
    """
    Fit V(t) = k1 t^k2 + k3 to a rest segment, skipping the first blanking_s
    seconds after the onset. The exponent is first scanned on a grid with
    (k1, k3) solved linearly, then all three are refined by bounded nonlinear
    least squares from the best grid point.

    >>> t = np.arange(0.0, 9001.0)
    >>> segment = TimeSeries(time=t, current=np.zeros_like(t), temperature=np.full_like(t, 25.0), voltage=3.30 - 0.05*np.power(np.maximum(t, 1.0), -0.5))
    >>> fit = fit_relaxation(segment)
    >>> round(fit.k3, 6), round(fit.k2, 4)
    (3.3, -0.5)
    >>> flat = fit_relaxation(segment.with_voltage(np.full_like(t, 3.25)))
    >>> flat.k1, flat.v_at_8h
    (0.0, 3.25)
    """
    title = segment.title
    if segment.voltage is None:
        raise ValueError(f"{title}: a rest segment needs a measured voltage.")
    if np.any(np.abs(segment.current) > zero_current_a):
        raise ValueError(f"{title}: the segment is not a rest (current up to {np.max(np.abs(segment.current)):g} A).")
    onset = float(segment.time[0]) if onset_time is None else float(onset_time)
    t = segment.time - onset
    if t[-1] < min_duration_s:
        raise ValueError(f"{title}: the rest lasts {t[-1]:g} s, need at least {min_duration_s:g} s.")
    used = t >= max(blanking_s, np.finfo(float).tiny)
    t, v = t[used], segment.voltage[used]

    if np.ptp(v) <= FLAT_TOLERANCE_V:
        k3 = float(np.mean(v))
        residual = float(np.sqrt(np.mean((v - k3)**2)))
        return RelaxationFit(0.0, -0.5, k3, residual, residual, len(t))

    starts = [(k2,) + _linear_fit(t, v, k2) for k2 in np.linspace(*EXPONENT_BOUNDS, NUM_OF_STARTS)]
    k2_0, k1_0, k3_0, best_start = min(starts, key=lambda start: start[3])

    residual_fn = lambda x: x[0]*np.power(t, x[1]) + x[2] - v
    refined = least_squares(
        residual_fn, x0=[k1_0, k2_0, k3_0],
        bounds=([-np.inf, EXPONENT_BOUNDS[0], -np.inf], [np.inf, EXPONENT_BOUNDS[1], np.inf]),
        x_scale="jac", ftol=1e-12, xtol=1e-12, gtol=1e-12, max_nfev=max_evaluations)
    if not refined.success:
        raise RelaxationFitError(f"{title}: relaxation fit did not converge: {refined.message}", best_start)
    k1, k2, k3 = (float(x) for x in refined.x)
    rms = float(np.sqrt(np.mean(refined.fun**2)))
    if rms > best_start:
        k1, k2, k3, rms = k1_0, float(k2_0), k3_0, best_start
    logger.debug("%s: relaxation fit k1=%g k2=%g k3=%g, residual %g V", title, k1, k2, k3, rms)
    return RelaxationFit(k1, k2, k3, rms, best_start, len(t))


#### SOC bookkeeping


def coulomb_count(series:TimeSeries, soc0:float, capacity_ah:float, eta_charge:float=1.0) -> np.ndarray:
    """
    SOC at every sample; charge throughput is scaled by the coulombic efficiency.

    >>> series = TimeSeries(time=[0, 1800, 3600], current=[0, 83.0, -83.0], temperature=[25]*3)
    >>> coulomb_count(series, 1.0, 166.0).tolist()
    [1.0, 0.75, 1.0]
    """
    increments = series.current[1:] * np.diff(series.time) / 3600
    increments = np.where(series.current[1:] < 0, eta_charge*increments, increments)
    return soc0 - np.concatenate(([0.0], np.cumsum(increments))) / capacity_ah


class RestPoint(NamedTuple):
    dataset_id: str
    segment: RestSegment
    soc: float
    temp_c: float
    voltage: float      # extrapolated equilibrium voltage


def rest_points(test:Dataset, spec:CellSpec, min_rest_s:float=MIN_REST_S, blanking_s:float=BLANKING_S,
                eta_charge:float=None) -> list:
    """
    The extrapolated rest voltages of one pulse test. Failed fits are logged and skipped.
    Charge is counted with eta_charge, which defaults to the cell's coulombic efficiency.
    """
    if test.initial_soc is None:
        raise ValueError(f"{test.id}: a pulse test needs its initial SOC.")
    series = test.series
    eta = spec.coulombic_efficiency_eta if eta_charge is None else eta_charge
    socs = coulomb_count(series, test.initial_soc, spec.capacity_Q, eta)
    points = []
    for segment in find_rest_segments(series, min_rest_s):
        part = series.slice(segment.start, segment.stop)
        try:
            fit = fit_relaxation(part, onset_time=segment.onset_time, blanking_s=blanking_s, min_duration_s=min_rest_s)
        except RelaxationFitError as err:
            logger.warning("%s: rest at sample %d skipped: %s", test.id, segment.start, err)
            continue
        points.append(RestPoint(test.id, segment, float(socs[segment.start]), float(test.ambient_temp), fit.v_at_8h))
    logger.info("%s: %d rest voltages extrapolated", test.id, len(points))
    return points


#### Hysteresis map


@dataclass(frozen=True)
class HysteresisMap:
    """
    Charge-side and discharge-side equilibrium voltages per SOC node and
    temperature. Missing nodes (NaN) are filled along SOC from the nodes that
    were measured, and listed in `missing`.

    >>> hmap = HysteresisMap([0.0, 0.5, 1.0], [25.0], [[3.22], [3.32], [np.nan]], [[3.20], [3.30], [3.40]])
    >>> [round(x, 6) for x in hmap.half_gap[:,0]]
    [0.01, 0.01, 0.0]
    >>> hmap.missing
    [(1.0, 25.0, 'charge')]
    """
    soc_grid: tuple
    temp_grid: tuple
    charge_ocv: np.ndarray
    discharge_ocv: np.ndarray
    missing: list = field(default=None, init=False)

    def __post_init__(self):
        soc_grid = tuple(float(x) for x in self.soc_grid)
        temp_grid = tuple(float(x) for x in self.temp_grid)
        shape = (len(soc_grid), len(temp_grid))
        missing = []
        tables = {}
        for side,raw in zip(SIDES, (self.charge_ocv, self.discharge_ocv)):
            table = np.array(raw, dtype=float)
            if table.shape != shape:
                raise ValueError(f"HysteresisMap: {side} table has shape {table.shape}, expected {shape}.")
            for j,temp in enumerate(temp_grid):
                known = ~np.isnan(table[:,j])
                if not known.any():
                    raise ValueError(f"HysteresisMap: no {side}-side rest at {temp:g} C.")
                for i in np.flatnonzero(~known):
                    missing.append((soc_grid[i], temp, side))
                table[:,j] = np.interp(soc_grid, np.array(soc_grid)[known], table[known,j])
            table.flags.writeable = False
            tables[side] = table
        missing.sort()
        gap = (tables["charge"] - tables["discharge"]) / 2
        if np.any(gap < 0):
            logger.warning("HysteresisMap: %d nodes have a charge OCV below the discharge OCV; their gap is set to 0",
                           int(np.sum(gap < 0)))
        half_gap = np.maximum(gap, 0.0)
        mean_ocv = (tables["charge"] + tables["discharge"]) / 2
        for array in (half_gap, mean_ocv):
            array.flags.writeable = False
        object.__setattr__(self, "soc_grid", soc_grid)
        object.__setattr__(self, "temp_grid", temp_grid)
        object.__setattr__(self, "charge_ocv", tables["charge"])
        object.__setattr__(self, "discharge_ocv", tables["discharge"])
        object.__setattr__(self, "missing", missing)
        object.__setattr__(self, "half_gap", half_gap)
        object.__setattr__(self, "mean_ocv", mean_ocv)
        object.__setattr__(self, "_half_gap_rows", half_gap.tolist())
        object.__setattr__(self, "_mean_rows", mean_ocv.tolist())

    def half_gap_at(self, soc:float, temp_c:float) -> float:
        return interp_table_2d(self._half_gap_rows, soc, temp_c, self.soc_grid, self.temp_grid)

    def mean_ocv_at(self, soc:float, temp_c:float) -> float:
        return interp_table_2d(self._mean_rows, soc, temp_c, self.soc_grid, self.temp_grid)

    def ocv_surface(self, solvers:list=None) -> OcvSurface:
        """ The mean OCV as a surface, made non-decreasing in SOC by least-squares projection. """
        return OcvSurface.projected(self.soc_grid, self.temp_grid, self.mean_ocv, solvers)

    def half_gap_table(self, soc_grid=ECM_SOC_GRID, temp_grid=ECM_TEMP_GRID) -> np.ndarray:
        return np.array([[self.half_gap_at(soc, temp) for temp in temp_grid] for soc in soc_grid])

    def m_table(self, m0, scale:float=1.0, soc_grid=ECM_SOC_GRID, temp_grid=ECM_TEMP_GRID) -> np.ndarray:
        """
        The dynamic hysteresis magnitude M on a grid: the scaled half gap minus
        the instantaneous part M0 (one value per temperature of temp_grid), floored at 0.
        """
        return np.maximum(scale*self.half_gap_table(soc_grid, temp_grid) - np.asarray(m0)[None,:], 0.0)

    def to_frame(self) -> pd.DataFrame:
        missing = set(self.missing)
        rows = [
            {"soc": soc, "temp_c": temp,
             "half_gap_v": self.half_gap[i,j], "mean_ocv_v": self.mean_ocv[i,j],
             "charge_ocv_v": self.charge_ocv[i,j], "discharge_ocv_v": self.discharge_ocv[i,j],
             "charge_missing": (soc, temp, "charge") in missing,
             "discharge_missing": (soc, temp, "discharge") in missing}
            for j,temp in enumerate(self.temp_grid) for i,soc in enumerate(self.soc_grid)
        ]
        return pd.DataFrame(rows)

    def to_csv(self, path):
        path = pathlib.Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format="%.9g")


def _nearest_node(grid:tuple, soc:float, tolerance:float):
    i = int(np.argmin([abs(soc - node) for node in grid]))
    return i if abs(soc - grid[i]) <= tolerance else None


def build_hysteresis_map(pulse_tests:list, spec:CellSpec, soc_grid=ECM_SOC_GRID, soc_tolerance:float=0.02,
                         min_rest_s:float=MIN_REST_S, blanking_s:float=BLANKING_S) -> HysteresisMap:
    """
    Extrapolate every rest of every pulse test, assign it to the nearest SOC
    node of its test temperature, and average per node and side.
    """
    if not pulse_tests:
        raise ValueError("build_hysteresis_map: no pulse tests given.")
    temp_grid = tuple(sorted({float(test.ambient_temp) for test in pulse_tests}))
    samples = {}
    for test in pulse_tests:
        for point in rest_points(test, spec, min_rest_s, blanking_s):
            i = _nearest_node(soc_grid, point.soc, soc_tolerance)
            if i is None:
                logger.debug("%s: rest at SOC %.3f is not near a node", test.id, point.soc)
                continue
            key = (i, temp_grid.index(point.temp_c), point.segment.side)
            samples.setdefault(key, []).append(point.voltage)
    shape = (len(soc_grid), len(temp_grid))
    tables = {side: np.full(shape, np.nan) for side in SIDES}
    for (i, j, side),values in samples.items():
        # fsum keeps the node average independent of the order of the rests
        tables[side][i,j] = math.fsum(values) / len(values)
    hmap = HysteresisMap(soc_grid, temp_grid, tables["charge"], tables["discharge"])
    for soc, temp, side in hmap.missing:
        logger.warning("No %s-side rest at SOC %.2f and %g C; the node is filled from its neighbours", side, soc, temp)
    return hmap


#### Fitting the hysteresis submodel


@dataclass
class PlettFit:
    params: HysteresisParams
    m_scale: float
    m0_fitted: dict            # temperature -> M0
    rmse: float                # V, over the rest points
    n_points: int
    gamma_identifiable: bool
    identification: IdentificationResult


class _RestPredictor:
    """
    Rest voltages predicted from the hysteresis states at each rest onset.
    Runs of constant current are applied in one step, since the h update of a
    constant current composes exactly. Calling the predictor with a vector
    (gamma, M scale, M0 per temperature) gives the RMSE, so it can serve as a
    cost function in a process pool.
    """

    def __init__(self, tests:list, spec:CellSpec, hmap:HysteresisMap, min_rest_s:float, blanking_s:float,
                 initial_state:HysteresisState, eta_charge:float=None):
        self.capacity = spec.capacity_Q
        self.eta_charge = spec.coulombic_efficiency_eta if eta_charge is None else eta_charge
        self.initial_state = initial_state
        self.tests = []
        for test in tests:
            points = rest_points(test, spec, min_rest_s, blanking_s, self.eta_charge)
            if not points:
                continue
            current = test.series.current[1:]
            durations = np.diff(test.series.time)
            change = np.flatnonzero(np.diff(current) != 0) + 1
            bounds = np.concatenate(([0], change, [len(current)]))
            runs = [(float(current[a]), float(durations[a:b].sum())) for a,b in zip(bounds[:-1], bounds[1:])]
            # run r covers samples bounds[r]+1 .. bounds[r+1]
            last_sample = bounds[1:]
            marks = [int(np.searchsorted(last_sample, point.segment.start - 1, side="right")) for point in points]
            self.tests.append((runs, marks, points))
        self.points = [point for _,_,points in self.tests for point in points]
        self.targets = np.array([point.voltage for point in self.points])
        self.mean = np.array([hmap.mean_ocv_at(point.soc, point.temp_c) for point in self.points])
        self.gap = np.array([hmap.half_gap_at(point.soc, point.temp_c) for point in self.points])
        self.temp_index = np.array([hmap.temp_grid.index(point.temp_c) for point in self.points])

    def states(self, gamma:float) -> tuple:
        """ h and s at the onset of every rest point. """
        capacity, eta = self.capacity, self.eta_charge
        h_values, s_values = [], []
        for runs, marks, _ in self.tests:
            h, s = self.initial_state.h, self.initial_state.s
            at_mark = {}
            for r,(current, duration) in enumerate(runs):
                if current != 0:
                    sign = 1 if current > 0 else -1
                    e = decay_factor(current, eta if current < 0 else 1.0, gamma, duration, capacity)
                    h, s = -sign + e*(h + sign), -sign
                at_mark[r + 1] = (h, s)
            for mark in marks:
                h, s = at_mark.get(mark, (self.initial_state.h, self.initial_state.s))
                h_values.append(h)
                s_values.append(s)
        return np.array(h_values), np.array(s_values)

    def predict(self, gamma:float, m_scale:float, m0_per_temp) -> np.ndarray:
        h, s = self.states(gamma)
        m0 = np.asarray(m0_per_temp)[self.temp_index]
        m = np.maximum(m_scale*self.gap - m0, 0.0)
        return self.mean + m0*s + m*h

    def rmse(self, gamma:float, m_scale:float, m0_per_temp) -> float:
        errors = self.predict(gamma, m_scale, m0_per_temp) - self.targets
        return float(np.sqrt(np.mean(errors**2)))

    def __call__(self, vector) -> float:
        return self.rmse(vector[0], vector[1], vector[2:])


GAMMA_BOUNDS = (1.0, 1000.0)
M_SCALE_BOUNDS = (0.0, 3.0)
IDENTIFIABILITY_THRESHOLD_V = 1e-5


def fit_plett(pulse_tests:list, hmap:HysteresisMap, spec:CellSpec, config:PsoConfig=None,
              min_rest_s:float=MIN_REST_S, blanking_s:float=BLANKING_S,
              initial_state:HysteresisState=NEUTRAL_HYSTERESIS,
              soc_grid=ECM_SOC_GRID, temp_grid=ECM_TEMP_GRID, eta_charge:float=None) -> PlettFit:
    """
    Fit gamma, a scale of the map's half gap and M0 per test temperature so
    that the predicted rest voltages match the extrapolated ones. The dynamic
    magnitude is M = max(scale * half_gap - M0, 0), so that M0 + M recovers
    the measured half gap once the dynamic state saturates.

    eta_charge scales charging current in both the coulomb count and the h
    update. It defaults to the cell's coulombic efficiency, which the PBM uses;
    pass the identified ECM eta_charge when fitting for an ECM.
    """
    config = config or PsoConfig(n_particles=40, max_iterations=150, random_seed=0)
    predictor = _RestPredictor(pulse_tests, spec, hmap, min_rest_s, blanking_s, initial_state, eta_charge)
    if len(predictor.points) == 0:
        raise ValueError("fit_plett: the pulse tests contain no usable rests.")
    temps = hmap.temp_grid
    gap_max = [max(float(np.max(hmap.half_gap[:,j])), 1e-4) for j in range(len(temps))]
    names = ("gamma", "M_scale") + tuple(f"M0_T{temp:g}_V" for temp in temps)
    space = SearchSpace(
        names=names,
        lower=[GAMMA_BOUNDS[0], M_SCALE_BOUNDS[0]] + [0.0]*len(temps),
        upper=[GAMMA_BOUNDS[1], M_SCALE_BOUNDS[1]] + gap_max,
        log_scale=[True, False] + [False]*len(temps),
        base=[60.0, 1.0] + [0.0]*len(temps))
    result = run_pso(space, config, predictor, kind="hysteresis")
    gamma, m_scale, m0_fit = float(result.best_params[0]), float(result.best_params[1]), result.best_params[2:]

    best = result.best_cost
    sensitivity = min(abs(predictor(np.concatenate(([gamma*factor, m_scale], m0_fit))) - best) for factor in (0.5, 2.0))
    identifiable = sensitivity > IDENTIFIABILITY_THRESHOLD_V
    if not identifiable:
        logger.warning("gamma is not identifiable from these tests (cost changes by %.3g V when it is halved or doubled)", sensitivity)

    m0_grid = np.interp(temp_grid, temps, m0_fit)
    params = HysteresisParams(
        m0=m0_grid, m_map=hmap.m_table(m0_grid, m_scale, soc_grid, temp_grid),
        gamma=gamma, soc_grid=soc_grid, temp_grid=temp_grid)
    logger.info("Hysteresis fit: gamma %.4g, M scale %.4g, RMSE %.3f mV over %d rests",
                gamma, m_scale, 1000*best, len(predictor.points))
    return PlettFit(
        params=params, m_scale=m_scale, m0_fitted=dict(zip(temps, (float(x) for x in m0_fit))),
        rmse=best, n_points=len(predictor.points), gamma_identifiable=bool(identifiable), identification=result)


if __name__ == "__main__":
    import doctest, sys
    logger.addHandler(logging.StreamHandler(sys.stdout))
    logger.setLevel(logging.INFO)
    print(doctest.testmod())
