"""
Synthetic test corpora: current profiles of the usual cell-test protocols,
simulated with a known ("truth") model and optionally perturbed with gaussian
voltage noise. They stand in for measured data in round-trip tests of the
identification and characterization pipelines.

The drive cycles are synthetic current traces shaped after urban (UDDS-like)
and aggressive (US06-like) driving; they are not recorded field data.

Programmer: cellpyx team
Since: 2024-05
"""

import math
from dataclasses import dataclass, field, asdict

import numpy as np

from cellpyx.cells import CellSpec, REFERENCE_CELL
from cellpyx.parameters import ModelDocument
from cellpyx.hysteresis import HysteresisParams
from cellpyx.timeseries import TimeSeries, Dataset
from cellpyx.adaptors import build_model, simulate

import logging
logger = logging.getLogger(__name__)

TEST_TEMPERATURES_C = (-20.0, 0.0, 10.0, 25.0, 40.0)
CONSTANT_C_RATES = (0.25, 1.0, 2.0)
DRIVE_CYCLES = ("udds", "us06")
PULSE_TARGET_SOCS = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
PULSE_REST_S = 2.5 * 3600
SOC_MARGIN = 0.02

# micro-trip shapes: (accelerate s, cruise s, brake s, idle s, peak fraction, cruise fraction, regen fraction)
DRIVE_CYCLE_SHAPES = {
    "udds": [
        (20, 60, 15, 30, 0.6, 0.25, 0.35),
        (25, 120, 20, 20, 0.8, 0.30, 0.40),
        (15, 40, 10, 40, 0.5, 0.20, 0.30),
        (30, 200, 25, 25, 1.0, 0.35, 0.45),
        (20, 80, 15, 35, 0.7, 0.25, 0.35),
    ],
    "us06": [
        (10, 90, 12, 10, 1.0, 0.55, 0.60),
        (8, 150, 10, 8, 0.9, 0.60, 0.55),
        (12, 60, 15, 15, 1.0, 0.45, 0.65),
    ],
}
NOMINAL_PEAK_C_RATE = {"udds": 1.5, "us06": 3.0}


def max_c_rate_at(temp_c:float) -> float:
    """
    The highest C-rate applied to a cell at the given ambient temperature.

    >>> max_c_rate_at(-20.0), max_c_rate_at(0.0), max_c_rate_at(25.0)
    (0.5, 1.0, inf)
    """
    if temp_c <= -10:
        return 0.5
    if temp_c <= 5:
        return 1.0
    return math.inf


def _segment(duration_s:float, current_a:float, temp_c:float, dt:float) -> TimeSeries:
    return TimeSeries.constant(max(duration_s, dt), current_a, temp_c, dt)


def constant_rate_profile(spec:CellSpec, c_rate:float, temp_c:float, discharge:bool=True,
                          soc_window:float=0.9, rest_s:float=600.0) -> TimeSeries:
    """
    A rest, one constant-current move across `soc_window` of the capacity, and a rest.

    >>> profile = constant_rate_profile(CellSpec(100.0, 2.5, 3.65), 1.0, 25.0, soc_window=0.01, rest_s=10)
    >>> round(float(profile.charge_throughput_ah()[-1]), 9)
    1.0
    """
    dt = spec.sampling_dt
    current = spec.c_rate_current(c_rate) * (1 if discharge else -1)
    return TimeSeries.concatenate([
        _segment(rest_s, 0.0, temp_c, dt),
        _segment(soc_window * 3600 / c_rate, current, temp_c, dt),
        _segment(rest_s, 0.0, temp_c, dt),
    ], dt)


def multi_step_charge_profile(spec:CellSpec, temp_c:float, c_rates:tuple=(1.0, 0.5, 0.25),
                              soc_step:float=0.28, rest_s:float=300.0) -> TimeSeries:
    """ A stepped-down constant-current charge with short rests between the steps, capped by temperature. """
    dt = spec.sampling_dt
    cap = max_c_rate_at(temp_c)
    parts = [_segment(rest_s, 0.0, temp_c, dt)]
    for c_rate in c_rates:
        c_rate = min(c_rate, cap)
        parts.append(_segment(soc_step * 3600 / c_rate, -spec.c_rate_current(c_rate), temp_c, dt))
        parts.append(_segment(rest_s, 0.0, temp_c, dt))
    return TimeSeries.concatenate(parts, dt)


def drive_cycle_profile(spec:CellSpec, shape:str, temp_c:float, repeats:int=3, peak_c_rate:float=None) -> TimeSeries:
    """
    A synthetic drive-cycle current trace. The peak C-rate is the shape's
    nominal one, scaled down to the temperature cap.

    >>> profile = drive_cycle_profile(CellSpec(100.0, 2.5, 3.65), "udds", -20.0, repeats=1)
    >>> float(profile.current.max())
    50.0
    >>> drive_cycle_profile(CellSpec(100.0, 2.5, 3.65), "wltp", 25.0)
    Traceback (most recent call last):
    ...
    ValueError: drive_cycle_profile: unknown drive cycle 'wltp'; known: ['udds', 'us06'].
    """
    if shape not in DRIVE_CYCLE_SHAPES:
        raise ValueError(f"drive_cycle_profile: unknown drive cycle {shape!r}; known: {sorted(DRIVE_CYCLE_SHAPES)}.")
    peak_c_rate = peak_c_rate or NOMINAL_PEAK_C_RATE[shape]
    peak_c_rate = min(peak_c_rate, max_c_rate_at(temp_c))
    peak = spec.c_rate_current(peak_c_rate)
    dt = spec.sampling_dt
    parts = [_segment(60.0, 0.0, temp_c, dt)]
    for _ in range(repeats):
        for accelerate, cruise, brake, idle, peak_fraction, cruise_fraction, regen_fraction in DRIVE_CYCLE_SHAPES[shape]:
            parts.append(_segment(accelerate, peak * peak_fraction, temp_c, dt))
            parts.append(_segment(cruise, peak * cruise_fraction, temp_c, dt))
            parts.append(_segment(brake, -peak * regen_fraction * peak_fraction, temp_c, dt))
            parts.append(_segment(idle, 0.0, temp_c, dt))
    parts.append(_segment(300.0, 0.0, temp_c, dt))
    return TimeSeries.concatenate(parts, dt)


def hysteresis_pulse_profile(spec:CellSpec, temp_c:float, target_socs:tuple=PULSE_TARGET_SOCS,
                             pulse_depth:float=0.1, rest_s:float=PULSE_REST_S) -> TimeSeries:
    """
    The hysteresis characterization protocol, starting fully charged: for each
    target SOC, a 0.5C discharge to the target and a rest; pulse set A (0.5C
    discharge then charge), rest; set B (1C discharge then charge), rest;
    set C (1C charge then discharge), rest. Near the ends of the SOC window
    the pulses are shortened to keep a 2% margin.
    """
    dt = spec.sampling_dt
    half_c, one_c = spec.c_rate_current(0.5), spec.c_rate_current(1.0)
    parts = [_segment(60.0, 0.0, temp_c, dt)]
    soc = 1.0
    for target in sorted(target_socs, reverse=True):
        if not 0 < target < 1:
            raise ValueError(f"hysteresis_pulse_profile: target SOC must lie in (0,1), got {target}.")
        depth = min(pulse_depth, target - SOC_MARGIN, 1 - SOC_MARGIN - target)
        if depth <= 0:
            raise ValueError(f"hysteresis_pulse_profile: no room for a pulse at SOC {target}.")
        parts.append(_segment((soc - target) * 3600 / 0.5, half_c, temp_c, dt))
        parts.append(_segment(rest_s, 0.0, temp_c, dt))
        for first, second, c_rate in ((half_c, -half_c, 0.5), (one_c, -one_c, 1.0), (-one_c, one_c, 1.0)):
            pulse_s = depth * 3600 / c_rate
            parts.append(_segment(pulse_s, first, temp_c, dt))
            parts.append(_segment(pulse_s, second, temp_c, dt))
            parts.append(_segment(rest_s, 0.0, temp_c, dt))
        soc = target
    return TimeSeries.concatenate(parts, dt)


def _with_noise(series:TimeSeries, voltage:np.ndarray, sigma:float, rng:np.random.Generator) -> TimeSeries:
    if sigma > 0:
        voltage = voltage + rng.normal(0.0, sigma, len(voltage))
    return series.with_voltage(voltage)


def simulated_dataset(model, dataset_id:str, role:str, profile_kind:str, temp_c:float, profile:TimeSeries,
                      soc0:float, noise_sigma:float=0.0, rng:np.random.Generator=None) -> Dataset:
    """ Simulate a profile with the truth model. A simulation that aborts is an error. """
    draft = Dataset(dataset_id, role, temp_c, profile_kind, profile, initial_soc=soc0)
    result = simulate(model, draft, soc0)
    if not result.completed:
        raise ValueError(f"{dataset_id}: the truth model aborted at sample {result.aborted_at}: {result.abort_reason}")
    rng = rng if rng is not None else np.random.default_rng(0)
    series = _with_noise(profile, result.voltage, noise_sigma, rng)
    return Dataset(dataset_id, role, temp_c, profile_kind, series, initial_soc=soc0)


def hysteresis_pulse_test(model, spec:CellSpec, temp_c:float, target_socs:tuple=PULSE_TARGET_SOCS,
                          pulse_depth:float=0.1, rest_s:float=PULSE_REST_S, noise_sigma:float=0.0,
                          random_seed:int=0) -> Dataset:
    """ A simulated hysteresis pulse test at one temperature. """
    rng = np.random.default_rng(random_seed)
    profile = hysteresis_pulse_profile(spec, temp_c, target_socs, pulse_depth, rest_s)
    return simulated_dataset(model, f"pulse_{temp_c:g}C", "calibration", "hysteresis-pulse",
                             temp_c, profile, 1.0, noise_sigma, rng)


@dataclass
class ProfilePlan:
    """
    Which tests make up a synthetic corpus.

    >>> plan = ProfilePlan(temperatures=(-20.0, 25.0), c_rates=(0.25, 2.0), drive_cycles=("udds",), multi_step=False)
    >>> [entry[0] for entry in plan.entries()]
    ['cc0.25_-20C', 'udds_-20C', 'cc0.25_25C', 'cc2_25C', 'udds_25C']
    """
    temperatures: tuple = TEST_TEMPERATURES_C
    c_rates: tuple = CONSTANT_C_RATES
    drive_cycles: tuple = DRIVE_CYCLES
    multi_step: bool = True
    validation_cycles: tuple = ("us06",)
    drive_cycle_repeats: int = 3
    soc_window: float = 0.9

    def entries(self) -> list:
        """ (id, profile kind, temperature, c-rate or cycle name, role), in generation order. """
        entries = []
        for temp in self.temperatures:
            cap = max_c_rate_at(temp)
            for c_rate in self.c_rates:
                if c_rate > cap:
                    logger.debug("%g C: %gC constant-rate test dropped (cap %gC)", temp, c_rate, cap)
                    continue
                entries.append((f"cc{c_rate:g}_{temp:g}C", "constant-rate", temp, c_rate, "calibration"))
            if self.multi_step:
                entries.append((f"msc_{temp:g}C", "multi-step", temp, None, "calibration"))
            for cycle in self.drive_cycles:
                role = "validation" if cycle in self.validation_cycles else "calibration"
                entries.append((f"{cycle}_{temp:g}C", "drive-cycle", temp, cycle, role))
        return entries

    def profile(self, spec:CellSpec, entry:tuple) -> tuple:
        """ The input profile and initial SOC of one entry. """
        _, kind, temp, detail, _ = entry
        start_full = 1 - (1 - self.soc_window) / 2
        if kind == "constant-rate":
            return constant_rate_profile(spec, detail, temp, soc_window=self.soc_window), start_full
        if kind == "multi-step":
            return multi_step_charge_profile(spec, temp), 1 - start_full
        return drive_cycle_profile(spec, detail, temp, self.drive_cycle_repeats), start_full

    def to_dict(self) -> dict:
        return {key: list(value) if isinstance(value, tuple) else value for key,value in asdict(self).items()}

    @staticmethod
    def from_dict(data:dict) -> "ProfilePlan":
        return ProfilePlan(**{key: tuple(value) if isinstance(value, list) else value for key,value in data.items()})


@dataclass
class SyntheticCorpus:
    datasets: list
    truth: ModelDocument
    plan: ProfilePlan
    noise_sigma: float
    random_seed: int
    role_counts: dict = field(default_factory=dict)

    def truth_record(self) -> dict:
        return {
            "schema_version": 1,
            "model": self.truth.to_dict(),
            "plan": self.plan.to_dict(),
            "noise_sigma_V": self.noise_sigma,
            "random_seed": self.random_seed,
            "datasets": [dataset.id for dataset in self.datasets],
        }


def generate_synthetic(kind:str, truth_params, plan:ProfilePlan=None, noise_sigma:float=0.0, random_seed:int=0,
                       spec:CellSpec=REFERENCE_CELL, hysteresis:HysteresisParams=None) -> SyntheticCorpus:
    """
    Simulate every test of the plan with the truth model and add gaussian
    voltage noise of the given standard deviation (V).

    >>> from cellpyx.parameters import reference_ecm_params
    >>> plan = ProfilePlan(temperatures=(25.0,), c_rates=(2.0,), drive_cycles=(), multi_step=False, soc_window=0.02)
    >>> corpus = generate_synthetic("ecm", reference_ecm_params(), plan, noise_sigma=0.001, random_seed=1)
    >>> [dataset.id for dataset in corpus.datasets], corpus.role_counts
    (['cc2_25C'], {'calibration': 1, 'validation': 0})
    """
    plan = plan or ProfilePlan()
    if noise_sigma < 0:
        raise ValueError(f"generate_synthetic: noise sigma must be non-negative, got {noise_sigma}.")
    model = build_model(kind, truth_params, spec, hysteresis)
    logger.info("Random seed: %d", random_seed)
    rng = np.random.default_rng(random_seed)
    datasets = []
    for entry in plan.entries():
        dataset_id, profile_kind, temp, _, role = entry
        profile, soc0 = plan.profile(spec, entry)
        datasets.append(simulated_dataset(model, dataset_id, role, profile_kind, temp, profile, soc0, noise_sigma, rng))
        logger.info("%s: %d samples simulated", dataset_id, len(profile))
    role_counts = {role: sum(dataset.role == role for dataset in datasets) for role in ("calibration", "validation")}
    truth = ModelDocument(kind, spec, truth_params, model.hysteresis)
    return SyntheticCorpus(datasets, truth, plan, noise_sigma, random_seed, role_counts)


if __name__ == "__main__":
    import doctest, sys
    logger.addHandler(logging.StreamHandler(sys.stdout))
    logger.setLevel(logging.INFO)
    print(doctest.testmod())
