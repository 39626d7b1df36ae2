"""
Per-sample compute time of the models.

Programmer: cellpyx team
Since: 2024-05
"""

import statistics
import time
from dataclasses import dataclass

from cellpyx.cells import CellSpec, REFERENCE_CELL
from cellpyx.hysteresis import HysteresisParams
from cellpyx.adaptors import build_model

import logging
logger = logging.getLogger(__name__)

MIN_BENCH_STEPS = 100_000


@dataclass(frozen=True)
class StepTiming:
    kind: str
    n_steps: int
    run_ms: tuple          # ms per step of each timed run

    @property
    def median_ms(self) -> float:
        return statistics.median(self.run_ms)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "n_steps": self.n_steps, "median_ms_per_step": self.median_ms, "runs_ms_per_step": list(self.run_ms)}


def _square_wave(n_steps:int, amplitude:float, half_period:int) -> list:
    """ Alternating discharge and charge, so the SOC stays near its start. """
    return [amplitude if (k // half_period) % 2 == 0 else -amplitude for k in range(n_steps)]


def _timed_run(model, currents:list, dt:float, temp_c:float, soc0:float) -> float:
    state = model.init_state(soc0, temp_c)
    advance, output = model.advance, model.output
    start = time.perf_counter()
    for current in currents:
        state = advance(state, current, dt, temp_c)
        output(state, current, temp_c)
    return time.perf_counter() - start


def benchmark_step_time(kind:str, params, n_steps:int=MIN_BENCH_STEPS, spec:CellSpec=REFERENCE_CELL,
                        hysteresis:HysteresisParams=None, repeats:int=3, c_rate:float=0.5,
                        temp_c:float=25.0, soc0:float=0.5) -> StepTiming:
    """
    Time `repeats` warm runs of n_steps samples (a state update plus the
    voltage output each) and report the median time per step.

    >>> from cellpyx.parameters import reference_ecm_params
    >>> benchmark_step_time("ecm", reference_ecm_params(), n_steps=10)
    Traceback (most recent call last):
    ...
    ValueError: benchmark_step_time: need at least 100000 steps, got 10.
    """
    if n_steps < MIN_BENCH_STEPS:
        raise ValueError(f"benchmark_step_time: need at least {MIN_BENCH_STEPS} steps, got {n_steps}.")
    if repeats < 1:
        raise ValueError(f"benchmark_step_time: need at least one run, got {repeats}.")
    model = build_model(kind, params, spec, hysteresis)
    currents = _square_wave(n_steps, spec.c_rate_current(c_rate), half_period=60)
    # warm-up fills the temperature-property cache
    _timed_run(model, currents[:1000], spec.sampling_dt, temp_c, soc0)
    runs = tuple(1000 * _timed_run(model, currents, spec.sampling_dt, temp_c, soc0) / n_steps for _ in range(repeats))
    timing = StepTiming(kind, n_steps, runs)
    logger.info("%s: %.4f ms per step (median of %d runs of %d steps)", kind, timing.median_ms, repeats, n_steps)
    return timing


if __name__ == "__main__":
    import doctest, sys
    logger.addHandler(logging.StreamHandler(sys.stdout))
    logger.setLevel(logging.INFO)
    print(doctest.testmod())
