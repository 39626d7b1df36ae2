"""
The stepping driver shared by both models, the simulation result with its
per-step diagnostics, and the errors that end a simulation early.

A model is any object with the methods

    init_state(soc0, temp_c) -> state
    advance(state, current, dt, temp_c) -> state
    output(state, current, temp_c) -> tuple of diagnostic values (voltage first)
    soc(state) -> float

and a `diagnostic_columns` tuple naming the output values.

Sample k's current is held over (t[k-1], t[k]]; the state is advanced with it
and the voltage of sample k is the output on the advanced state.
Sample 0 is the output on the initial state.

Programmer: cellpyx team
Since: 2024-05
"""

import math
import pathlib
from dataclasses import dataclass

import numpy as np
import pandas as pd

from cellpyx.timeseries import TimeSeries

import logging
logger = logging.getLogger(__name__)


class ModelValidityError(RuntimeError):
    """ A state left the region where the model equations are defined. """

    def __init__(self, quantity:str, value:float, where:str=""):
        self.quantity = quantity
        self.value = value
        self.where = where
        location = f" in the {where}" if where else ""
        super().__init__(f"{quantity}{location} left its valid range: {value:.6g}")


class SolidSaturationError(ModelValidityError):
    """ A solid concentration reached zero or the saturation limit. """


class ElectrolyteDepletionError(ModelValidityError):
    """ The electrolyte concentration reached zero somewhere in the cell. """


CSV_HEAD = ("time_s", "current_a", "voltage_v", "temperature_c")


@dataclass
class SimulationResult:
    """
    The outcome of driving a model over a profile. Rows exist only for the
    samples that were simulated; `aborted_at` is the index of the first sample
    that could not be computed, or None.
    """
    kind: str
    dataset_id: str
    diagnostics: pd.DataFrame
    n_expected: int
    aborted_at: int = None
    abort_reason: str = ""

    @property
    def voltage(self) -> np.ndarray:
        return self.diagnostics["voltage_v"].to_numpy()

    @property
    def n_completed(self) -> int:
        return len(self.diagnostics)

    @property
    def n_missing(self) -> int:
        return self.n_expected - self.n_completed

    @property
    def completed(self) -> bool:
        return self.aborted_at is None

    def series(self) -> TimeSeries:
        """ The simulated samples as a time series (at least 2 samples needed). """
        frame = self.diagnostics
        return TimeSeries(
            time=frame["time_s"].to_numpy(), current=frame["current_a"].to_numpy(),
            temperature=frame["temperature_c"].to_numpy(), voltage=frame["voltage_v"].to_numpy(),
            title=self.dataset_id)

    def squared_errors(self, measured:TimeSeries) -> np.ndarray:
        if measured.voltage is None:
            raise ValueError(f"{self.dataset_id}: measured series has no voltage.")
        return (self.voltage - measured.voltage[:self.n_completed])**2

    def rmse(self, measured:TimeSeries, mask:np.ndarray=None) -> float:
        """
        Voltage RMSE over the completed samples, optionally restricted by a
        boolean mask over the full profile. NaN when nothing is selected.
        """
        errors = self.squared_errors(measured)
        if mask is not None:
            errors = errors[np.asarray(mask)[:self.n_completed]]
        if len(errors) == 0:
            return math.nan
        return float(np.sqrt(np.mean(errors)))

    def to_frame(self, measured:TimeSeries=None) -> pd.DataFrame:
        frame = self.diagnostics.copy()
        if measured is not None and measured.voltage is not None:
            frame.insert(3, "measured_voltage_v", measured.voltage[:self.n_completed])
        return frame

    def to_csv(self, path, measured:TimeSeries=None):
        path = pathlib.Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame(measured).to_csv(path, index=False, float_format="%.9g")


def _row(time, current, temperature, output:tuple) -> tuple:
    return (time, current, output[0], temperature) + output[1:]


def run_simulation(model, profile:TimeSeries, soc0:float, kind:str="model", dataset_id:str=None) -> SimulationResult:
    """
    Drive `model` over the profile. Model-validity errors end the run early
    and the samples computed so far are kept.
    """
    dataset_id = dataset_id or profile.title
    time, current, temperature = profile.time.tolist(), profile.current.tolist(), profile.temperature.tolist()
    rows = []
    aborted_at, reason = None, ""
    try:
        state = model.init_state(soc0, temperature[0])
        rows.append(_row(time[0], current[0], temperature[0], model.output(state, current[0], temperature[0])))
        for k in range(1, len(time)):
            try:
                state = model.advance(state, current[k], time[k] - time[k-1], temperature[k])
                rows.append(_row(time[k], current[k], temperature[k], model.output(state, current[k], temperature[k])))
            except ModelValidityError as err:
                aborted_at, reason = k, str(err)
                break
    except ModelValidityError as err:
        aborted_at, reason = 0, str(err)
    if aborted_at is not None:
        logger.info("%s: %s simulation aborted at sample %d of %d: %s", dataset_id, kind, aborted_at, len(time), reason)
    diagnostics = pd.DataFrame(rows, columns=list(CSV_HEAD + model.diagnostic_columns[1:]))
    return SimulationResult(kind, dataset_id, diagnostics, len(time), aborted_at, reason)


if __name__ == "__main__":
    import doctest, sys
    logger.addHandler(logging.StreamHandler(sys.stdout))
    logger.setLevel(logging.INFO)
    print(doctest.testmod())
