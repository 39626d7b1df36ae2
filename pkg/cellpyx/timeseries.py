"""
Sampled test records: time, current (positive = discharge), voltage and temperature,
and the datasets that tag them with a role and test conditions.

Programmer: cellpyx team
Since: 2024-05
"""

from dataclasses import dataclass, replace

import numpy as np
import pandas as pd

from cellpyx.cells import frozen_array

import logging
logger = logging.getLogger(__name__)

CSV_COLUMNS = ("time_s", "current_a", "voltage_v", "temperature_c")

ROLES = ("calibration", "validation")
PROFILE_KINDS = ("constant-rate", "multi-step", "drive-cycle", "hysteresis-pulse")


@dataclass(frozen=True)
class TimeSeries:
    """
    A sampled record. The voltage may be omitted for a pure input profile.

    >>> series = TimeSeries(time=[0, 1, 2], current=[0, 10, 10], temperature=[25, 25, 25], voltage=[3.3, 3.29, 3.28])
    >>> len(series), series.duration
    (3, 2.0)
    >>> TimeSeries(time=[0, 1, 1], current=[0, 0, 0], temperature=[25, 25, 25])
    Traceback (most recent call last):
    ...
    ValueError: TimeSeries: time must be strictly increasing (row 2).
    >>> TimeSeries(time=[0], current=[0], temperature=[25])
    Traceback (most recent call last):
    ...
    ValueError: TimeSeries: need at least 2 samples, got 1.
    """
    time: np.ndarray             # s
    current: np.ndarray          # A
    temperature: np.ndarray      # C
    voltage: np.ndarray = None   # V
    title: str = "TimeSeries"

    def __post_init__(self):
        title = self.title
        time = frozen_array(self.time, title, "time", ndim=1)
        current = frozen_array(self.current, title, "current", ndim=1)
        temperature = frozen_array(self.temperature, title, "temperature", ndim=1)
        if len(time) < 2:
            raise ValueError(f"{title}: need at least 2 samples, got {len(time)}.")
        lengths = {len(time), len(current), len(temperature)}
        if self.voltage is not None:
            voltage = frozen_array(self.voltage, title, "voltage", ndim=1)
            lengths.add(len(voltage))
            object.__setattr__(self, "voltage", voltage)
        if len(lengths) != 1:
            raise ValueError(f"{title}: columns have different lengths {sorted(lengths)}.")
        steps = np.diff(time)
        if not np.all(steps > 0):
            row = int(np.argmax(steps <= 0)) + 1
            raise ValueError(f"{title}: time must be strictly increasing (row {row}).")
        object.__setattr__(self, "time", time)
        object.__setattr__(self, "current", current)
        object.__setattr__(self, "temperature", temperature)

    def __len__(self):
        return len(self.time)

    @property
    def duration(self) -> float:
        return float(self.time[-1] - self.time[0])

    @property
    def has_voltage(self) -> bool:
        return self.voltage is not None

    def slice(self, start:int, stop:int) -> "TimeSeries":
        """ Samples [start, stop) as a new series. """
        return TimeSeries(
            time=self.time[start:stop], current=self.current[start:stop],
            temperature=self.temperature[start:stop],
            voltage=None if self.voltage is None else self.voltage[start:stop],
            title=self.title)

    def with_voltage(self, voltage) -> "TimeSeries":
        return replace(self, voltage=voltage)

    def charge_throughput_ah(self) -> np.ndarray:
        """
        Cumulative discharged charge (Ah) at each sample, with each sample's
        current held over the interval that ends at it.

        >>> series = TimeSeries(time=[0, 1800, 3600], current=[0, 100, 100], temperature=[25]*3)
        >>> series.charge_throughput_ah().tolist()
        [0.0, 50.0, 100.0]
        """
        increments = self.current[1:] * np.diff(self.time) / 3600
        return np.concatenate(([0.0], np.cumsum(increments)))

    def to_frame(self) -> pd.DataFrame:
        columns = {
            "time_s": self.time,
            "current_a": self.current,
            "voltage_v": self.voltage if self.voltage is not None else np.full(len(self), np.nan),
            "temperature_c": self.temperature,
        }
        return pd.DataFrame(columns, columns=list(CSV_COLUMNS))

    @staticmethod
    def from_frame(frame:pd.DataFrame, title:str="TimeSeries") -> "TimeSeries":
        missing = [column for column in CSV_COLUMNS if column not in frame.columns]
        if missing:
            raise ValueError(f"{title}: missing columns {missing}.")
        return TimeSeries(
            time=frame["time_s"].to_numpy(dtype=float),
            current=frame["current_a"].to_numpy(dtype=float),
            temperature=frame["temperature_c"].to_numpy(dtype=float),
            voltage=frame["voltage_v"].to_numpy(dtype=float),
            title=title)

    @staticmethod
    def constant(duration_s:float, current_a:float, temp_c:float, dt:float=1.0) -> "TimeSeries":
        """
        A constant-current profile sampled every dt; sample 0 is the rest point.

        >>> series = TimeSeries.constant(3, 5.0, 25.0)
        >>> series.time.tolist(), series.current.tolist()
        ([0.0, 1.0, 2.0, 3.0], [0.0, 5.0, 5.0, 5.0])
        """
        n = int(round(duration_s / dt))
        time = np.arange(n + 1) * dt
        current = np.full(n + 1, float(current_a))
        current[0] = 0.0
        return TimeSeries(time=time, current=current, temperature=np.full(n + 1, float(temp_c)))

    @staticmethod
    def concatenate(parts:list, dt:float=1.0) -> "TimeSeries":
        """
        Join input profiles end to end; each part's first sample is dropped
        after the first part, so the segments share their boundary sample.

        >>> a = TimeSeries.constant(2, 1.0, 25.0)
        >>> b = TimeSeries.constant(2, -1.0, 25.0)
        >>> joined = TimeSeries.concatenate([a, b])
        >>> joined.time.tolist(), joined.current.tolist()
        ([0.0, 1.0, 2.0, 3.0, 4.0], [0.0, 1.0, 1.0, -1.0, -1.0])
        """
        times, currents, temps = [parts[0].time - parts[0].time[0]], [parts[0].current], [parts[0].temperature]
        for part in parts[1:]:
            offset = times[-1][-1]
            times.append(part.time[1:] - part.time[0] + offset)
            currents.append(part.current[1:])
            temps.append(part.temperature[1:])
        return TimeSeries(time=np.concatenate(times), current=np.concatenate(currents), temperature=np.concatenate(temps))


@dataclass(frozen=True)
class Dataset:
    """
    >>> series = TimeSeries.constant(10, 83.0, 25.0)
    >>> Dataset("d1", "calibration", 25.0, "constant-rate", series).role
    'calibration'
    >>> Dataset("d1", "training", 25.0, "constant-rate", series)
    Traceback (most recent call last):
    ...
    ValueError: d1: role must be one of ('calibration', 'validation'), got 'training'.
    """
    id: str
    role: str
    ambient_temp: float          # C
    profile_kind: str
    series: TimeSeries
    initial_soc: float = None

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"{self.id}: role must be one of {ROLES}, got {self.role!r}.")
        if self.profile_kind not in PROFILE_KINDS:
            raise ValueError(f"{self.id}: profile kind must be one of {PROFILE_KINDS}, got {self.profile_kind!r}.")
        if self.initial_soc is not None and not 0 <= self.initial_soc <= 1:
            raise ValueError(f"{self.id}: initial SOC must lie in [0,1], got {self.initial_soc}.")

    def with_role(self, role:str) -> "Dataset":
        return replace(self, role=role)


def datasets_with_role(datasets:list, role:str, title:str="datasets") -> list:
    """ Check that every dataset has the given role. """
    wrong = [dataset.id for dataset in datasets if dataset.role != role]
    if wrong:
        raise ValueError(f"{title}: expected only {role} datasets, but got {wrong}.")
    if not datasets:
        raise ValueError(f"{title}: no datasets given.")
    return list(datasets)


if __name__ == "__main__":
    import doctest, sys
    logger.addHandler(logging.StreamHandler(sys.stdout))
    logger.setLevel(logging.INFO)
    print(doctest.testmod())
