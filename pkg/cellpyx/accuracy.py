"""
Voltage-accuracy bookkeeping: per-dataset RMSE, the segmented RMSE at low SOC
and at low temperature, and the matrix of models against datasets.

Segmented figures are pooled over all selected samples of all datasets, so a
dataset with few low-SOC samples weighs in proportion to them.

Programmer: cellpyx team
Since: 2024-05
"""

import math
from dataclasses import dataclass, asdict

import numpy as np
import pandas as pd

from cellpyx.models.simulation import SimulationResult
from cellpyx.timeseries import Dataset

import logging
logger = logging.getLogger(__name__)

LOW_SOC_LIMIT = 0.2
LOW_TEMPERATURE_LIMIT_C = 0.0


@dataclass(frozen=True)
class DatasetAccuracy:
    dataset_id: str
    ambient_temp: float
    n_samples: int
    n_completed: int
    aborted_at: int
    abort_reason: str
    sse: float
    n_low_soc: int
    sse_low_soc: float
    n_low_temp: int
    sse_low_temp: float

    @property
    def rmse(self) -> float:
        return math.sqrt(self.sse / self.n_completed) if self.n_completed else math.nan

    @property
    def low_soc_rmse(self) -> float:
        return math.sqrt(self.sse_low_soc / self.n_low_soc) if self.n_low_soc else math.nan

    @property
    def low_temp_rmse(self) -> float:
        return math.sqrt(self.sse_low_temp / self.n_low_temp) if self.n_low_temp else math.nan

    def to_row(self) -> dict:
        row = asdict(self)
        row.update(rmse_v=self.rmse, low_soc_rmse_v=self.low_soc_rmse, low_temp_rmse_v=self.low_temp_rmse)
        return row


def segment_errors(diagnostics:pd.DataFrame, measured_voltage) -> tuple:
    """
    Squared errors of a diagnostics table, and the low-SOC and low-temperature
    masks over its rows. SOC is the model's own SOC estimate.

    >>> frame = pd.DataFrame({"voltage_v": [3.3, 3.2, 3.1], "soc": [0.5, 0.19, 0.1], "temperature_c": [25.0, 0.0, -5.0]})
    >>> errors, low_soc, low_temp = segment_errors(frame, [3.3, 3.21, 3.1])
    >>> low_soc.tolist(), low_temp.tolist()
    ([False, True, True], [False, True, True])
    """
    n = len(diagnostics)
    errors = (diagnostics["voltage_v"].to_numpy() - np.asarray(measured_voltage, dtype=float)[:n])**2
    low_soc = diagnostics["soc"].to_numpy() < LOW_SOC_LIMIT
    low_temp = diagnostics["temperature_c"].to_numpy() <= LOW_TEMPERATURE_LIMIT_C
    return errors, low_soc, low_temp


def dataset_accuracy(result:SimulationResult, dataset:Dataset) -> DatasetAccuracy:
    if dataset.series.voltage is None:
        raise ValueError(f"{dataset.id}: the dataset has no measured voltage.")
    errors, low_soc, low_temp = segment_errors(result.diagnostics, dataset.series.voltage)
    return DatasetAccuracy(
        dataset_id=dataset.id, ambient_temp=dataset.ambient_temp,
        n_samples=result.n_expected, n_completed=result.n_completed,
        aborted_at=result.aborted_at, abort_reason=result.abort_reason,
        sse=float(errors.sum()),
        n_low_soc=int(low_soc.sum()), sse_low_soc=float(errors[low_soc].sum()),
        n_low_temp=int(low_temp.sum()), sse_low_temp=float(errors[low_temp].sum()))


@dataclass
class AccuracyReport:
    """
    The accuracy of one model over a list of datasets.

    >>> rows = [DatasetAccuracy("a", 25.0, 4, 4, None, "", 4e-4, 2, 4e-4, 0, 0.0),
    ...         DatasetAccuracy("b", -10.0, 4, 4, None, "", 1.6e-3, 0, 0.0, 4, 1.6e-3)]
    >>> report = AccuracyReport("ecm", rows)
    >>> round(report.overall_rmse, 12), round(report.low_soc_rmse, 12), round(report.low_temp_rmse, 12)
    (0.015, 0.014142135624, 0.02)
    """
    kind: str
    rows: list

    @property
    def dataset_ids(self) -> list:
        return [row.dataset_id for row in self.rows]

    @property
    def overall_rmse(self) -> float:
        """ The average of the per-dataset RMSEs. """
        values = [row.rmse for row in self.rows if not math.isnan(row.rmse)]
        return float(np.mean(values)) if values else math.nan

    @property
    def total_rmse(self) -> float:
        """ The sum of the per-dataset RMSEs. """
        return float(sum(row.rmse for row in self.rows if not math.isnan(row.rmse)))

    @property
    def low_soc_rmse(self) -> float:
        n = sum(row.n_low_soc for row in self.rows)
        return math.sqrt(sum(row.sse_low_soc for row in self.rows) / n) if n else math.nan

    @property
    def low_temp_rmse(self) -> float:
        n = sum(row.n_low_temp for row in self.rows)
        return math.sqrt(sum(row.sse_low_temp for row in self.rows) / n) if n else math.nan

    @property
    def aborted(self) -> list:
        return [row.dataset_id for row in self.rows if row.aborted_at is not None]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([row.to_row() for row in self.rows])

    def summary(self) -> dict:
        return {
            "kind": self.kind,
            "n_datasets": len(self.rows),
            "overall_rmse_V": self.overall_rmse,
            "total_rmse_V": self.total_rmse,
            "low_soc_rmse_V": self.low_soc_rmse,
            "low_temp_rmse_V": self.low_temp_rmse,
            "aborted": self.aborted,
        }


class RmseMatrix:
    """
    Models against datasets. All reports must cover the same datasets in the same order.

    >>> row = lambda i, sse: DatasetAccuracy(i, 25.0, 1, 1, None, "", sse, 0, 0.0, 0, 0.0)
    >>> matrix = RmseMatrix([AccuracyReport("pbm", [row("a", 1e-4)]), AccuracyReport("ecm", [row("a", 4e-4)])])
    >>> [round(x, 12) for x in matrix.table().loc["a"]]
    [0.01, 0.02]
    >>> round(matrix.deltas()["overall_rmse_V"], 12)
    -0.01
    """

    def __init__(self, reports:list):
        if not reports:
            raise ValueError("RmseMatrix: need at least one report.")
        ids = reports[0].dataset_ids
        for report in reports[1:]:
            if report.dataset_ids != ids:
                raise ValueError(f"RmseMatrix: {report.kind} covers datasets {report.dataset_ids}, expected {ids}.")
        self.reports = list(reports)

    @property
    def kinds(self) -> list:
        return [report.kind for report in self.reports]

    def table(self) -> pd.DataFrame:
        """ RMSE per dataset (rows) and model (columns). """
        return pd.DataFrame(
            {report.kind: [row.rmse for row in report.rows] for report in self.reports},
            index=pd.Index(self.reports[0].dataset_ids, name="dataset_id"))

    def summary(self) -> pd.DataFrame:
        return pd.DataFrame([report.summary() for report in self.reports]).set_index("kind")

    def deltas(self, first:int=0, second:int=1) -> dict:
        """ Summary figures of one model minus those of another. """
        a, b = self.reports[first], self.reports[second]
        return {
            name: getattr(a, attribute) - getattr(b, attribute)
            for name,attribute in (("overall_rmse_V", "overall_rmse"), ("low_soc_rmse_V", "low_soc_rmse"),
                                   ("low_temp_rmse_V", "low_temp_rmse"))
        }


if __name__ == "__main__":
    import doctest, sys
    logger.addHandler(logging.StreamHandler(sys.stdout))
    logger.setLevel(logging.INFO)
    print(doctest.testmod())
