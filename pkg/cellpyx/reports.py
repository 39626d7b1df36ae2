"""
Side-by-side comparison of two calibrated models on the same validation
datasets: accuracy overall, at low SOC and at low temperature, compute time
per step and the number of tunable parameters. Reports are written as JSON
and CSV; plots as self-contained SVG (voltage overlays per dataset and a
radar summary).

Programmer: cellpyx team
Since: 2024-05
"""

import json
import math
import pathlib
from dataclasses import dataclass, replace

import numpy as np
import pandas as pd
import matplotlib
from matplotlib.figure import Figure

from cellpyx.parameters import PbmParams, EcmParams
from cellpyx.accuracy import AccuracyReport, RmseMatrix
from cellpyx.adaptors import simulate_all, evaluate_accuracy
from cellpyx.run_loggers import RunLogger

import logging
logger = logging.getLogger(__name__)

SVG_SETTINGS = {"svg.hashsalt": "cellpyx", "svg.fonttype": "none"}
RADAR_AXES = (
    ("overall_rmse_V", "Overall RMSE"),
    ("low_soc_rmse_V", "RMSE at low SOC"),
    ("low_temp_rmse_V", "RMSE at low temperature"),
    ("step_ms", "Time per step"),
    ("n_parameters", "Tunable parameters"),
)


def tunable_parameter_count(kind:str, params) -> int:
    """
    >>> from cellpyx.parameters import reference_pbm_params, reference_ecm_params
    >>> tunable_parameter_count("pbm", reference_pbm_params()), tunable_parameter_count("ecm", reference_ecm_params())
    (72, 330)
    """
    if kind == "pbm":
        return len(PbmParams.vector_names())
    return len(EcmParams.vector_names(params.soc_grid, params.temp_grid))


@dataclass
class ComparisonReport:
    """ Two models (first and second) over the same datasets. """
    matrix: RmseMatrix
    step_ms: dict              # label -> ms per step, or NaN when not measured
    n_parameters: dict         # label -> count

    @property
    def labels(self) -> list:
        return self.matrix.kinds

    def summary(self) -> pd.DataFrame:
        frame = self.matrix.summary()
        frame["step_ms"] = [self.step_ms.get(label, math.nan) for label in frame.index]
        frame["n_parameters"] = [self.n_parameters.get(label) for label in frame.index]
        return frame

    def per_dataset(self) -> pd.DataFrame:
        return self.matrix.table()

    def deltas(self) -> dict:
        """ First model minus second model; the step time only when both were measured. """
        first, second = self.labels
        deltas = self.matrix.deltas()
        if first in self.step_ms and second in self.step_ms:
            deltas["step_ms"] = self.step_ms[first] - self.step_ms[second]
        deltas["n_parameters"] = self.n_parameters[first] - self.n_parameters[second]
        return deltas

    def to_dict(self) -> dict:
        summary = self.summary().drop(columns=["aborted"])
        return {
            "schema_version": 1,
            "models": {label: {key: _plain(value) for key,value in row.items()} for label,row in summary.iterrows()},
            "aborted": {report.kind: report.aborted for report in self.matrix.reports},
            "deltas": {key: _plain(value) for key,value in self.deltas().items()},
            "datasets": list(self.per_dataset().index),
        }

    def save(self, out_dir, stem:str="comparison") -> list:
        out_dir = pathlib.Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        paths = [out_dir / f"{stem}.json", out_dir / f"{stem}_summary.csv", out_dir / f"{stem}_per_dataset.csv"]
        paths[0].write_text(json.dumps(self.to_dict(), indent=2))
        self.summary().to_csv(paths[1])
        self.per_dataset().to_csv(paths[2], float_format="%.9g")
        return paths


def _plain(value):
    """ JSON-ready: numpy scalars become Python numbers and NaN becomes null. """
    if isinstance(value, (np.floating, np.integer)):
        value = value.item()
    if isinstance(value, float) and math.isnan(value):
        return None
    return value


def compare_reports(first:AccuracyReport, second:AccuracyReport, n_parameters:dict, step_ms:dict=None) -> ComparisonReport:
    """
    Combine two accuracy reports. They must cover the same datasets in the same order.
    A model compared with its own kind is labelled `<kind>_2`.
    """
    if first.kind == second.kind:
        second = replace(second, kind=f"{second.kind}_2")
        n_parameters = {**n_parameters, second.kind: n_parameters[first.kind]}
        if step_ms and first.kind in step_ms:
            step_ms = {**step_ms, second.kind: step_ms[first.kind]}
    return ComparisonReport(RmseMatrix([first, second]), dict(step_ms or {}), dict(n_parameters))


def compare(first_model, second_model, datasets:list, step_ms:dict=None, out_dir=None,
            run_logger:RunLogger=None) -> ComparisonReport:
    """
    Simulate both models on the datasets and compare them. With out_dir, the
    report files, one voltage overlay per dataset and the radar summary are written there.

    :param step_ms: measured time per step by model kind (see benchmark_step_time).
    """
    first_results = simulate_all(first_model, datasets, run_logger)
    second_results = simulate_all(second_model, datasets, run_logger)
    first_report = evaluate_accuracy(first_model, datasets, run_logger, first_results)
    second_report = evaluate_accuracy(second_model, datasets, run_logger, second_results)
    n_parameters = {first_model.kind: tunable_parameter_count(first_model.kind, first_model.params)}
    n_parameters.setdefault(second_model.kind, tunable_parameter_count(second_model.kind, second_model.params))
    report = compare_reports(first_report, second_report, n_parameters, step_ms)
    if out_dir is not None:
        out_dir = pathlib.Path(out_dir)
        report.save(out_dir)
        first_label, second_label = report.labels
        for i,dataset in enumerate(datasets):
            plot_voltage_overlay(dataset, {first_label: first_results[i], second_label: second_results[i]},
                                 out_dir / "plots" / f"overlay_{dataset.id}.svg")
        plot_radar(report, out_dir / "plots" / "radar.svg")
    for name,delta in report.deltas().items():
        logger.info("%s: %s minus %s = %.6g", name, *report.labels, delta)
    return report


#### Plots


def save_svg(figure:Figure, path) -> pathlib.Path:
    """ Write a figure as SVG; the same figure always gives the same bytes. """
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with matplotlib.rc_context(SVG_SETTINGS):
        figure.savefig(path, format="svg", metadata={"Date": None})
    return path


def plot_voltage_overlay(dataset, results:dict, path) -> pathlib.Path:
    """ Measured and simulated voltage of one dataset, with the errors below. """
    figure = Figure(figsize=(8, 5))
    voltage_axes, error_axes = figure.subplots(2, 1, sharex=True, gridspec_kw={"height_ratios": [3, 1]})
    series = dataset.series
    hours = (series.time - series.time[0]) / 3600
    voltage_axes.plot(hours, series.voltage, color="black", linewidth=1, label="measured")
    for label,result in results.items():
        n = result.n_completed
        voltage_axes.plot(hours[:n], result.voltage, linewidth=1, label=label)
        error_axes.plot(hours[:n], 1000 * (result.voltage - series.voltage[:n]), linewidth=1, label=label)
    voltage_axes.set_ylabel("Voltage (V)")
    voltage_axes.set_title(f"{dataset.id} ({dataset.profile_kind}, {dataset.ambient_temp:g} C)")
    voltage_axes.legend(loc="best", fontsize=8)
    error_axes.set_ylabel("Error (mV)")
    error_axes.set_xlabel("Time (h)")
    return save_svg(figure, path)


def radar_values(report:ComparisonReport) -> dict:
    """
    Each axis divided by the larger of the two models' values, so the worse
    model touches the rim. Missing values count as 0.

    >>> from cellpyx.accuracy import DatasetAccuracy
    >>> row = lambda sse: DatasetAccuracy("a", 25.0, 1, 1, None, "", sse, 0, 0.0, 0, 0.0)
    >>> report = compare_reports(AccuracyReport("pbm", [row(1e-4)]), AccuracyReport("ecm", [row(4e-4)]), {"pbm": 72, "ecm": 330})
    >>> [round(x, 4) for x in radar_values(report)["pbm"]]
    [0.5, 0.0, 0.0, 0.0, 0.2182]
    """
    summary = report.summary()
    values = {label: [] for label in report.labels}
    for column,_ in RADAR_AXES:
        column_values = [float(summary.loc[label, column]) for label in report.labels]
        column_values = [0.0 if math.isnan(value) else value for value in column_values]
        largest = max(column_values)
        for label,value in zip(report.labels, column_values):
            values[label].append(value / largest if largest > 0 else 0.0)
    return values


def plot_radar(report:ComparisonReport, path) -> pathlib.Path:
    figure = Figure(figsize=(6, 6))
    axes = figure.add_subplot(projection="polar")
    angles = np.linspace(0, 2*np.pi, len(RADAR_AXES), endpoint=False).tolist()
    for label,values in radar_values(report).items():
        axes.plot(angles + angles[:1], values + values[:1], linewidth=1.5, label=label)
        axes.fill(angles + angles[:1], values + values[:1], alpha=0.15)
    axes.set_xticks(angles)
    axes.set_xticklabels([title for _,title in RADAR_AXES], fontsize=8)
    axes.set_ylim(0, 1)
    axes.legend(loc="upper right", fontsize=8)
    return save_svg(figure, path)


if __name__ == "__main__":
    import doctest, sys
    logger.addHandler(logging.StreamHandler(sys.stdout))
    logger.setLevel(logging.INFO)
    print(doctest.testmod())
