"""
Test the model comparison reports and plots.

Programmer: cellpyx team
Since:  2024-05
"""

import json

import pytest

import numpy as np

from cellpyx.parameters import reference_ecm_params, reference_pbm_params
from cellpyx.timeseries import TimeSeries
from cellpyx.adaptors import build_model
from cellpyx.synthetic import simulated_dataset
from cellpyx.reports import compare, plot_radar, radar_values, tunable_parameter_count

NUM_OF_RANDOM_INSTANCES=10


def validation_datasets(truth, n:int=3) -> list:
    datasets = []
    for i in range(n):
        profile = TimeSeries.concatenate([
            TimeSeries.constant(120, 40.0 + 10*i, 25.0), TimeSeries.constant(60, 0.0, 25.0)])
        datasets.append(simulated_dataset(truth, f"v{i}", "validation", "multi-step", 25.0, profile, 0.4 + 0.1*i))
    return datasets


def test_tunable_parameter_counts():
    assert tunable_parameter_count("pbm", reference_pbm_params()) == 72
    assert tunable_parameter_count("ecm", reference_ecm_params()) == 330


def test_model_against_itself_has_zero_deltas():
    model = build_model("ecm", reference_ecm_params())
    report = compare(model, model, validation_datasets(model))
    assert report.labels == ["ecm", "ecm_2"]
    for name,delta in report.deltas().items():
        assert delta == 0, name
    assert report.n_parameters == {"ecm": 330, "ecm_2": 330}


def test_comparison_files(tmp_path):
    ecm = build_model("ecm", reference_ecm_params())
    pbm = build_model("pbm", reference_pbm_params())
    datasets = validation_datasets(ecm)
    report = compare(pbm, ecm, datasets, step_ms={"pbm": 1.0, "ecm": 0.01}, out_dir=tmp_path)
    assert report.labels == ["pbm", "ecm"]
    assert list(report.per_dataset().index) == [dataset.id for dataset in datasets]
    assert list(report.per_dataset().columns) == ["pbm", "ecm"]
    assert (report.per_dataset()["ecm"] == 0).all()
    deltas = report.deltas()
    assert deltas["n_parameters"] == 72 - 330
    assert deltas["step_ms"] == pytest.approx(0.99)
    assert deltas["overall_rmse_V"] > 0
    for name in ("comparison.json", "comparison_summary.csv", "comparison_per_dataset.csv", "plots/radar.svg"):
        assert (tmp_path / name).is_file(), name
    for dataset in datasets:
        assert (tmp_path / "plots" / f"overlay_{dataset.id}.svg").is_file()
    saved = json.loads((tmp_path / "comparison.json").read_text())
    assert saved["models"]["ecm"]["n_parameters"] == 330
    assert saved["datasets"] == [dataset.id for dataset in datasets]


def test_unmeasured_step_time_is_null(tmp_path):
    model = build_model("ecm", reference_ecm_params())
    report = compare(model, model, validation_datasets(model, n=1))
    assert "step_ms" not in report.deltas()
    report.save(tmp_path)
    saved = json.loads((tmp_path / "comparison.json").read_text())
    assert saved["models"]["ecm"]["step_ms"] is None


def test_radar_is_normalized():
    ecm = build_model("ecm", reference_ecm_params())
    pbm = build_model("pbm", reference_pbm_params())
    report = compare(pbm, ecm, validation_datasets(ecm), step_ms={"pbm": 2.0, "ecm": 0.5})
    values = radar_values(report)
    for axis in range(5):
        column = [values["pbm"][axis], values["ecm"][axis]]
        assert all(0 <= value <= 1 for value in column)
        assert max(column) in (0.0, 1.0)
    assert values["pbm"][3] == 1.0 and values["ecm"][3] == 0.25
    assert values["ecm"][4] == 1.0


def test_svg_is_deterministic(tmp_path):
    ecm = build_model("ecm", reference_ecm_params())
    report = compare(ecm, ecm, validation_datasets(ecm, n=1), step_ms={"ecm": 0.01})
    first = plot_radar(report, tmp_path / "first.svg").read_bytes()
    second = plot_radar(report, tmp_path / "second.svg").read_bytes()
    assert first == second
    assert first.lstrip().startswith(b"<?xml")


if __name__ == "__main__":
     pytest.main(["-v",__file__])
