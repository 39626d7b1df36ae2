"""
Test the identification cost, calibration and validation.

Programmer: cellpyx team
Since:  2024-05
"""

import json

import pytest

import numpy as np

from cellpyx.cells import REFERENCE_CELL
from cellpyx.parameters import EcmParams, ModelDocument, reference_ecm_params, reference_pbm_params
from cellpyx.timeseries import TimeSeries, Dataset
from cellpyx.adaptors import build_model, simulate
from cellpyx.synthetic import simulated_dataset
from cellpyx.identify import PsoConfig, default_search_space
from cellpyx.identify.calibration import (
    ABORT_PENALTY_PER_SAMPLE, CalibrationObjective, calibrate, calibrate_staged, cost, dataset_cost, full_miss_penalty, validate,
)

NUM_OF_RANDOM_INSTANCES=10
NODE = "R0_ohm_soc0.5_T25"


def pulse_profile(current:float=50.0, temp_c:float=25.0) -> TimeSeries:
    return TimeSeries.concatenate([
        TimeSeries.constant(60, current, temp_c), TimeSeries.constant(30, 0.0, temp_c),
        TimeSeries.constant(60, -current, temp_c)])


def truth_ecm() -> EcmParams:
    names = EcmParams.vector_names(include_extras=True)
    base = reference_ecm_params()
    vector = base.to_vector(include_extras=True)
    vector[names.index(NODE)] *= 1.4
    return base.with_vector(vector)


def ecm_dataset(params:EcmParams, dataset_id:str="pulse", role:str="calibration", soc0:float=0.5) -> Dataset:
    model = build_model("ecm", params)
    return simulated_dataset(model, dataset_id, role, "multi-step", 25.0, pulse_profile(), soc0)


def test_cost_is_zero_at_the_truth():
    truth = build_model("ecm", truth_ecm())
    datasets = [ecm_dataset(truth_ecm(), f"d{i}", soc0=0.3 + 0.05*i) for i in range(4)]
    assert cost(truth, datasets) == 0.0


def test_cost_is_order_independent():
    model = build_model("ecm", reference_ecm_params())
    datasets = [ecm_dataset(truth_ecm(), f"d{i}", soc0=0.3 + 0.05*i) for i in range(4)]
    assert cost(model, datasets) == cost(model, datasets[::-1])
    assert cost(model, datasets) > 0


def test_abort_penalty_counts_missing_samples():
    model = build_model("pbm", reference_pbm_params())
    profile = TimeSeries.constant(1200, REFERENCE_CELL.c_rate_current(1.0), 25.0)
    series = profile.with_voltage(np.full(len(profile), 3.2))
    dataset = Dataset("deep", "calibration", 25.0, "constant-rate", series, initial_soc=0.1)
    result = simulate(model, dataset)
    assert not result.completed
    expected = result.rmse(series) + ABORT_PENALTY_PER_SAMPLE * (len(series) - result.n_completed)
    assert dataset_cost(result, dataset) == pytest.approx(expected, rel=1e-12)
    assert full_miss_penalty([dataset]) == pytest.approx(ABORT_PENALTY_PER_SAMPLE * len(series))


def test_dataset_costs_sum_to_the_best_cost_when_a_run_aborts():
    base = reference_pbm_params()
    current = REFERENCE_CELL.c_rate_current(1.0)
    deep = TimeSeries.constant(1200, current, 25.0)
    shallow = TimeSeries.constant(300, current, 25.0)
    datasets = [
        Dataset("deep", "calibration", 25.0, "constant-rate", deep.with_voltage(np.full(len(deep), 3.2)), initial_soc=0.1),
        Dataset("shallow", "calibration", 25.0, "constant-rate", shallow.with_voltage(np.full(len(shallow), 3.3)), initial_soc=0.6),
    ]
    space = default_search_space(base.vector_names(), base.to_vector(), free_patterns=["R_c_ohm"])
    result = calibrate("pbm", datasets, base, space, PsoConfig(n_particles=3, max_iterations=1, random_seed=0))
    assert sorted(result.dataset_cost) == ["deep", "shallow"]
    assert sum(result.dataset_cost.values()) == pytest.approx(result.best_cost, rel=1e-12)
    assert result.dataset_cost["deep"] >= result.dataset_rmse["deep"] + ABORT_PENALTY_PER_SAMPLE
    assert result.dataset_cost["shallow"] == pytest.approx(result.dataset_rmse["shallow"], rel=1e-9)
    assert list(result.rmse_frame().columns) == ["dataset_id", "rmse_v", "cost_v"]


def test_invalid_vector_costs_the_full_penalty():
    datasets = [ecm_dataset(truth_ecm())]
    objective = CalibrationObjective("ecm", reference_ecm_params(), datasets)
    vector = reference_ecm_params().to_vector(include_extras=True)
    vector[0] = -1.0
    assert objective(vector) == full_miss_penalty(datasets)
    assert objective(reference_ecm_params().to_vector(include_extras=True)) < full_miss_penalty(datasets)


def test_ecm_calibration_recovers_one_node(tmp_path):
    names = EcmParams.vector_names(include_extras=True)
    base = reference_ecm_params()
    space = default_search_space(names, base.to_vector(include_extras=True), free_patterns=[NODE])
    datasets = [ecm_dataset(truth_ecm(), "pulse_a", soc0=0.5), ecm_dataset(truth_ecm(), "pulse_b", soc0=0.52)]
    config = PsoConfig(n_particles=10, max_iterations=40, random_seed=0)
    result = calibrate("ecm", datasets, base, space, config, out_dir=tmp_path)
    index = names.index(NODE)
    truth_value = truth_ecm().to_vector(include_extras=True)[index]
    assert result.best_params[index] == pytest.approx(truth_value, rel=0.01)
    assert result.best_cost < 1e-4
    assert sorted(result.dataset_rmse) == ["pulse_a", "pulse_b"]

    document = ModelDocument.load(tmp_path / "model_ecm.json")
    assert np.array_equal(document.params.to_vector(include_extras=True), result.best_params)
    saved = json.loads((tmp_path / "calibration_ecm.json").read_text())
    assert saved["random_seed"] == 0
    assert (tmp_path / "calibration_ecm_history.csv").is_file()


def test_calibration_is_reproducible():
    names = EcmParams.vector_names(include_extras=True)
    base = reference_ecm_params()
    space = default_search_space(names, base.to_vector(include_extras=True), free_patterns=[NODE])
    datasets = [ecm_dataset(truth_ecm())]
    config = PsoConfig(n_particles=5, max_iterations=5, random_seed=3)
    first = calibrate("ecm", datasets, base, space, config)
    second = calibrate("ecm", datasets, base, space, config)
    assert np.array_equal(first.best_params, second.best_params)
    assert first.history == second.history


def test_calibration_needs_calibration_datasets():
    with pytest.raises(ValueError):
        calibrate("ecm", [ecm_dataset(truth_ecm(), role="validation")], reference_ecm_params())


def test_validation_report(tmp_path):
    datasets = [ecm_dataset(truth_ecm(), f"v{i}", role="validation", soc0=0.4 + 0.1*i) for i in range(3)]
    report = validate("ecm", truth_ecm(), datasets, out_dir=tmp_path)
    assert report.dataset_ids == ["v0", "v1", "v2"]
    assert report.overall_rmse == 0.0
    assert report.aborted == []
    assert (tmp_path / "validation_ecm.csv").is_file()
    assert (tmp_path / "diagnostics" / "ecm_v1.csv").is_file()
    summary = json.loads((tmp_path / "validation_ecm.json").read_text())
    assert summary["schema_version"] == 1


def test_staged_calibration_is_for_the_physics_model():
    datasets = [ecm_dataset(truth_ecm())]
    with pytest.raises(ValueError, match="applies to the pbm model"):
        calibrate_staged("ecm", datasets, reference_ecm_params())


if __name__ == "__main__":
     pytest.main(["-v",__file__])
