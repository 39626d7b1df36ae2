"""
Test reading and writing test corpora.

Programmer: cellpyx team
Since:  2024-05
"""

import json

import pytest

import numpy as np

from cellpyx.cells import CellSpec
from cellpyx.timeseries import TimeSeries, Dataset
from cellpyx.ingest import Manifest, ingest, read_series_csv, write_corpus, MANIFEST_NAME

NUM_OF_RANDOM_INSTANCES=10
SPEC = CellSpec(capacity_Q=50.0, v_min=2.5, v_max=3.65)


def random_dataset(rng, dataset_id:str, role:str) -> Dataset:
    n = int(rng.integers(10, 50))
    series = TimeSeries(
        time=np.arange(n, dtype=float), current=rng.uniform(-50, 50, n),
        temperature=np.full(n, 25.0), voltage=rng.uniform(3.0, 3.4, n))
    return Dataset(dataset_id, role, 25.0, "drive-cycle", series, initial_soc=0.8)


def write_manifest(directory, datasets:list):
    data = {"schema_version": 1, "cell": SPEC.to_dict(), "datasets": datasets}
    path = directory / MANIFEST_NAME
    path.write_text(json.dumps(data))
    return path


CSV_HEADER = "time_s,current_a,voltage_v,temperature_c\n"


def test_corpus_round_trip(tmp_path):
    for i in range(NUM_OF_RANDOM_INSTANCES):
        rng = np.random.default_rng(i)
        datasets = [random_dataset(rng, "a", "calibration"), random_dataset(rng, "b", "validation")]
        manifest_path = write_corpus(datasets, SPEC, tmp_path / f"corpus{i}")
        result = ingest(manifest_path)
        assert result.errors == []
        assert result.role_counts == {"calibration": 1, "validation": 1}
        assert result.spec == SPEC
        for written,loaded in zip(datasets, result.datasets):
            assert loaded.id == written.id
            assert loaded.initial_soc == written.initial_soc
            assert np.allclose(loaded.series.current, written.series.current, rtol=1e-8)
            assert np.allclose(loaded.series.voltage, written.series.voltage, rtol=1e-8)


def test_repeated_timestamp_is_rejected_with_its_row(tmp_path):
    (tmp_path / "good.csv").write_text(CSV_HEADER + "0,0,3.3,25\n1,5,3.29,25\n2,5,3.28,25\n")
    (tmp_path / "bad.csv").write_text(CSV_HEADER + "0,0,3.3,25\n1,5,3.29,25\n1,5,3.28,25\n2,5,3.27,25\n")
    entry = lambda i, f: {"id": i, "file": f, "role": "calibration", "ambient_temp_C": 25.0, "profile_kind": "multi-step"}
    manifest_path = write_manifest(tmp_path, [entry("good", "good.csv"), entry("bad", "bad.csv")])
    before = (tmp_path / "bad.csv").read_bytes()
    result = ingest(manifest_path)
    assert [dataset.id for dataset in result.datasets] == ["good"]
    assert len(result.errors) == 1
    error = result.errors[0]
    assert error.dataset_id == "bad"
    assert error.reason == "non-monotone time"
    assert error.row == 2
    assert result.role_counts == {"calibration": 1, "validation": 0}
    assert list(result.error_frame().columns) == ["dataset_id", "file", "reason", "row"]
    assert (tmp_path / "bad.csv").read_bytes() == before


def test_non_finite_value_is_rejected(tmp_path):
    path = tmp_path / "nan.csv"
    path.write_text(CSV_HEADER + "0,0,3.3,25\n1,nan,3.29,25\n2,5,3.28,25\n")
    with pytest.raises(ValueError, match="non-finite value at row 1"):
        read_series_csv(path)


def test_missing_column_is_rejected(tmp_path):
    path = tmp_path / "short.csv"
    path.write_text("time_s,current_a,voltage_v\n0,0,3.3\n1,5,3.29\n")
    with pytest.raises(ValueError, match="header lacks"):
        read_series_csv(path)


def test_manifest_errors_are_fatal(tmp_path):
    (tmp_path / "a.csv").write_text(CSV_HEADER + "0,0,3.3,25\n1,5,3.29,25\n")
    entry = {"id": "a", "file": "a.csv", "role": "calibration", "ambient_temp_C": 25.0, "profile_kind": "multi-step"}
    with pytest.raises(ValueError, match="duplicate dataset ids"):
        ingest(write_manifest(tmp_path, [entry, entry]))
    with pytest.raises(ValueError, match="not found"):
        ingest(write_manifest(tmp_path, [{**entry, "file": "missing.csv"}]))
    with pytest.raises(ValueError, match="role must be one of"):
        ingest(write_manifest(tmp_path, [{**entry, "role": "training"}]))
    with pytest.raises(ValueError, match="missing field"):
        ingest(write_manifest(tmp_path, [{key: value for key,value in entry.items() if key != "role"}]))
    path = tmp_path / "old.json"
    path.write_text(json.dumps({"schema_version": 0, "cell": SPEC.to_dict(), "datasets": []}))
    with pytest.raises(ValueError, match="unsupported schema version 0"):
        Manifest.load(path)


if __name__ == "__main__":
     pytest.main(["-v",__file__])
