"""
Test the command-line interface.

Programmer: cellpyx team
Since:  2024-05
"""

import json

import pytest

from cellpyx.cells import REFERENCE_CELL
from cellpyx.parameters import ModelDocument, reference_ecm_params
from cellpyx.hysteresis import HysteresisParams
from cellpyx.cli import EXIT_INVALID, EXIT_OK, main

SYNTH_CONFIG = {
    "schema_version": 1,
    "kind": "ecm",
    "plan": {"temperatures": [25.0], "c_rates": [2.0], "drive_cycles": ["us06"], "multi_step": False,
             "soc_window": 0.02, "drive_cycle_repeats": 1},
    "noise_sigma_V": 0.0005,
    "seed": 1,
}


def write_config(path, data:dict):
    path.write_text(json.dumps(data))
    return path


@pytest.fixture
def corpus(tmp_path):
    config = write_config(tmp_path / "synth.json", SYNTH_CONFIG)
    assert main(["synth", "--config", str(config), "--out", str(tmp_path / "corpus")]) == EXIT_OK
    return tmp_path / "corpus"


def test_synth_then_ingest(tmp_path, corpus):
    assert (corpus / "manifest.json").is_file()
    assert (corpus / "truth.json").is_file()
    config = write_config(tmp_path / "ingest.json", {"schema_version": 1, "manifest": "corpus/manifest.json"})
    assert main(["ingest", "--config", str(config), "--out", str(tmp_path / "ingested")]) == EXIT_OK
    summary = json.loads((tmp_path / "ingested" / "ingest_summary.json").read_text())
    assert summary["loaded"] == ["cc2_25C", "us06_25C"]
    assert summary["role_counts"] == {"calibration": 1, "validation": 1}


def test_rejected_file_gives_exit_code_2(tmp_path, corpus):
    path = corpus / "cc2_25C.csv"
    lines = path.read_text().splitlines()
    lines.insert(3, lines[2])
    path.write_text("\n".join(lines) + "\n")
    config = write_config(tmp_path / "ingest.json", {"schema_version": 1, "manifest": "corpus/manifest.json"})
    assert main(["ingest", "--config", str(config), "--out", str(tmp_path / "ingested")]) == EXIT_INVALID
    summary = json.loads((tmp_path / "ingested" / "ingest_summary.json").read_text())
    assert summary["loaded"] == ["us06_25C"]
    assert summary["n_rejected"] == 1


def test_validate(tmp_path, corpus):
    model_path = tmp_path / "model_ecm.json"
    ModelDocument("ecm", REFERENCE_CELL, reference_ecm_params(), HysteresisParams.zero()).save(model_path)
    config = write_config(tmp_path / "validate.json",
                          {"schema_version": 1, "manifest": "corpus/manifest.json", "model": "model_ecm.json"})
    assert main(["validate", "--config", str(config), "--out", str(tmp_path / "validation")]) == EXIT_OK
    assert (tmp_path / "validation" / "validation_ecm.json").is_file()
    assert (tmp_path / "validation" / "diagnostics" / "ecm_us06_25C.csv").is_file()


def test_configuration_errors_give_exit_code_2(tmp_path):
    assert main(["ingest", "--out", str(tmp_path)]) == EXIT_INVALID
    config = write_config(tmp_path / "old.json", {"schema_version": 0})
    assert main(["ingest", "--config", str(config), "--out", str(tmp_path)]) == EXIT_INVALID
    config = write_config(tmp_path / "bench.json", {"schema_version": 1, "n_steps": 10})
    assert main(["bench", "--config", str(config), "--out", str(tmp_path)]) == EXIT_INVALID
    assert main(["ingest", "--config", str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == EXIT_INVALID


def test_calibrate_needs_a_model_kind():
    with pytest.raises(SystemExit):
        main(["calibrate"])


if __name__ == "__main__":
     pytest.main(["-v",__file__])
