"""
Test the parameter sets, their identification vectors and the model document.

Programmer: cellpyx team
Since:  2024-05
"""

import json

import pytest

import numpy as np

from cellpyx.cells import CellSpec, REFERENCE_CELL
from cellpyx.hysteresis import reference_hysteresis_params
from cellpyx.parameters import (
    PbmParams, EcmParams, ModelDocument, reference_pbm_params, reference_ecm_params,
    soc_from_bulk_concentration,
)

NUM_OF_RANDOM_INSTANCES=10


def test_parameter_counts():
    assert len(PbmParams.vector_names()) == 72
    assert len(set(PbmParams.vector_names())) == 72
    assert len(EcmParams.vector_names()) == 330
    assert EcmParams.vector_names(include_extras=True)[-1] == "eta_charge"
    assert reference_pbm_params().to_vector().shape == (72,)
    assert reference_ecm_params().to_vector().shape == (330,)


def test_pbm_with_vector_replaces_values():
    params = reference_pbm_params()
    for i in range(NUM_OF_RANDOM_INSTANCES):
        rng = np.random.default_rng(i)
        vector = params.to_vector() * rng.uniform(0.9, 1.1, 72)
        # the thicknesses and windows set the derived positive window; keep them
        vector[1:4] = params.to_vector()[1:4]
        vector[7:10] = params.to_vector()[7:10]
        changed = params.with_vector(vector)
        assert np.allclose(changed.to_vector(), vector, rtol=1e-15)
        assert changed.ocp_p is params.ocp_p


def test_ecm_with_vector_replaces_values():
    params = reference_ecm_params()
    for i in range(NUM_OF_RANDOM_INSTANCES):
        rng = np.random.default_rng(i)
        vector = params.to_vector() * rng.uniform(0.5, 2.0, 330)
        assert np.array_equal(params.with_vector(vector).to_vector(), vector)
    with pytest.raises(ValueError, match="expected 330 or 331"):
        params.with_vector(np.ones(12))


def test_soc_from_bulk_concentration_inverts():
    params = reference_pbm_params()
    for soc in (0.0, 0.2, 0.55, 1.0):
        c_bulk = params.theta_n(soc) * params.c_s_max_n
        assert soc_from_bulk_concentration(c_bulk, params) == pytest.approx(soc, abs=1e-12)


def test_pbm_document_round_trip(tmp_path):
    spec = CellSpec(capacity_Q=120.0, v_min=2.6, v_max=3.6)
    document = ModelDocument("pbm", spec, reference_pbm_params(), reference_hysteresis_params())
    path = tmp_path / "pbm.json"
    document.save(path)
    loaded = ModelDocument.load(path)
    assert loaded.kind == "pbm"
    assert loaded.spec == spec
    assert np.array_equal(loaded.params.to_vector(), document.params.to_vector())
    for soc in (0.1, 0.5, 0.9):
        assert loaded.params.open_circuit_voltage(soc) == pytest.approx(document.params.open_circuit_voltage(soc), abs=1e-12)
    assert loaded.hysteresis.gamma == document.hysteresis.gamma


def test_ecm_document_round_trip(tmp_path):
    document = ModelDocument("ecm", REFERENCE_CELL, reference_ecm_params(), reference_hysteresis_params())
    path = tmp_path / "ecm.json"
    document.save(path)
    loaded = ModelDocument.load(path)
    assert np.array_equal(loaded.params.to_vector(include_extras=True), document.params.to_vector(include_extras=True))
    assert np.allclose(loaded.params.ocv.ocv, document.params.ocv.ocv)


def test_document_rejects_other_schema_versions(tmp_path):
    data = ModelDocument("ecm", REFERENCE_CELL, reference_ecm_params(), reference_hysteresis_params()).to_dict()
    data["schema_version"] = 2
    path = tmp_path / "future.json"
    path.write_text(json.dumps(data))
    with pytest.raises(ValueError, match="unsupported schema version 2"):
        ModelDocument.load(path)


def test_document_rejects_unknown_kind():
    with pytest.raises(ValueError, match="kind must be"):
        ModelDocument("spm", REFERENCE_CELL, reference_ecm_params(), reference_hysteresis_params())


if __name__ == "__main__":
     pytest.main(["-v",__file__])
