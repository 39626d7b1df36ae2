"""
Adaptor functions that run either model on datasets with convenient inputs:
a model kind and parameter object, or a persisted model document.

Programmer: cellpyx team
Since: 2024-05
"""

import numpy as np
from scipy.optimize import brentq

from cellpyx.cells import CellSpec, REFERENCE_CELL
from cellpyx.parameters import PbmParams, EcmParams, ModelDocument
from cellpyx.hysteresis import HysteresisParams
from cellpyx.models.pbm import PbmModel
from cellpyx.models.ecm import EcmModel
from cellpyx.models.simulation import SimulationResult, run_simulation
from cellpyx.accuracy import AccuracyReport, dataset_accuracy
from cellpyx.timeseries import Dataset
from cellpyx.run_loggers import RunLogger

import logging
logger = logging.getLogger(__name__)

MODEL_KINDS = ("pbm", "ecm")


def build_model(kind:str, params, spec:CellSpec=REFERENCE_CELL, hysteresis:HysteresisParams=None):
    """
    >>> from cellpyx.parameters import reference_ecm_params
    >>> build_model("ecm", reference_ecm_params()).kind
    'ecm'
    >>> build_model("spm", None)
    Traceback (most recent call last):
    ...
    ValueError: build_model: model kind must be one of ('pbm', 'ecm'), got 'spm'.
    """
    if kind == "pbm":
        if not isinstance(params, PbmParams):
            raise ValueError(f"build_model: a pbm model needs PbmParams, got {type(params).__name__}.")
        return PbmModel(params, spec, hysteresis)
    if kind == "ecm":
        if not isinstance(params, EcmParams):
            raise ValueError(f"build_model: an ecm model needs EcmParams, got {type(params).__name__}.")
        return EcmModel(params, spec, hysteresis)
    raise ValueError(f"build_model: model kind must be one of {MODEL_KINDS}, got {kind!r}.")


def model_from_document(document:ModelDocument):
    return build_model(document.kind, document.params, document.spec, document.hysteresis)


def _equilibrium_voltage(model, soc:float, temp_c:float) -> float:
    if isinstance(model, EcmModel):
        return model.params.ocv(soc, temp_c)
    return model.params.open_circuit_voltage(soc)


def initial_soc(dataset:Dataset, model) -> float:
    """
    The dataset's initial SOC, or, when it is not recorded, the SOC whose
    equilibrium voltage matches the first measured voltage (clamped to [0,1]).

    >>> from cellpyx.parameters import reference_ecm_params
    >>> from cellpyx.timeseries import TimeSeries
    >>> model = build_model("ecm", reference_ecm_params())
    >>> series = TimeSeries.constant(5, 0.0, 25.0)
    >>> series = series.with_voltage(np.full(len(series), model.params.ocv(0.55, 25.0)))
    >>> round(initial_soc(Dataset("d", "validation", 25.0, "constant-rate", series), model), 6)
    0.55
    """
    if dataset.initial_soc is not None:
        return dataset.initial_soc
    if dataset.series.voltage is None:
        raise ValueError(f"{dataset.id}: neither an initial SOC nor a measured voltage is available.")
    voltage, temp_c = float(dataset.series.voltage[0]), float(dataset.series.temperature[0])
    gap = lambda soc: _equilibrium_voltage(model, soc, temp_c) - voltage
    low, high = gap(0.0), gap(1.0)
    if low >= 0:
        return 0.0
    if high <= 0:
        return 1.0
    soc = brentq(gap, 0.0, 1.0, xtol=1e-12)
    logger.info("%s: initial SOC %.4f estimated from the first voltage %.4f V", dataset.id, soc, voltage)
    return float(soc)


def simulate(model, dataset:Dataset, soc0:float=None, run_logger:RunLogger=None) -> SimulationResult:
    """ Drive the model over the dataset's profile. """
    if soc0 is None:
        soc0 = initial_soc(dataset, model)
    result = run_simulation(model, dataset.series, soc0, kind=model.kind, dataset_id=dataset.id)
    if run_logger is not None and not result.completed:
        run_logger.warning("Simulation stopped at sample %d: %s", result.aborted_at, result.abort_reason, datasets=dataset.id)
    return result


def simulate_all(model, datasets:list, run_logger:RunLogger=None) -> list:
    return [simulate(model, dataset, run_logger=run_logger) for dataset in datasets]


def evaluate_accuracy(model, datasets:list, run_logger:RunLogger=None, results:list=None) -> AccuracyReport:
    """ Simulate every dataset (unless results are given) and collect the accuracy report. """
    if results is None:
        results = simulate_all(model, datasets, run_logger)
    report = AccuracyReport(model.kind, [dataset_accuracy(result, dataset) for result,dataset in zip(results, datasets)])
    if run_logger is not None:
        run_logger.explain_accuracy(report)
    return report


if __name__ == "__main__":
    import doctest, sys
    logger.addHandler(logging.StreamHandler(sys.stdout))
    logger.setLevel(logging.INFO)
    print(doctest.testmod())
