"""
The multi-dataset identification cost and the calibrate / validate drivers.

The cost of a parameter vector is the sum over datasets of the voltage RMSE:

    cost = sum_i sqrt( sum_t (V_i(t) - V^_i(t))^2 / N_i )

A simulation that leaves the model's valid region ends early; such a dataset
contributes the RMSE over the samples it completed plus a fixed penalty for
every sample it did not reach. Parameter vectors that do not even form a
valid parameter set cost as much as a run that misses every sample.

Programmer: cellpyx team
Since: 2024-05
"""

import json
import math
import pathlib

import numpy as np

from cellpyx.cells import CellSpec, REFERENCE_CELL
from cellpyx.parameters import PbmParams, EcmParams, ModelDocument
from cellpyx.hysteresis import HysteresisParams
from cellpyx.timeseries import datasets_with_role
from cellpyx.adaptors import build_model, initial_soc, simulate, evaluate_accuracy
from cellpyx.accuracy import AccuracyReport
from cellpyx.identify.search_space import SearchSpace, default_search_space
from cellpyx.identify.pso import PsoConfig, IdentificationResult, run_pso
from cellpyx.run_loggers import RunLogger

import logging
logger = logging.getLogger(__name__)

ABORT_PENALTY_PER_SAMPLE = 1e-3     # V per sample not simulated
STAGE_SEGMENTS = ("seg1", "seg2", "seg3", "seg4", "seg5")


class AllDatasetsAbortedError(RuntimeError):
    """ Every dataset's simulation failed before its first sample. """


def dataset_cost(result, dataset) -> float:
    """
    RMSE over the completed samples plus the penalty for the missing ones.
    """
    if result.n_completed == 0:
        return ABORT_PENALTY_PER_SAMPLE * result.n_expected
    return result.rmse(dataset.series) + ABORT_PENALTY_PER_SAMPLE * result.n_missing


def full_miss_penalty(datasets:list) -> float:
    return ABORT_PENALTY_PER_SAMPLE * sum(len(dataset.series) for dataset in datasets)


def dataset_costs(model, datasets:list, socs:list=None) -> list:
    """
    Per-dataset costs, in the order of `datasets`.

    Raises AllDatasetsAbortedError if no dataset produced a single sample.
    """
    if not datasets:
        raise ValueError("cost: no datasets given.")
    if socs is None:
        socs = [initial_soc(dataset, model) for dataset in datasets]
    results = [simulate(model, dataset, soc0) for dataset,soc0 in zip(datasets, socs)]
    if all(result.n_completed == 0 for result in results):
        raise AllDatasetsAbortedError(f"all {len(datasets)} simulations aborted before the first sample: {results[0].abort_reason}")
    return [dataset_cost(result, dataset) for result,dataset in zip(results, datasets)]


def cost(model, datasets:list, socs:list=None) -> float:
    """
    The summed RMSE cost of a model over datasets (V).

    >>> from cellpyx.parameters import reference_ecm_params
    >>> from cellpyx.timeseries import TimeSeries, Dataset
    >>> model = build_model("ecm", reference_ecm_params())
    >>> series = TimeSeries.constant(20, 0.0, 25.0)
    >>> ocv = model.params.ocv(0.5, 25.0)
    >>> offset = Dataset("d", "calibration", 25.0, "constant-rate", series.with_voltage(np.full(len(series), ocv + 0.010)), initial_soc=0.5)
    >>> round(cost(model, [offset]), 12)
    0.01
    """
    # fsum makes the total independent of the dataset order
    return math.fsum(dataset_costs(model, datasets, socs))


class CalibrationObjective:
    """
    The cost as a function of the identification vector, for the swarm.
    Initial SOCs are fixed once from the base model so that they do not move
    with the candidate parameters.
    """

    def __init__(self, kind:str, base_params, datasets:list, spec:CellSpec=REFERENCE_CELL, hysteresis:HysteresisParams=None):
        self.kind = kind
        self.base_params = base_params
        self.spec = spec
        self.hysteresis = hysteresis
        self.datasets = list(datasets)
        base_model = build_model(kind, base_params, spec, hysteresis)
        self.socs = [initial_soc(dataset, base_model) for dataset in self.datasets]
        self.penalty = full_miss_penalty(self.datasets)

    def params(self, vector):
        return self.base_params.with_vector(vector)

    def model(self, vector):
        return build_model(self.kind, self.params(vector), self.spec, self.hysteresis)

    def __call__(self, vector) -> float:
        try:
            model = self.model(vector)
        except ValueError as err:
            logger.debug("Invalid parameter vector: %s", err)
            return self.penalty
        try:
            return cost(model, self.datasets, self.socs)
        except AllDatasetsAbortedError:
            return self.penalty
        except ValueError as err:
            # e.g. an OCP evaluated outside its table for an extreme stoichiometry window
            logger.debug("Simulation failed: %s", err)
            return self.penalty


def base_vector(kind:str, params) -> tuple:
    """ Names and values of the identification vector of a parameter set. """
    if kind == "pbm":
        return PbmParams.vector_names(), params.to_vector()
    return (EcmParams.vector_names(params.soc_grid, params.temp_grid, include_extras=True),
            params.to_vector(include_extras=True))


def calibrate(kind:str, datasets:list, base_params, space:SearchSpace=None, config:PsoConfig=None,
              spec:CellSpec=REFERENCE_CELL, hysteresis:HysteresisParams=None, out_dir=None,
              run_logger:RunLogger=None) -> IdentificationResult:
    """
    Identify the parameters of one model on the calibration datasets.

    :param base_params: the starting parameter set; parameters that are not free keep its values.
    :param space: the search space over the identification vector (default: the shipped bound rules around base_params).
    :param out_dir: if given, the result JSON, the cost history CSV and the calibrated model JSON are written there.
    :return: the PSO result, with the per-dataset RMSE and cost (RMSE plus abort penalty) of the best parameters.
    """
    datasets = datasets_with_role(datasets, "calibration", title="calibrate")
    config = config or PsoConfig()
    names, values = base_vector(kind, base_params)
    space = space or default_search_space(names, values)
    if space.names != tuple(names):
        raise ValueError(f"calibrate: the search space has {space.dimension} parameters, but the {kind} vector has {len(names)}.")
    run_logger = run_logger or RunLogger()
    run_logger.explain_datasets(datasets)
    logger.info("Calibrating the %s model: %d datasets, %d free parameters, %d particles x %d iterations",
                kind, len(datasets), space.n_free, config.n_particles, config.max_iterations)

    objective = CalibrationObjective(kind, base_params, datasets, spec, hysteresis)
    # fails loudly when even the base parameters cannot simulate anything
    cost(objective.model(space.base), datasets, objective.socs)
    result = run_pso(space, config, objective, kind=kind)

    best_model = objective.model(result.best_params)
    results = [simulate(best_model, dataset, soc0) for dataset,soc0 in zip(datasets, objective.socs)]
    report = evaluate_accuracy(best_model, datasets, run_logger, results)
    result.dataset_rmse = {row.dataset_id: row.rmse for row in report.rows}
    result.dataset_cost = {dataset.id: dataset_cost(run, dataset) for run,dataset in zip(results, datasets)}
    if out_dir is not None:
        out_dir = pathlib.Path(out_dir)
        result.save(out_dir, stem=f"calibration_{kind}")
        report.to_frame().to_csv(out_dir / f"calibration_{kind}_rmse.csv", index=False)
        ModelDocument(kind, spec, best_model.params, best_model.hysteresis).save(out_dir / f"model_{kind}.json")
    return result


def calibrate_staged(kind:str, datasets:list, base_params, space:SearchSpace=None, config:PsoConfig=None,
                     spec:CellSpec=REFERENCE_CELL, hysteresis:HysteresisParams=None, out_dir=None,
                     run_logger:RunLogger=None) -> list:
    """
    Physics-model calibration in stages: first the temperature-independent
    scalars, then one stage per Arrhenius segment, each starting from the
    best vector of the previous stage. Returns the result of every stage.
    """
    if kind != "pbm":
        raise ValueError(f"calibrate_staged: staged calibration applies to the pbm model, got {kind!r}.")
    names, values = base_vector(kind, base_params)
    space = space or default_search_space(names, values)
    scalar_names = [name for name in names if "_seg" not in name]
    stages = [scalar_names] + [[f"*_{segment}_*"] for segment in STAGE_SEGMENTS]
    results, params = [], base_params
    for index,patterns in enumerate(stages):
        stage_space = space.restrict(patterns, base=params.to_vector())
        logger.info("Stage %d of %d: %d free parameters", index + 1, len(stages), stage_space.n_free)
        stage_dir = None if out_dir is None else pathlib.Path(out_dir) / f"stage{index + 1}"
        result = calibrate(kind, datasets, params, stage_space, config, spec, hysteresis, stage_dir, run_logger)
        params = params.with_vector(result.best_params)
        results.append(result)
    return results


def validate(kind:str, params, datasets:list, spec:CellSpec=REFERENCE_CELL, hysteresis:HysteresisParams=None,
             out_dir=None, run_logger:RunLogger=None) -> AccuracyReport:
    """
    Simulate each validation dataset and report the RMSE per dataset, at low
    SOC and at low temperature. Aborted simulations are reported with their
    abort step. If out_dir is given, each dataset's diagnostics are written
    to `<out_dir>/diagnostics/<kind>_<id>.csv`, with the report CSV and JSON beside them.
    """
    datasets = datasets_with_role(datasets, "validation", title="validate")
    model = build_model(kind, params, spec, hysteresis)
    run_logger = run_logger or RunLogger()
    run_logger.explain_datasets(datasets)
    results = [simulate(model, dataset, run_logger=run_logger) for dataset in datasets]
    report = evaluate_accuracy(model, datasets, run_logger, results)
    if out_dir is not None:
        out_dir = pathlib.Path(out_dir)
        for result,dataset in zip(results, datasets):
            result.to_csv(out_dir / "diagnostics" / f"{kind}_{dataset.id}.csv", measured=dataset.series)
        write_report(report, out_dir, stem=f"validation_{kind}")
    logger.info("Validation of the %s model: average RMSE %.2f mV over %d datasets",
                kind, 1000*report.overall_rmse, len(datasets))
    return report


def write_report(report:AccuracyReport, out_dir, stem:str):
    out_dir = pathlib.Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report.to_frame().to_csv(out_dir / f"{stem}.csv", index=False)
    summary = {"schema_version": 1, **report.summary()}
    (out_dir / f"{stem}.json").write_text(json.dumps(summary, indent=2, default=_json_default))


def _json_default(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


if __name__ == "__main__":
    import doctest, sys
    logger.addHandler(logging.StreamHandler(sys.stdout))
    logger.setLevel(logging.INFO)
    print(doctest.testmod())
