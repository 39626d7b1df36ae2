"""
Command-line interface:

    python -m cellpyx <command> [--config run.json] [--out DIR] [-v|-vv]

Commands: ingest, synth, fit-hysteresis, calibrate, validate, compare, bench.
The run configuration is a JSON object with "schema_version": 1; paths in it
are relative to the configuration file. Exit code 0 on success, 2 on
validation errors (bad input, rejected data files), 1 on any other failure.

Configuration keys by command:

    ingest          manifest
    synth           kind, truth (model JSON), plan, noise_sigma_V, seed, pulse_temperatures, pulse_rest_s
    fit-hysteresis  manifest, pso, seed
    calibrate       manifest, base_model, hysteresis, pso, seed, search_space {free, extra_rules, rules}, staged
    validate        manifest, model
    compare         manifest, models [first, second], bench_steps
    bench           models, n_steps, repeats

Programmer: cellpyx team
Since: 2024-05
"""

import argparse
import json
import pathlib
import sys

from cellpyx.cells import REFERENCE_CELL
from cellpyx.parameters import (
    ModelDocument, check_schema_version, reference_pbm_params, reference_ecm_params,
)
from cellpyx.hysteresis import HysteresisParams, reference_hysteresis_params
from cellpyx.timeseries import datasets_with_role
from cellpyx.adaptors import MODEL_KINDS, model_from_document
from cellpyx.ingest import ingest, write_corpus
from cellpyx.synthetic import ProfilePlan, generate_synthetic, hysteresis_pulse_test
from cellpyx.characterization import build_hysteresis_map, fit_plett
from cellpyx.identify.pso import PsoConfig
from cellpyx.identify.calibration import base_vector, calibrate, calibrate_staged, validate
from cellpyx.identify.search_space import default_search_space
from cellpyx.reports import compare
from cellpyx.benchmark import benchmark_step_time, MIN_BENCH_STEPS
from cellpyx.run_loggers import SingleRunLogger

import logging
logger = logging.getLogger(__name__)

EXIT_OK, EXIT_FATAL, EXIT_INVALID = 0, 1, 2


class RunConfig:
    """
    A run configuration with paths resolved against its file.

    >>> RunConfig({"schema_version": 1, "seed": 3}).get("seed")
    3
    >>> RunConfig({"schema_version": 2})
    Traceback (most recent call last):
    ...
    ValueError: run config: unsupported schema version 2, expected 1.
    """

    def __init__(self, data:dict=None, base_dir=".", title:str="run config"):
        data = data or {"schema_version": 1}
        check_schema_version(data, title)
        self.data = data
        self.base_dir = pathlib.Path(base_dir)
        self.title = title

    @staticmethod
    def load(path=None) -> "RunConfig":
        if path is None:
            return RunConfig()
        path = pathlib.Path(path)
        try:
            data = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as err:
            raise ValueError(f"{path}: cannot read the run config: {err}") from err
        return RunConfig(data, path.parent, title=str(path))

    def get(self, key:str, default=None):
        return self.data.get(key, default)

    def path(self, key:str, required:bool=True) -> pathlib.Path:
        value = self.data.get(key)
        if value is None:
            if required:
                raise ValueError(f"{self.title}: missing {key!r}.")
            return None
        return self.base_dir / value

    def paths(self, key:str) -> list:
        return [self.base_dir / value for value in self.data.get(key, [])]

    def pso(self, **defaults) -> PsoConfig:
        settings = {**defaults, **self.data.get("pso", {})}
        if "seed" in self.data:
            settings["random_seed"] = int(self.data["seed"])
        return PsoConfig.from_dict(settings)


def load_hysteresis(path) -> HysteresisParams:
    """ Hysteresis parameters from a fit-hysteresis result or a bare parameter object. """
    data = json.loads(pathlib.Path(path).read_text())
    if "hysteresis" in data:
        check_schema_version(data, str(path))
        data = data["hysteresis"]
    return HysteresisParams.from_dict(data)


def _reference_document(kind:str) -> ModelDocument:
    params = reference_pbm_params() if kind == "pbm" else reference_ecm_params()
    return ModelDocument(kind, REFERENCE_CELL, params, reference_hysteresis_params())


def _write_json(path:pathlib.Path, data:dict):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2))


#### Commands; each returns an exit code.


def run_ingest(config:RunConfig, out:pathlib.Path, args) -> int:
    result = ingest(config.path("manifest"))
    out.mkdir(parents=True, exist_ok=True)
    result.error_frame().to_csv(out / "ingest_errors.csv", index=False)
    _write_json(out / "ingest_summary.json", {
        "schema_version": 1,
        "loaded": [dataset.id for dataset in result.datasets],
        "role_counts": result.role_counts,
        "n_rejected": len(result.errors),
    })
    print(f"{len(result.datasets)} datasets loaded: " + ", ".join(f"{n} {role}" for role,n in result.role_counts.items()))
    for error in result.errors:
        print(f"rejected {error.dataset_id}: {error.reason}" + ("" if error.row is None else f" (row {error.row})"))
    return EXIT_INVALID if result.errors else EXIT_OK


def run_synth(config:RunConfig, out:pathlib.Path, args) -> int:
    kind = config.get("kind", "pbm")
    truth_path = config.path("truth", required=False)
    truth = ModelDocument.load(truth_path) if truth_path else _reference_document(kind)
    plan = ProfilePlan.from_dict(config.get("plan", {}))
    seed = int(config.get("seed", 0))
    corpus = generate_synthetic(truth.kind, truth.params, plan, float(config.get("noise_sigma_V", 0.0)), seed,
                                truth.spec, truth.hysteresis)
    datasets = list(corpus.datasets)
    if config.get("pulse_temperatures"):
        model = model_from_document(truth)
        for i,temp in enumerate(config.get("pulse_temperatures")):
            datasets.append(hysteresis_pulse_test(model, truth.spec, float(temp), rest_s=float(config.get("pulse_rest_s", 9000.0)),
                                                  noise_sigma=float(config.get("noise_sigma_V", 0.0)), random_seed=seed + i + 1))
    manifest_path = write_corpus(datasets, truth.spec, out)
    _write_json(out / "truth.json", corpus.truth_record())
    print(f"{len(datasets)} datasets written; manifest {manifest_path}")
    return EXIT_OK


def run_fit_hysteresis(config:RunConfig, out:pathlib.Path, args) -> int:
    result = ingest(config.path("manifest"))
    tests = [dataset for dataset in result.datasets if dataset.profile_kind == "hysteresis-pulse"]
    if not tests:
        raise ValueError("fit-hysteresis: the manifest lists no hysteresis-pulse datasets.")
    hmap = build_hysteresis_map(tests, result.spec)
    fit = fit_plett(tests, hmap, result.spec, config.pso(n_particles=40, max_iterations=150))
    out.mkdir(parents=True, exist_ok=True)
    hmap.to_csv(out / "hysteresis_map.csv")
    _write_json(out / "ocv_surface.json", {"schema_version": 1, **hmap.ocv_surface().to_dict()})
    _write_json(out / "hysteresis.json", {
        "schema_version": 1,
        "hysteresis": fit.params.to_dict(),
        "m_scale": fit.m_scale,
        "m0_fitted_V": {f"{temp:g}": value for temp,value in fit.m0_fitted.items()},
        "rmse_V": fit.rmse,
        "n_points": fit.n_points,
        "gamma_identifiable": fit.gamma_identifiable,
    })
    fit.identification.save(out, stem="hysteresis_identification")
    print(f"gamma {fit.params.gamma:.4g}, RMSE {1000*fit.rmse:.2f} mV over {fit.n_points} rests")
    return EXIT_OK


def _calibration_inputs(config:RunConfig, kind:str) -> tuple:
    result = ingest(config.path("manifest"))
    base_path = config.path("base_model", required=False)
    if base_path:
        document = ModelDocument.load(base_path)
        if document.kind != kind:
            raise ValueError(f"{base_path}: a {document.kind} model cannot start a {kind} calibration.")
        params, hysteresis = document.params, document.hysteresis
    else:
        params, hysteresis = _reference_document(kind).params, HysteresisParams.zero()
    hysteresis_path = config.path("hysteresis", required=False)
    if hysteresis_path:
        hysteresis = load_hysteresis(hysteresis_path)
    return result, params, hysteresis


def run_calibrate(config:RunConfig, out:pathlib.Path, args) -> int:
    kind = args.model
    ingested, params, hysteresis = _calibration_inputs(config, kind)
    datasets = [dataset for dataset in ingested.datasets if dataset.role == "calibration" and dataset.profile_kind != "hysteresis-pulse"]
    datasets = datasets_with_role(datasets, "calibration", title="calibrate")
    settings = config.get("search_space", {})
    names, values = base_vector(kind, params)
    rules_path = settings.get("rules")
    space = default_search_space(names, values, settings.get("free"), settings.get("extra_rules"),
                                 None if rules_path is None else config.base_dir / rules_path)
    run_logger = SingleRunLogger(logger)
    if config.get("staged", False):
        results = calibrate_staged(kind, datasets, params, space, config.pso(), ingested.spec, hysteresis, out, run_logger)
        print(f"{kind} staged calibration: final cost {1000*results[-1].best_cost:.3f} mV")
    else:
        result = calibrate(kind, datasets, params, space, config.pso(), ingested.spec, hysteresis, out, run_logger)
        print(f"{kind} calibration: cost {1000*result.best_cost:.3f} mV after {result.n_iterations} iterations")
    return EXIT_OK


def run_validate(config:RunConfig, out:pathlib.Path, args) -> int:
    ingested = ingest(config.path("manifest"))
    document = ModelDocument.load(config.path("model"))
    if args.model and document.kind != args.model:
        raise ValueError(f"validate: --model {args.model} given, but the model file holds a {document.kind} model.")
    datasets = [dataset for dataset in ingested.datasets if dataset.role == "validation"]
    report = validate(document.kind, document.params, datasets, document.spec, document.hysteresis, out, SingleRunLogger(logger))
    print(f"{document.kind} validation: average RMSE {1000*report.overall_rmse:.2f} mV over {len(report.rows)} datasets")
    return EXIT_OK


def run_compare(config:RunConfig, out:pathlib.Path, args) -> int:
    ingested = ingest(config.path("manifest"))
    paths = config.paths("models")
    if len(paths) != 2:
        raise ValueError(f"compare: need exactly two model files, got {len(paths)}.")
    documents = [ModelDocument.load(path) for path in paths]
    models = [model_from_document(document) for document in documents]
    datasets = [dataset for dataset in ingested.datasets if dataset.role == "validation"]
    datasets = datasets_with_role(datasets, "validation", title="compare")
    step_ms = {}
    if config.get("bench_steps"):
        for document in documents:
            timing = benchmark_step_time(document.kind, document.params, int(config.get("bench_steps")),
                                         document.spec, document.hysteresis)
            step_ms.setdefault(document.kind, timing.median_ms)
    report = compare(models[0], models[1], datasets, step_ms, out, SingleRunLogger(logger))
    print(report.summary().drop(columns=["aborted"]).to_string())
    return EXIT_OK


def run_bench(config:RunConfig, out:pathlib.Path, args) -> int:
    paths = config.paths("models")
    documents = [ModelDocument.load(path) for path in paths] if paths else [_reference_document(kind) for kind in MODEL_KINDS]
    n_steps, repeats = int(config.get("n_steps", MIN_BENCH_STEPS)), int(config.get("repeats", 3))
    timings = [benchmark_step_time(document.kind, document.params, n_steps, document.spec, document.hysteresis, repeats)
               for document in documents]
    summary = {"schema_version": 1, "timings": [timing.to_dict() for timing in timings]}
    by_kind = {timing.kind: timing.median_ms for timing in timings}
    if "pbm" in by_kind and "ecm" in by_kind:
        summary["pbm_to_ecm_ratio"] = by_kind["pbm"] / by_kind["ecm"]
    _write_json(out / "bench.json", summary)
    for timing in timings:
        print(f"{timing.kind}: {timing.median_ms:.4f} ms per step")
    return EXIT_OK


COMMANDS = {
    "ingest": (run_ingest, "validate and load a manifest of test CSVs"),
    "synth": (run_synth, "generate a synthetic corpus from a truth model"),
    "fit-hysteresis": (run_fit_hysteresis, "build the hysteresis map and fit the hysteresis submodel"),
    "calibrate": (run_calibrate, "identify model parameters on the calibration datasets"),
    "validate": (run_validate, "report model accuracy on the validation datasets"),
    "compare": (run_compare, "compare two models on the validation datasets"),
    "bench": (run_bench, "measure the compute time per sample"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cellpyx", description="Battery model identification and comparison.")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for progress, -vv for debugging output")
    commands = parser.add_subparsers(dest="command", required=True)
    for name,(_, help_text) in COMMANDS.items():
        command = commands.add_parser(name, help=help_text)
        command.add_argument("--config", type=pathlib.Path, default=None, help="run configuration JSON")
        command.add_argument("--out", type=pathlib.Path, default=pathlib.Path("out"), help="output directory")
        if name in ("calibrate", "validate"):
            command.add_argument("--model", choices=MODEL_KINDS, required=(name == "calibrate"))
    return parser


def main(argv:list=None) -> int:
    args = build_parser().parse_args(argv)
    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger().setLevel(level)
    handler, _ = COMMANDS[args.command]
    try:
        config = RunConfig.load(args.config)
        return handler(config, args.out, args)
    except ValueError as err:
        logger.error("%s", err)
        return EXIT_INVALID
    except Exception as err:
        logger.exception("%s failed: %s", args.command, err)
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
