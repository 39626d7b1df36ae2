"""
Compare the reduced-order physics-based model with the equivalent-circuit
model: accuracy after identification on synthetic data, compute time, and
the error of the reduced-order model against the finite-difference reference.

Programmer: cellpyx team
Since: 2024-05
"""


######### COMMON VARIABLES AND ROUTINES ##########

import time

from cellpyx import (
    REFERENCE_CELL, PsoConfig, build_model, calibrate, default_search_space, fdm_full_cell,
    reference_ecm_params, reference_hysteresis_params, reference_pbm_params, simulate, validate,
)
from cellpyx.identify.calibration import base_vector
from cellpyx.benchmark import benchmark_step_time
from cellpyx.synthetic import ProfilePlan, constant_rate_profile, generate_synthetic
from cellpyx.timeseries import Dataset, datasets_with_role

TIME_LIMIT = 6 * 3600

plan = ProfilePlan(temperatures=(0.0, 25.0), c_rates=(0.25, 1.0), drive_cycles=("udds", "us06"),
                   multi_step=False, drive_cycle_repeats=1)


def starting_params(kind:str):
    return reference_pbm_params() if kind == "pbm" else reference_ecm_params()



######### EXPERIMENT: IDENTIFICATION ON SYNTHETIC DATA ##########

def identify_on_synthetic_data(model_kind:str, noise_sigma_mV:float, n_particles:int, random_seed:int):
    truth = generate_synthetic("pbm", reference_pbm_params(), plan, noise_sigma_mV/1000, random_seed,
                               hysteresis=reference_hysteresis_params())
    datasets = truth.datasets
    base_params = starting_params(model_kind)
    names, values = base_vector(model_kind, base_params)
    space = default_search_space(names, values)
    config = PsoConfig(n_particles=n_particles, max_iterations=50, stall_iterations=10, random_seed=random_seed)
    start = time.perf_counter()
    result = calibrate(model_kind, datasets_with_role(datasets, "calibration"), base_params, space, config,
                       REFERENCE_CELL, truth.truth.hysteresis)
    calibration_s = time.perf_counter() - start
    params = base_params.with_vector(result.best_params)
    report = validate(model_kind, params, datasets_with_role(datasets, "validation"), REFERENCE_CELL, truth.truth.hysteresis)
    return {
        "calibration_cost_mV": 1000 * result.best_cost,
        "calibration_s": calibration_s,
        "n_evaluations": result.n_evaluations,
        "validation_rmse_mV": 1000 * report.overall_rmse,
        "low_soc_rmse_mV": 1000 * report.low_soc_rmse,
        "low_temp_rmse_mV": 1000 * report.low_temp_rmse,
    }

def run_identification_experiment():
    experiment = experiments_csv.Experiment("results/", "identification.csv", backup_folder="results/backup/")
    input_ranges = {
        "model_kind": ["pbm", "ecm"],
        "noise_sigma_mV": [0, 1, 5],
        "n_particles": [50, 200],
        "random_seed": range(3),
    }
    experiment.run_with_time_limit(identify_on_synthetic_data, input_ranges, time_limit=TIME_LIMIT)



######### EXPERIMENT: COMPUTE TIME PER SAMPLE ##########

def time_per_step(model_kind:str, n_steps:int):
    timing = benchmark_step_time(model_kind, starting_params(model_kind), n_steps,
                                 hysteresis=reference_hysteresis_params())
    return {"median_ms_per_step": timing.median_ms}

def run_timing_experiment():
    experiment = experiments_csv.Experiment("results/", "timing.csv", backup_folder="results/backup/")
    input_ranges = {
        "model_kind": ["pbm", "ecm"],
        "n_steps": [100_000, 300_000],
    }
    experiment.run_with_time_limit(time_per_step, input_ranges, time_limit=TIME_LIMIT)



######### EXPERIMENT: REDUCED-ORDER MODEL AGAINST THE FINITE-DIFFERENCE REFERENCE ##########

def rom_against_fdm(c_rate:float, temperature:float):
    params = reference_pbm_params()
    profile = constant_rate_profile(REFERENCE_CELL, c_rate, temperature, soc_window=0.7)
    model = build_model("pbm", params)
    start = time.perf_counter()
    rom = simulate(model, Dataset("profile", "validation", temperature, "constant-rate", profile, 0.9))
    rom_s = time.perf_counter() - start
    start = time.perf_counter()
    fdm = fdm_full_cell(profile, params, 0.9)
    fdm_s = time.perf_counter() - start
    n = min(rom.n_completed, fdm.n_completed)
    errors = rom.voltage[:n] - fdm.voltage[:n]
    return {
        "max_error_mV": 1000 * float(abs(errors).max()),
        "rms_error_mV": 1000 * float((errors**2).mean() ** 0.5),
        "rom_s": rom_s,
        "fdm_s": fdm_s,
    }

def run_oracle_experiment():
    experiment = experiments_csv.Experiment("results/", "rom_vs_fdm.csv", backup_folder="results/backup/")
    input_ranges = {
        "c_rate": [0.25, 0.5, 1.0],
        "temperature": [0.0, 25.0, 40.0],
    }
    experiment.run_with_time_limit(rom_against_fdm, input_ranges, time_limit=TIME_LIMIT)



######### MAIN PROGRAM ##########

if __name__ == "__main__":
    import logging, experiments_csv
    experiments_csv.logger.setLevel(logging.INFO)
    run_timing_experiment()
    run_oracle_experiment()
    run_identification_experiment()
