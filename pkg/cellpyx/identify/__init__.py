from cellpyx.identify.search_space import SearchSpace, default_search_space, search_space_from_rules, load_bound_rules
from cellpyx.identify.pso import PsoConfig, IdentificationResult, run_pso
from cellpyx.identify.calibration import (
    cost, dataset_costs, CalibrationObjective, calibrate, calibrate_staged, validate,
    AllDatasetsAbortedError, ABORT_PENALTY_PER_SAMPLE,
)
