from cellpyx.models.simulation import (
    SimulationResult, run_simulation, ModelValidityError, SolidSaturationError, ElectrolyteDepletionError,
)
from cellpyx.models.pbm import PbmModel, PbmState, init_pbm_state, pbm_step, simulate_pbm, assemble_voltage
from cellpyx.models.ecm import EcmModel, EcmState, ecm_step, simulate_ecm
