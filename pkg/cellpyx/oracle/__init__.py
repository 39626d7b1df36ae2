from cellpyx.oracle.fdm import (
    FdmGridConfig, SphereGrid, ElectrolyteGrid, SolidTrajectory, ElectrolyteTrajectory,
    FdmCellModel, fdm_solid, fdm_electrolyte, fdm_full_cell,
)
