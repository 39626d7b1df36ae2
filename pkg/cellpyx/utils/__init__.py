from cellpyx.utils.solve import solve, monotone_projection, DEFAULT_SOLVERS
