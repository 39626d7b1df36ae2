#!python3

"""
Utility functions for solving the small convex problems of the toolkit
using a sequence of solvers.

Programmer: cellpyx team
Since:  2024-05
"""

import cvxpy
import numpy as np
from typing import List, Dict, Tuple

DEFAULT_SOLVERS = [
	("OSQP", {}),                                # quadratic programs
	("CLARABEL", {}),                            # general conic programs
	("SCS", {'eps_abs':1e-8, 'eps_rel':1e-8}),   # should be installed by: pip install scs
	("ECOS", {}),
]

import logging
logger = logging.getLogger(__name__)

def solve(problem:cvxpy.Problem, solvers:List[Tuple[str, Dict]] = DEFAULT_SOLVERS):
	"""
	Solve a cvxpy problem with the first solver of the list that is installed and reaches
	a definite status. Failed attempts are logged and the next solver is tried.

	:param solvers list of (solver name, keyword arguments) pairs.
	"""
	failures = []
	for (solver, solver_kwargs) in solvers:
		try:
			if solver==cvxpy.SCIPY:
				problem.solve(solver=solver, scipy_options=dict(solver_kwargs))
			else:
				problem.solve(solver=solver, **solver_kwargs)
		except cvxpy.SolverError as err:
			logger.info("Solver %s [%s] fails: %s", solver, solver_kwargs, err)
			failures.append(solver)
			continue
		if problem.status in ("infeasible", "unbounded"):
			raise ValueError(f"The problem is {problem.status}")
		if problem.status in ("optimal", "optimal_inaccurate"):
			logger.info("Solver %s [%s] succeeds: %s", solver, solver_kwargs, problem.status)
			return problem.value
		logger.info("Solver %s [%s] ends with status %s", solver, solver_kwargs, problem.status)
		failures.append(solver)
	raise cvxpy.SolverError(f"All solvers failed: {failures}")


def monotone_projection(values, weights=None, solvers:list=None) -> np.ndarray:
	"""
	Least-squares projection of a sequence onto the non-decreasing sequences.
	Used to repair measured OCV columns before they become a lookup surface.

	>>> np.round(monotone_projection([1.0, 3.0, 2.0, 4.0]), 3).tolist()
	[1.0, 2.5, 2.5, 4.0]
	>>> np.round(monotone_projection([1.0, 2.0, 3.0]), 3).tolist()
	[1.0, 2.0, 3.0]
	>>> monotone_projection([5.0]).tolist()
	[5.0]
	"""
	values = np.asarray(values, dtype=float)
	if len(values) < 2 or np.all(np.diff(values) >= 0):
		return values.copy()
	weights = np.ones_like(values) if weights is None else np.asarray(weights, dtype=float)
	if np.any(weights <= 0):
		raise ValueError(f"monotone_projection: weights must be positive, got {weights}")
	x = cvxpy.Variable(len(values))
	objective = cvxpy.sum(cvxpy.multiply(weights, cvxpy.square(x - values)))
	problem = cvxpy.Problem(cvxpy.Minimize(objective), [x[1:] >= x[:-1]])
	solve(problem, solvers=solvers or DEFAULT_SOLVERS)
	# clean solver round-off so the result is exactly non-decreasing
	return np.maximum.accumulate(np.asarray(x.value, dtype=float))


solve.logger = logger


if __name__ == '__main__':
	import sys
	logger.addHandler(logging.StreamHandler(sys.stdout))
	logger.setLevel(logging.INFO)

	import doctest
	(failures, tests) = doctest.testmod(report=True)
	print("{} failures, {} tests".format(failures, tests))
