"""
Global-best particle swarm optimization over a SearchSpace.

The swarm lives in the unit cube of the free parameters. Velocities are
clamped per coordinate, positions are clamped to the cube and the velocity of
a clamped coordinate is zeroed. Particles are evaluated in index order (or
mapped in order over a process pool), so a run is reproducible from its seed.

Programmer: cellpyx team
Since: 2024-05
"""

import json
import math
import pathlib
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np
import pandas as pd

from cellpyx.identify.search_space import SearchSpace

import logging
logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PsoConfig:
    """
    >>> PsoConfig().n_particles
    500
    >>> PsoConfig(n_particles=1)
    Traceback (most recent call last):
    ...
    ValueError: PsoConfig: need at least 2 particles, got 1.
    """
    n_particles: int = 500
    max_iterations: int = 100
    inertia: float = 0.72
    cognitive: float = 1.49
    social: float = 1.49
    cost_tolerance: float = 0.0      # stop once the best cost is at or below this
    stall_iterations: int = None     # stop after this many iterations without improvement
    max_velocity: float = 0.5        # per coordinate, as a fraction of the unit cube
    random_seed: int = 0
    n_workers: int = 1

    def __post_init__(self):
        if self.n_particles < 2:
            raise ValueError(f"PsoConfig: need at least 2 particles, got {self.n_particles}.")
        if self.max_iterations < 0:
            raise ValueError(f"PsoConfig: max_iterations must be non-negative, got {self.max_iterations}.")
        for name in ("inertia", "cognitive", "social", "max_velocity"):
            if not getattr(self, name) > 0:
                raise ValueError(f"PsoConfig: {name} must be positive, got {getattr(self, name)}.")
        if self.n_workers < 1:
            raise ValueError(f"PsoConfig: n_workers must be at least 1, got {self.n_workers}.")

    def to_dict(self) -> dict:
        return asdict(self)

    @staticmethod
    def from_dict(data:dict) -> "PsoConfig":
        return PsoConfig(**data)


@dataclass
class IdentificationResult:
    """
    The best parameters found, the best-cost history (entry 0 is the initial
    swarm) and, after a calibration, the per-dataset RMSE and cost of the best
    parameters. A dataset's cost adds the abort penalty for its missing samples
    to its RMSE, so the costs sum to best_cost while the RMSEs need not.
    """
    names: tuple
    best_params: np.ndarray
    best_cost: float
    history: list
    mean_history: list
    converged: bool
    n_evaluations: int
    wall_time_s: float
    random_seed: int
    kind: str = "function"
    dataset_rmse: dict = field(default_factory=dict)
    dataset_cost: dict = field(default_factory=dict)

    @property
    def n_iterations(self) -> int:
        return len(self.history) - 1

    def history_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "iteration": np.arange(len(self.history)),
            "best_cost": self.history,
            "mean_cost": self.mean_history,
        })

    def rmse_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "dataset_id": list(self.dataset_rmse),
            "rmse_v": list(self.dataset_rmse.values()),
            "cost_v": [self.dataset_cost.get(key, math.nan) for key in self.dataset_rmse],
        })

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "kind": self.kind,
            "best_cost_V": self.best_cost,
            "converged": self.converged,
            "n_iterations": self.n_iterations,
            "n_evaluations": self.n_evaluations,
            "wall_time_s": self.wall_time_s,
            "random_seed": self.random_seed,
            "best_params": dict(zip(self.names, (float(x) for x in self.best_params))),
            "dataset_rmse_V": dict(self.dataset_rmse),
            "dataset_cost_V": dict(self.dataset_cost),
            "history_best_cost_V": list(self.history),
        }

    @staticmethod
    def from_dict(data:dict) -> "IdentificationResult":
        history = list(data["history_best_cost_V"])
        return IdentificationResult(
            names=tuple(data["best_params"]), best_params=np.array(list(data["best_params"].values())),
            best_cost=float(data["best_cost_V"]), history=history, mean_history=[math.nan]*len(history),
            converged=bool(data["converged"]), n_evaluations=int(data["n_evaluations"]),
            wall_time_s=float(data["wall_time_s"]), random_seed=data["random_seed"],
            kind=data.get("kind", "function"), dataset_rmse=dict(data.get("dataset_rmse_V", {})),
            dataset_cost=dict(data.get("dataset_cost_V", {})))

    def save(self, directory, stem:str="identification"):
        """ Write `<stem>.json` and the per-iteration `<stem>_history.csv`. """
        directory = pathlib.Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        (directory / f"{stem}.json").write_text(json.dumps(self.to_dict(), indent=2))
        self.history_frame().to_csv(directory / f"{stem}_history.csv", index=False)


def _finite_costs(costs) -> np.ndarray:
    costs = np.asarray(costs, dtype=float)
    return np.where(np.isnan(costs), np.inf, costs)


class _Evaluator:
    def __init__(self, space:SearchSpace, cost_fn, n_workers:int):
        self.space = space
        self.cost_fn = cost_fn
        self.n_workers = n_workers
        self.executor = ProcessPoolExecutor(max_workers=n_workers) if n_workers > 1 else None
        self.n_evaluations = 0

    def __call__(self, positions:np.ndarray) -> np.ndarray:
        vectors = self.space.from_unit(positions)
        if self.executor is None:
            costs = [self.cost_fn(vector) for vector in vectors]
        else:
            chunk = max(1, len(vectors) // (4 * self.n_workers))
            costs = list(self.executor.map(self.cost_fn, vectors, chunksize=chunk))
        self.n_evaluations += len(vectors)
        return _finite_costs(costs)

    def close(self):
        if self.executor is not None:
            self.executor.shutdown()


def run_pso(space:SearchSpace, config:PsoConfig, cost_fn:callable, kind:str="function") -> IdentificationResult:
    """
    Minimize cost_fn(vector) over the free parameters of the space.

    >>> space = SearchSpace(names=("x", "y"), lower=[-5.0, -5.0], upper=[5.0, 5.0], log_scale=[False, False], base=[0.0, 0.0])
    >>> result = run_pso(space, PsoConfig(n_particles=20, max_iterations=100, random_seed=1), lambda v: float(np.sum((v - 1)**2)))
    >>> bool(np.allclose(result.best_params, [1.0, 1.0], atol=1e-3))
    True
    >>> all(a >= b for a,b in zip(result.history, result.history[1:]))
    True
    """
    if space.n_free == 0:
        raise ValueError("run_pso: the search space has no free parameters.")
    start = time.perf_counter()
    rng = np.random.default_rng(config.random_seed)
    logger.info("Random seed: %d", config.random_seed)
    n, d = config.n_particles, space.n_free
    vmax = config.max_velocity

    evaluate = _Evaluator(space, cost_fn, config.n_workers)
    try:
        positions = rng.random((n, d))
        velocities = rng.uniform(-vmax, vmax, (n, d))
        costs = evaluate(positions)
        personal, personal_cost = positions.copy(), costs.copy()
        # argmin picks the lowest index among equal costs
        best_index = int(np.argmin(personal_cost))
        best_position, best_cost = personal[best_index].copy(), float(personal_cost[best_index])
        history, mean_history = [best_cost], [float(np.mean(costs[np.isfinite(costs)])) if np.isfinite(costs).any() else math.inf]
        stall = 0
        for iteration in range(1, config.max_iterations + 1):
            if best_cost <= config.cost_tolerance:
                logger.info("Cost tolerance reached after %d iterations", iteration - 1)
                break
            r_cognitive, r_social = rng.random((n, d)), rng.random((n, d))
            velocities = (config.inertia * velocities
                          + config.cognitive * r_cognitive * (personal - positions)
                          + config.social * r_social * (best_position - positions))
            velocities = np.clip(velocities, -vmax, vmax)
            positions = positions + velocities
            outside = (positions < 0) | (positions > 1)
            positions = np.clip(positions, 0.0, 1.0)
            velocities[outside] = 0.0

            costs = evaluate(positions)
            improved = costs < personal_cost
            personal[improved], personal_cost[improved] = positions[improved], costs[improved]
            best_index = int(np.argmin(personal_cost))
            if personal_cost[best_index] < best_cost:
                best_position, best_cost = personal[best_index].copy(), float(personal_cost[best_index])
                stall = 0
            else:
                stall += 1
            history.append(best_cost)
            finite = costs[np.isfinite(costs)]
            mean_history.append(float(np.mean(finite)) if len(finite) else math.inf)
            logger.debug("Iteration %d: best cost %g", iteration, best_cost)
            if config.stall_iterations is not None and stall >= config.stall_iterations:
                logger.info("No improvement for %d iterations, stopping at iteration %d", stall, iteration)
                break
    finally:
        evaluate.close()

    converged = history[-1] < history[0] or best_cost <= config.cost_tolerance
    if not converged:
        logger.warning("The swarm never improved on its initial best cost %g", history[0])
    wall_time = time.perf_counter() - start
    logger.info("PSO finished: best cost %g after %d iterations, %d evaluations, %.1f s",
                best_cost, len(history) - 1, evaluate.n_evaluations, wall_time)
    return IdentificationResult(
        names=space.names, best_params=space.from_unit(best_position), best_cost=best_cost,
        history=history, mean_history=mean_history, converged=bool(converged),
        n_evaluations=evaluate.n_evaluations, wall_time_s=wall_time,
        random_seed=config.random_seed, kind=kind)


if __name__ == "__main__":
    import doctest, sys
    logger.addHandler(logging.StreamHandler(sys.stdout))
    logger.setLevel(logging.INFO)
    print(doctest.testmod())
