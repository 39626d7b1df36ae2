"""
The box the identification searches in: per-parameter bounds, linear or
logarithmic scaling, and a mask of the parameters that are actually free.
The swarm moves in the unit cube of the free parameters; `from_unit` maps
its positions back to full parameter vectors.

Programmer: cellpyx team
Since: 2024-05
"""

import fnmatch
import json
import pathlib
from dataclasses import dataclass, replace
from importlib import resources

import numpy as np

from cellpyx.parameters import check_schema_version

import logging
logger = logging.getLogger(__name__)

SCALES = ("linear", "log")


@dataclass(frozen=True)
class SearchSpace:
    """
    >>> space = SearchSpace(names=("a", "b"), lower=[1.0, 0.0], upper=[100.0, 1.0], log_scale=[True, False], base=[10.0, 0.5])
    >>> [round(x, 9) for x in space.from_unit([0.5, 0.25])]
    [10.0, 0.25]
    >>> space.from_unit([1.0, 0.0]).tolist()
    [100.0, 0.0]
    >>> space.restrict(["b"]).free_names
    ('b',)
    >>> space.restrict(["b"]).from_unit([1.0]).tolist()
    [10.0, 1.0]
    >>> SearchSpace(names=("a",), lower=[1.0], upper=[1.0], log_scale=[False], base=[1.0])
    Traceback (most recent call last):
    ...
    ValueError: SearchSpace: lower bound must be below upper bound for ['a'].
    """
    names: tuple
    lower: np.ndarray
    upper: np.ndarray
    log_scale: np.ndarray
    base: np.ndarray
    free: np.ndarray = None

    def __post_init__(self):
        names = tuple(self.names)
        lower = np.array(self.lower, dtype=float)
        upper = np.array(self.upper, dtype=float)
        log_scale = np.array(self.log_scale, dtype=bool)
        base = np.array(self.base, dtype=float)
        free = np.ones(len(names), dtype=bool) if self.free is None else np.array(self.free, dtype=bool)
        if len(set(names)) != len(names):
            raise ValueError("SearchSpace: parameter names must be unique.")
        for name,array in (("lower", lower), ("upper", upper), ("log_scale", log_scale), ("base", base), ("free", free)):
            if array.shape != (len(names),):
                raise ValueError(f"SearchSpace: {name} has shape {array.shape}, expected ({len(names)},).")
        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper)) and np.all(np.isfinite(base))):
            raise ValueError("SearchSpace: bounds and base values must be finite.")
        bad = [names[i] for i in np.flatnonzero(~(lower < upper))]
        if bad:
            raise ValueError(f"SearchSpace: lower bound must be below upper bound for {bad}.")
        bad = [names[i] for i in np.flatnonzero(log_scale & (lower <= 0))]
        if bad:
            raise ValueError(f"SearchSpace: log-scaled parameters need positive bounds: {bad}.")
        bad = [names[i] for i in np.flatnonzero((base < lower) | (base > upper))]
        if bad:
            raise ValueError(f"SearchSpace: base values outside the bounds for {bad}.")
        for array in (lower, upper, log_scale, base, free):
            array.flags.writeable = False
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "log_scale", log_scale)
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "free", free)

    @property
    def dimension(self) -> int:
        return len(self.names)

    @property
    def n_free(self) -> int:
        return int(np.count_nonzero(self.free))

    @property
    def free_names(self) -> tuple:
        return tuple(name for name,is_free in zip(self.names, self.free) if is_free)

    def from_unit(self, unit) -> np.ndarray:
        """
        Map unit-cube coordinates of the free parameters (one row per point,
        or a single point) to full parameter vectors. 0 and 1 map exactly to the bounds.
        """
        unit = np.asarray(unit, dtype=float)
        single = unit.ndim == 1
        unit = np.atleast_2d(unit)
        if unit.shape[1] != self.n_free:
            raise ValueError(f"SearchSpace: expected {self.n_free} unit coordinates, got {unit.shape[1]}.")
        lower, upper, log_scale = self.lower[self.free], self.upper[self.free], self.log_scale[self.free]
        log_lower, log_upper = np.log(np.where(log_scale, lower, 1.0)), np.log(np.where(log_scale, upper, 1.0))
        values = np.where(log_scale, np.exp(log_lower + unit*(log_upper - log_lower)), lower + unit*(upper - lower))
        values = np.where(unit <= 0, lower, np.where(unit >= 1, upper, values))
        vectors = np.tile(self.base, (len(unit), 1))
        vectors[:, self.free] = values
        return vectors[0] if single else vectors

    def to_unit(self, vector) -> np.ndarray:
        """
        >>> space = SearchSpace(names=("a", "b"), lower=[1.0, 0.0], upper=[100.0, 1.0], log_scale=[True, False], base=[10.0, 0.5])
        >>> [round(u, 12) for u in space.to_unit([10.0, 0.75])]
        [0.5, 0.75]
        """
        vector = self.clip(vector)[self.free]
        lower, upper, log_scale = self.lower[self.free], self.upper[self.free], self.log_scale[self.free]
        linear = (vector - lower) / (upper - lower)
        safe = lambda a: np.log(np.where(log_scale, a, 1.0))
        logarithmic = (safe(vector) - safe(lower)) / np.where(log_scale, safe(upper) - safe(lower), 1.0)
        return np.where(log_scale, logarithmic, linear)

    def clip(self, vector) -> np.ndarray:
        vector = np.asarray(vector, dtype=float)
        if vector.shape != (self.dimension,):
            raise ValueError(f"SearchSpace: vector has shape {vector.shape}, expected ({self.dimension},).")
        return np.clip(vector, self.lower, self.upper)

    def restrict(self, patterns:list, base=None) -> "SearchSpace":
        """ Free only the parameters matching any of the patterns; hold the rest at `base`. """
        free = np.array([any(fnmatch.fnmatchcase(name, pattern) for pattern in patterns) for name in self.names])
        if not free.any():
            raise ValueError(f"SearchSpace: no parameter matches {list(patterns)}.")
        base = self.base if base is None else self.clip(base)
        logger.info("Search restricted to %d of %d parameters", int(free.sum()), self.dimension)
        return replace(self, base=base, free=free)

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "parameters": [
                {"name": name, "lower": float(lo), "upper": float(hi), "scale": "log" if log else "linear",
                 "base": float(b), "free": bool(is_free)}
                for name,lo,hi,log,b,is_free in zip(self.names, self.lower, self.upper, self.log_scale, self.base, self.free)
            ],
        }

    @staticmethod
    def from_dict(data:dict) -> "SearchSpace":
        check_schema_version(data, "SearchSpace")
        rows = data["parameters"]
        return SearchSpace(
            names=[row["name"] for row in rows],
            lower=[row["lower"] for row in rows], upper=[row["upper"] for row in rows],
            log_scale=[row.get("scale", "linear") == "log" for row in rows],
            base=[row["base"] for row in rows], free=[row.get("free", True) for row in rows])


def load_bound_rules(path=None) -> list:
    """ Bound rules from a JSON file, by default the rules shipped with the package. """
    if path is None:
        text = resources.files("cellpyx").joinpath("data/default_bounds.json").read_text()
    else:
        text = pathlib.Path(path).read_text()
    data = json.loads(text)
    check_schema_version(data, str(path or "default_bounds.json"))
    return list(data["rules"])


def _bounds_from_rule(rule:dict, name:str, value:float) -> tuple:
    scale = rule.get("scale", "linear")
    if scale not in SCALES:
        raise ValueError(f"{name}: unknown scale {scale!r}, expected one of {SCALES}.")
    if "absolute" in rule:
        lower, upper = rule["absolute"]
    elif "relative" in rule:
        if value <= 0:
            raise ValueError(f"{name}: relative bounds need a positive base value, got {value}.")
        low_factor, high_factor = rule["relative"]
        lower, upper = value*low_factor, value*high_factor
    else:
        raise ValueError(f"{name}: rule {rule.get('pattern')!r} has neither absolute nor relative bounds.")
    if "limits" in rule:
        lower, upper = max(lower, rule["limits"][0]), min(upper, rule["limits"][1])
    return float(lower), float(upper), scale == "log"


def search_space_from_rules(names:list, base, rules:list) -> SearchSpace:
    """
    Bounds for each parameter from the first rule whose pattern matches its name.

    >>> space = search_space_from_rules(["R0_ohm_soc0.5_T25", "eta_charge"], [0.001, 1.0], load_bound_rules())
    >>> [round(x, 9) for x in space.lower], [round(x, 9) for x in space.upper]
    ([0.00033, 0.95], [0.003, 1.0])
    >>> space.log_scale.tolist()
    [True, False]
    """
    base = np.asarray(base, dtype=float)
    lower, upper, log_scale = [], [], []
    for name,value in zip(names, base):
        rule = next((rule for rule in rules if fnmatch.fnmatchcase(name, rule["pattern"])), None)
        if rule is None:
            raise ValueError(f"{name}: no bound rule matches this parameter.")
        lo, hi, log = _bounds_from_rule(rule, name, float(value))
        lower.append(lo); upper.append(hi); log_scale.append(log)
    return SearchSpace(names=tuple(names), lower=lower, upper=upper, log_scale=log_scale, base=base)


def default_search_space(names:list, base, free_patterns:list=None, extra_rules:list=None, rules_path=None) -> SearchSpace:
    """
    The search space around a base parameter vector. Extra rules take
    precedence over the shipped ones; `free_patterns` restricts the search.
    """
    rules = list(extra_rules or []) + load_bound_rules(rules_path)
    space = search_space_from_rules(names, base, rules)
    if free_patterns:
        space = space.restrict(free_patterns)
    return space


if __name__ == "__main__":
    import doctest, sys
    logger.addHandler(logging.StreamHandler(sys.stdout))
    logger.setLevel(logging.INFO)
    print(doctest.testmod())
