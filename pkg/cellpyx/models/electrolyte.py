"""
Reduced-order electrolyte diffusion across positive electrode, separator and
negative electrode (x = 0 at the positive current collector).

    eps * dc/dt = d/dx( D_e(T) * eps^b * dc/dx ) + s(x) * I,     dc/dx = 0 at x = 0, L

with the salt source per unit cell current

    s(x) = -(1 - t+) / (F A L_p)   in the positive electrode,
            0                      in the separator,
           +(1 - t+) / (F A L_n)   in the negative electrode.

The concentration is c_e0 plus a combination of two mean-free polynomial
profiles: the piecewise-quadratic steady profile of a unit current, and the
next profile in its moment sequence. Concentration and flux are continuous at
both interfaces because every profile is, and since each profile has zero mean
the total salt never changes. A Galerkin projection gives two decoupled modes
that are advanced with the exact zero-order-hold discretization.

Programmer: cellpyx team
Since: 2024-05
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg
from scipy.integrate import cumulative_trapezoid

from cellpyx.cells import FARADAY
from cellpyx.models.simulation import ElectrolyteDepletionError

import logging
logger = logging.getLogger(__name__)


class ElectrolyteRomState(NamedTuple):
    w1: float = 0.0
    w2: float = 0.0


UNIFORM_ELECTROLYTE = ElectrolyteRomState(0.0, 0.0)


def _trapezoid_weights(x:np.ndarray) -> np.ndarray:
    dx = np.diff(x)
    weights = np.zeros_like(x)
    weights[:-1] += dx/2
    weights[1:] += dx/2
    return weights


def three_region_grid(L_p:float, L_s:float, L_n:float, n_per_region:int) -> tuple:
    """
    Nodes over [0, L] with nodes at both interfaces, and the region index of each node
    (0 positive, 1 separator, 2 negative; interface nodes belong to the electrode).

    >>> x, region = three_region_grid(1.0, 1.0, 1.0, 2)
    >>> x.tolist()
    [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0]
    >>> region.tolist()
    [0, 0, 0, 1, 2, 2, 2]
    """
    x = np.concatenate([
        np.linspace(0.0, L_p, n_per_region + 1),
        np.linspace(L_p, L_p + L_s, n_per_region + 1)[1:],
        np.linspace(L_p + L_s, L_p + L_s + L_n, n_per_region + 1)[1:],
    ])
    region = np.ones(len(x), dtype=int)
    region[: n_per_region + 1] = 0
    region[2*n_per_region:] = 2
    return x, region


@dataclass(frozen=True)
class ElectrolyteBasis:
    """ The two-mode realization for one parameter set (temperature independent). """
    x: np.ndarray                # m
    region: np.ndarray
    profiles: np.ndarray         # c(x) - c_e0 = profiles @ w, shape (len(x), 2)
    rates: tuple                 # mode i decays at D_e(T) * rates[i]  (1/m2)
    gains: tuple                 # mode input per ampere
    at_0: tuple                  # profile values at x = 0
    at_L: tuple                  # profile values at x = L
    avg_p: tuple                 # profile averages over the positive electrode
    avg_n: tuple                 # profile averages over the negative electrode
    check_points: np.ndarray     # profile rows checked for depletion
    eps_e: float
    cell_length: float

    def boundary_values(self, state:ElectrolyteRomState, c_e0:float) -> tuple:
        w1, w2 = state
        return (c_e0 + self.at_0[0]*w1 + self.at_0[1]*w2, c_e0 + self.at_L[0]*w1 + self.at_L[1]*w2)

    def electrode_averages(self, state:ElectrolyteRomState, c_e0:float) -> tuple:
        w1, w2 = state
        return (c_e0 + self.avg_p[0]*w1 + self.avg_p[1]*w2, c_e0 + self.avg_n[0]*w1 + self.avg_n[1]*w2)

    def profile(self, state:ElectrolyteRomState, c_e0:float) -> np.ndarray:
        return c_e0 + self.profiles @ np.asarray(state)

    def total_salt(self, state:ElectrolyteRomState, c_e0:float) -> float:
        """ Salt per unit area (mol/m2) held in the pores. """
        weights = _trapezoid_weights(self.x)
        return float(self.eps_e * weights @ self.profile(state, c_e0))


def source_per_ampere(region:np.ndarray, params) -> np.ndarray:
    """ Salt source (mol/(m3 s A)) at each node. """
    scale = (1 - params.t0_plus) / (FARADAY * params.electrode_area_A)
    return np.select([region == 0, region == 2], [-scale/params.L_p, scale/params.L_n], 0.0)


def cumulative_source(x:np.ndarray, params) -> np.ndarray:
    """ Integral of the source per ampere from 0 to x; zero at both collectors. """
    scale = (1 - params.t0_plus) / (FARADAY * params.electrode_area_A)
    return -scale*np.minimum(x, params.L_p)/params.L_p + scale*np.maximum(x - params.L_p - params.L_s, 0.0)/params.L_n


def _mean_free_normalized(values:np.ndarray, derivative:np.ndarray, weights:np.ndarray, length:float) -> tuple:
    values = values - (weights @ values) / length
    scale = np.max(np.abs(values))
    return values/scale, derivative/scale


def electrolyte_basis(params, n_per_region:int=400) -> ElectrolyteBasis:
    """
    Build the two-mode realization.

    >>> from cellpyx.parameters import reference_pbm_params
    >>> basis = electrolyte_basis(reference_pbm_params())
    >>> basis.rates[0] < basis.rates[1]
    True
    >>> abs(basis.total_salt(ElectrolyteRomState(5.0, -3.0), 1200.0) - basis.total_salt(UNIFORM_ELECTROLYTE, 1200.0)) < 1e-12
    True
    """
    x, region = three_region_grid(params.L_p, params.L_s, params.L_n, n_per_region)
    weights = _trapezoid_weights(x)
    length = x[-1]
    cumulative = cumulative_source(x, params)

    # steady profile of a unit current: g'' = -s, g'(0) = 0
    dphi1 = -cumulative
    phi1 = cumulative_trapezoid(dphi1, x, initial=0.0)
    phi1, dphi1 = _mean_free_normalized(phi1, dphi1, weights, length)
    # next moment: phi2'' = phi1, phi2'(0) = 0
    dphi2 = cumulative_trapezoid(phi1, x, initial=0.0)
    phi2 = cumulative_trapezoid(dphi2, x, initial=0.0)
    phi2, dphi2 = _mean_free_normalized(phi2, dphi2, weights, length)

    phi = np.column_stack([phi1, phi2])
    dphi = np.column_stack([dphi1, dphi2])
    mass = params.eps_e * phi.T @ (weights[:,None] * phi)
    stiffness = params.eps_e**params.bruggeman * dphi.T @ (weights[:,None] * dphi)
    # integrated by parts, since the source itself jumps at the interfaces
    forcing = -dphi.T @ (weights * cumulative)
    rates, vectors = scipy.linalg.eigh(stiffness, mass)

    profiles = phi @ vectors
    gains = vectors.T @ forcing
    positive, negative = region == 0, region == 2
    avg_p = weights[positive] @ profiles[positive] / weights[positive].sum()
    avg_n = weights[negative] @ profiles[negative] / weights[negative].sum()
    check_points = profiles[np.unique(np.concatenate([np.arange(0, len(x), 20), [len(x) - 1]]))]
    logger.debug("Electrolyte modes: rates %s, gains %s", rates, gains)
    return ElectrolyteBasis(
        x=x, region=region, profiles=profiles,
        rates=tuple(float(r) for r in rates), gains=tuple(float(g) for g in gains),
        at_0=tuple(float(v) for v in profiles[0]), at_L=tuple(float(v) for v in profiles[-1]),
        avg_p=tuple(float(v) for v in avg_p), avg_n=tuple(float(v) for v in avg_n),
        check_points=check_points, eps_e=params.eps_e, cell_length=float(length))


def electrolyte_step(state:ElectrolyteRomState, current_I:float, dt:float, params, temp_c:float,
                     basis:ElectrolyteBasis=None, D_e:float=None) -> ElectrolyteRomState:
    """
    Advance the electrolyte modes over dt with constant cell current.
    The basis and the diffusivity at temperature may be passed in to skip recomputing them.
    """
    if not dt > 0:
        raise ValueError(f"electrolyte_step: dt must be positive, got {dt}.")
    if basis is None:
        basis = electrolyte_basis(params)
    if D_e is None:
        D_e = params.D_e(temp_c)
    w = []
    for value, rate, gain in zip(state, basis.rates, basis.gains):
        decay_rate = D_e * rate
        e = math.exp(-decay_rate*dt)
        w.append(e*value + (1 - e)*gain*current_I/decay_rate)
    new_state = ElectrolyteRomState(*w)
    lowest = params.c_e0 + float(np.min(basis.check_points @ np.asarray(w)))
    if lowest <= 0:
        raise ElectrolyteDepletionError("electrolyte concentration", lowest, "electrolyte")
    return new_state


def steady_state(current_I:float, D_e:float, basis:ElectrolyteBasis) -> ElectrolyteRomState:
    """ The modes reached under a constant current held for a long time. """
    return ElectrolyteRomState(*(gain*current_I/(D_e*rate) for rate,gain in zip(basis.rates, basis.gains)))


if __name__ == "__main__":
    import doctest, sys
    logger.addHandler(logging.StreamHandler(sys.stdout))
    logger.setLevel(logging.INFO)
    print(doctest.testmod())
