"""
Reduced-order solid-phase diffusion in a spherical particle.

The surface-concentration response to the pore-wall flux is approximated by the
third-order Pade approximant of the spherical-diffusion transfer function.
In dimensionless frequency s~ = s R^2 / D, with u = j / F the leaving molar flux,

    (c_surf - c_0)(s) / u(s) = -(R/D) * (21 s~^2 + 1260 s~ + 10395) / (s~ (s~^2 + 189 s~ + 3465)).

The realization is kept in modal form: one integrator (the bulk concentration,
which carries the charge balance exactly) and two decaying modes scaled to
concentration units, so that a change of D only changes the rates.
Each step is the exact zero-order-hold discretization.

Programmer: cellpyx team
Since: 2024-05
"""

import math
from typing import NamedTuple

import numpy as np

from cellpyx.cells import FARADAY
from cellpyx.models.simulation import SolidSaturationError

import logging
logger = logging.getLogger(__name__)


def _pade_modes() -> tuple:
    """
    Poles and residues of (18 x + 693) / (x^2 + 189 x + 3465), the part of the
    Pade approximant left after removing the integrator 3/x.
    """
    poles = np.sort(np.roots([1.0, 189.0, 3465.0]).real)[::-1]
    lam1, lam2 = poles
    residues = ((18*lam1 + 693) / (lam1 - lam2), (18*lam2 + 693) / (lam2 - lam1))
    return (float(lam1), float(lam2)), tuple(float(r) for r in residues)


PADE_POLES, PADE_RESIDUES = _pade_modes()


def pade_transfer_remainder(s_tilde:complex) -> complex:
    """
    The non-integrating part of the approximant, evaluated from the modal form.
    Its value at zero is the steady surface offset factor 1/5 and its slope
    is -1/175, the first two moments of the exact transfer function.

    >>> round(pade_transfer_remainder(0.0), 12)
    0.2
    >>> h = 1e-6
    >>> round((pade_transfer_remainder(h) - pade_transfer_remainder(-h)) / (2*h) * 175, 6)
    -1.0
    """
    return sum(r / (s_tilde - lam) for r,lam in zip(PADE_RESIDUES, PADE_POLES))


class SolidRomState(NamedTuple):
    """
    c_bulk is the integrator state; m1, m2 are the modal states (mol/m3).

    >>> state = solid_equilibrium(15000.0)
    >>> state.c_surf
    15000.0
    """
    c_bulk: float
    m1: float = 0.0
    m2: float = 0.0

    @property
    def c_surf(self) -> float:
        return self.c_bulk - PADE_RESIDUES[0]*self.m1 - PADE_RESIDUES[1]*self.m2


def solid_equilibrium(concentration:float) -> SolidRomState:
    return SolidRomState(float(concentration), 0.0, 0.0)


def steady_surface_offset(flux_J:float, radius:float, diffusivity:float) -> float:
    """
    c_surf - c_bulk once the modes have settled under a constant flux: -j R / (5 D F).

    >>> round(steady_surface_offset(FARADAY, 1.0, 1.0), 12)
    -0.2
    """
    return -flux_J * radius / (5 * diffusivity * FARADAY)


def solid_step(state:SolidRomState, flux_J:float, dt:float, D_s_effective:float, radius:float,
               c_s_max:float=math.inf, where:str="") -> SolidRomState:
    """
    Advance one particle over dt with a constant leaving flux (A/m2).

    >>> state = solid_equilibrium(15000.0)
    >>> solid_step(state, 0.0, 1.0, 1e-14, 5e-6) == state
    True
    >>> nxt = solid_step(state, 1.0, 10.0, 1e-14, 5e-6)
    >>> bool(np.isclose(nxt.c_bulk - state.c_bulk, -3*1.0*10.0/(FARADAY*5e-6), rtol=1e-12))
    True
    >>> nxt.c_surf < nxt.c_bulk
    True
    >>> solid_step(state, 1e4, 10.0, 1e-14, 5e-6, c_s_max=30000.0, where="negative electrode")  # doctest: +ELLIPSIS
    Traceback (most recent call last):
    ...
    cellpyx.models.simulation.SolidSaturationError: surface concentration in the negative electrode left its valid range: ...
    """
    if not (dt > 0 and D_s_effective > 0):
        raise ValueError(f"solid_step: dt and D_s must be positive, got dt={dt}, D_s={D_s_effective}.")
    u = flux_J / FARADAY
    rate = D_s_effective / (radius*radius)
    c_bulk = state.c_bulk - 3*u*dt/radius
    target = u * radius / D_s_effective
    e1 = math.exp(PADE_POLES[0]*rate*dt)
    e2 = math.exp(PADE_POLES[1]*rate*dt)
    m1 = e1*state.m1 + (e1 - 1)*target/PADE_POLES[0]
    m2 = e2*state.m2 + (e2 - 1)*target/PADE_POLES[1]
    new_state = SolidRomState(c_bulk, m1, m2)
    c_surf = new_state.c_surf
    if not 0 < c_surf < c_s_max:
        raise SolidSaturationError("surface concentration", c_surf, where)
    if not 0 < c_bulk < c_s_max:
        raise SolidSaturationError("bulk concentration", c_bulk, where)
    return new_state


if __name__ == "__main__":
    import doctest, sys
    logger.addHandler(logging.StreamHandler(sys.stdout))
    logger.setLevel(logging.INFO)
    print(doctest.testmod())
