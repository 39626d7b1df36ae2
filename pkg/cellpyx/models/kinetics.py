"""
Interfacial kinetics: concentration-dependent solid diffusivity, exchange
current density and the two-part overpotential (charge transfer plus the
intercalation term that switches branch at a critical stoichiometry).

Programmer: cellpyx team
Since: 2024-05
"""

import math

from cellpyx.cells import GAS_CONSTANT, FARADAY

import logging
logger = logging.getLogger(__name__)


def effective_diffusivity(c_surf:float, c_bulk:float, mu_k:float, D_ref_at_T:float) -> float:
    """
    >>> effective_diffusivity(1000.0, 1000.0, 1e-4, 2e-14)
    2e-14
    >>> effective_diffusivity(1000.0, 3000.0, 0.0, 2e-14)
    2e-14
    >>> bool(math.isclose(effective_diffusivity(1000.0, 3000.0, 1e-4, 2e-14), 2e-14*math.exp(0.2), rel_tol=1e-15))
    True
    """
    return D_ref_at_T * math.exp(mu_k * abs(c_surf - c_bulk))


def exchange_current(c_surf:float, c_s_max:float, c_e:float, k0_at_T:float) -> float:
    """
    i0 = F k0 sqrt(c_surf (c_max - c_surf) c_e), in A/m2.

    >>> value = exchange_current(15000.0, 30000.0, 1200.0, 3e-11)
    >>> bool(math.isclose(value, FARADAY*3e-11*math.sqrt(15000.0*15000.0*1200.0), rel_tol=1e-15))
    True
    >>> exchange_current(15000.0, 30000.0, 1200.0, 3e-11) > exchange_current(14000.0, 30000.0, 1200.0, 3e-11)
    True
    >>> exchange_current(30000.0, 30000.0, 1200.0, 3e-11)
    Traceback (most recent call last):
    ...
    ValueError: exchange_current: need 0 < c_surf < c_s_max and c_e > 0, got c_surf=30000.0, c_s_max=30000.0, c_e=1200.0.
    """
    if not (0 < c_surf < c_s_max and c_e > 0):
        raise ValueError(f"exchange_current: need 0 < c_surf < c_s_max and c_e > 0, got c_surf={c_surf}, c_s_max={c_s_max}, c_e={c_e}.")
    return FARADAY * k0_at_T * math.sqrt(c_surf * (c_s_max - c_surf) * c_e)


def charge_transfer_overpotential(J_k:float, i_0k:float, alpha:float, temp_K:float) -> float:
    return GAS_CONSTANT * temp_K / (alpha * FARADAY) * math.asinh(J_k / (2 * i_0k))


def intercalation_overpotential(J_k:float, c_surf:float, c_s_max:float, theta_c:float, rho:float) -> float:
    """
    The excess driving force of (de)intercalation. Below the critical
    stoichiometry it grows as the particle empties, above it as the particle fills.

    >>> intercalation_overpotential(2.0, 15000.0, 30000.0, 0.6, 1e-3)
    0.004
    >>> intercalation_overpotential(2.0, 24000.0, 30000.0, 0.6, 1e-3)
    0.01
    """
    if c_surf / c_s_max < theta_c:
        return rho * c_s_max / c_surf * J_k
    return rho * c_s_max / (c_s_max - c_surf) * J_k


def kinetic_overpotential(J_k:float, i_0k:float, c_surf:float, c_s_max:float, theta_c:float,
                          rho:float, alpha:float, temp_K:float) -> float:
    """
    >>> kinetic_overpotential(0.0, 1.0, 15000.0, 30000.0, 0.5, 1e-3, 0.5, 298.15)
    0.0
    >>> a = kinetic_overpotential(0.7, 1.0, 15000.0, 30000.0, 0.5, 0.0, 0.5, 298.15)
    >>> b = kinetic_overpotential(-0.7, 1.0, 15000.0, 30000.0, 0.5, 0.0, 0.5, 298.15)
    >>> a > 0 and a == -b
    True
    """
    return (charge_transfer_overpotential(J_k, i_0k, alpha, temp_K)
          + intercalation_overpotential(J_k, c_surf, c_s_max, theta_c, rho))


def intercalation_current_density(current_I:float, a_k:float, area:float, thickness:float) -> float:
    """
    Pore-wall current density of an electrode carrying the full cell current (A/m2).

    >>> round(intercalation_current_density(166.0, 1e6, 2.0, 83e-6), 12)
    1.0
    """
    return current_I / (a_k * area * thickness)


if __name__ == "__main__":
    import doctest, sys
    logger.addHandler(logging.StreamHandler(sys.stdout))
    logger.setLevel(logging.INFO)
    print(doctest.testmod())
