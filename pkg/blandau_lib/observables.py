# -------------------------------------------------- #
# Estimators that turn the steady state into numbers #
# seen in the laboratory: the far-field emission     #
# angle of a mode and the photon flux collected in a #
# momentum bin.                                      #
# -------------------------------------------------- #

import numpy as np
from scipy import constants

from .exceptions import ConfigError, Evanescent
from .model_core import gamma_per_second
from .types import PhysicalUnits

def laser_angular_frequency(units:PhysicalUnits) -> float:
    '''ω_L in rad/s from the photon energy ħω_L.'''
    return units.omega_L_eV * constants.e / constants.hbar

def angle_of_mode(k:float, units:PhysicalUnits = PhysicalUnits()) -> float:
    '''
    The far-field emission angle of the lattice momentum k

    ## Description
    A photon of dimensionless in-plane momentum k leaves the array at
    sin θ_k = c k / (ω_L Δx). The angle is odd in k.

    ## Parameters
    - `k` (float): The lattice momentum
    - `units` (PhysicalUnits): The laser energy and the cavity spacing

    ## Returns
    - `float`: The angle in degrees

    ## Raises
    - `Evanescent`: When |sin θ_k| exceeds one
    '''
    sine = constants.c * k / (laser_angular_frequency(units) * units.dx_um * 1e-6)
    if abs(sine) > 1:
        raise Evanescent(f"The mode k={k} does not propagate, sin θ = {sine:.4g}")
    return float(np.degrees(np.arcsin(sine)))

def flux_in_bin(
    n_k_value:float,
    L:int,
    delta_k_frac:float,
    units:PhysicalUnits = PhysicalUnits(),
    eps_eff:float = 1.0,
) -> float:
    '''
    The photon flux emitted into a momentum bin

    ## Description
    The momentum density of escaping photons is dΦ/dk = L n_k γ/(2π). A bin of
    width 2π·δk_frac therefore collects Φ = L n_k γ δk_frac, multiplied by the
    overall detection efficiency.

    ## Parameters
    - `n_k_value` (float): The occupation of the modes in the bin
    - `L` (int): The number of cavities
    - `delta_k_frac` (float): The bin width as a fraction of the Brillouin zone
    - `eps_eff` (float): The detection efficiency

    ## Returns
    - `float`: The flux in photons per second

    ## Raises
    - `ConfigError`: When an input is out of range
    '''
    if n_k_value < 0 or not 0 < delta_k_frac <= 1 or eps_eff < 0:
        raise ConfigError("The flux needs n_k ≥ 0, δk in (0, 1] and a non-negative efficiency")
    return eps_eff * L * n_k_value * gamma_per_second(units) * delta_k_frac
