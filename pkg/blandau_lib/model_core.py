# -------------------------------------------------- #
# The model core: the homogeneous mean field of the  #
# driven chain and everything at the Bogoliubov      #
# level, the dispersion, the transform coefficients  #
# and the second-order steady state both in closed   #
# form and by integrating its equations of motion.   #
# All rates are in units of the loss rate γ.         #
# -------------------------------------------------- #

from typing import List
import logging

import numpy as np
from scipy import constants
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .enums import Branch
from .exceptions import (
    AmbiguousBranch, ConfigError, GaplessOrUnstable, NoRoot, NotConverged,
    NumericalError,
)
from .types import (
    BogoliubovTables, MeanField, ModelParams, PhysicalUnits, SecondOrderState,
    Tolerances,
)
from .utils import momentum_grid

logger = logging.getLogger('blandau')

GAMMA = 1.0

# ------------------------------------------------------
# Mean field
# ------------------------------------------------------

def drive_for(psi0:complex, Delta:float) -> complex:
    '''The drive amplitude that makes ψ0 a fixed point of the mean-field equation.'''
    return (Delta + 0.5j * GAMMA) * psi0

def mean_field_residual(n0:float, detuning:float, U:float, Omega2:float) -> float:
    '''
    The residual of the mean-field cubic

    ## Description
    Returns n0((d - U n0)² + γ²/4) - |Ω|² with d = δ + 2J. The homogeneous densities
    of the steady state are the positive zeros of this function.
    '''
    return n0 * ((detuning - U * n0) ** 2 + 0.25 * GAMMA ** 2) - Omega2

def is_stable(Delta:float, Un0:float) -> bool:
    '''
    The stability label of a mean-field root

    ## Description
    A root is flagged stable when the slope d|Ω|²/dn0 = Δ² - 2ΔUn0 + γ²/4 is
    positive, which is the sign of the k = 0 Bogoliubov determinant. The middle
    root of a bistable window is the only one with a negative slope.
    '''
    return Delta ** 2 - 2 * Delta * Un0 + 0.25 * GAMMA ** 2 > 0

def _build_mean_field(psi0:complex, params:ModelParams, Delta:float, Omega:complex) -> MeanField:
    n0 = abs(psi0) ** 2
    return MeanField(
        psi0 = complex(psi0),
        n0 = float(n0),
        Delta = float(Delta),
        Omega = complex(Omega),
        delta = float(Delta + params.U * n0 - 2 * params.J),
        branch_stable = is_stable(Delta, params.U * n0),
    )

def mean_field_roots(params:ModelParams, tolerances:Tolerances = Tolerances()) -> List[MeanField]:
    '''
    Finds every homogeneous mean-field state for a given drive

    ## Description
    When the drive amplitude is given together with the bare detuning the density
    solves a cubic with up to three positive roots. Since the bracket of the
    detuning is at least γ²/4, all roots lie in (0, 4|Ω|²/γ²]. This interval is
    scanned for sign changes and every change is refined with Brent's method.
    When the renormalized detuning is given the density follows directly, and when
    the target density is given there is nothing to solve.

    ## Parameters
    - `params` (ModelParams): The model parameters
    - `tolerances` (Tolerances): The residual tolerance and the scan resolution

    ## Returns
    - `list`: The mean-field states sorted by increasing density

    ## Raises
    - `NoRoot`: When the cubic has no positive root
    - `NumericalError`: When a refined root misses the residual tolerance
    '''
    if params.n0_target is not None:
        n0 = params.n0_target
        Delta = params.Delta if params.Delta is not None else params.delta - params.U * n0 + 2 * params.J
        psi0 = np.sqrt(n0)
        return [_build_mean_field(psi0, params, Delta, drive_for(psi0, Delta))]

    Omega = complex(params.Omega)
    Omega2 = abs(Omega) ** 2
    if Omega2 == 0:
        raise NoRoot("A vanishing drive has no positive mean-field density")

    if params.Delta is not None:
        return [_build_mean_field(Omega / (params.Delta + 0.5j * GAMMA), params, params.Delta, Omega)]

    detuning = params.delta + 2 * params.J
    residual = lambda n: mean_field_residual(n, detuning, params.U, Omega2)

    grid = np.linspace(0.0, 4 * Omega2 / GAMMA ** 2, tolerances.mean_field_scan_points + 1)
    values = residual(grid)
    changes = np.flatnonzero(np.sign(values[:-1]) * np.sign(values[1:]) <= 0)

    densities = []
    for index in changes:
        low, high = grid[index], grid[index + 1]
        if values[index] == 0:
            root = low
        elif values[index + 1] == 0:
            root = high
        else:
            root = brentq(residual, low, high, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
        if root > 0 and (not densities or not np.isclose(root, densities[-1], rtol=1e-12)):
            densities.append(root)

    if not densities:
        raise NoRoot(f"The mean-field cubic has no positive root for |Ω|²={Omega2:.6g}, δ={params.delta}")

    roots = []
    for n0 in densities:
        if abs(residual(n0)) > tolerances.mean_field_residual * Omega2:
            raise NumericalError(f"The mean-field root n0={n0:.12g} misses the residual tolerance")
        Delta = detuning - params.U * n0
        roots.append(_build_mean_field(Omega / (Delta + 0.5j * GAMMA), params, Delta, Omega))

    logger.debug(f"Mean-field roots: {[round(one.n0, 9) for one in roots]}")
    return roots

def solve_mean_field(params:ModelParams, tolerances:Tolerances = Tolerances()) -> MeanField:
    '''
    Solves the homogeneous mean field of the driven chain

    ## Description
    With a target density the condensate amplitude is chosen real and positive and
    the drive Ω = (Δ + iγ/2)ψ0 carries the phase. With a given drive the branch
    selector of the parameters picks one of the roots of the cubic.

    ## Parameters
    - `params` (ModelParams): The model parameters

    ## Returns
    - `MeanField`: The selected mean-field state

    ## Raises
    - `NoRoot`: When no positive density solves the cubic
    - `AmbiguousBranch`: When several roots exist and no (usable) branch is given
    '''
    roots = mean_field_roots(params, tolerances)
    if len(roots) == 1:
        return roots[0]

    if params.branch is None:
        raise AmbiguousBranch(f"The drive lies in the bistable window with densities {[one.n0 for one in roots]}, select a branch")
    if params.branch is Branch.middle and len(roots) < 3:
        raise AmbiguousBranch("The middle branch does not exist for this drive")

    return roots[{Branch.lower: 0, Branch.middle: 1, Branch.upper: -1}[params.branch]]

# ------------------------------------------------------
# Bogoliubov level
# ------------------------------------------------------

def epsilon_at(tables:BogoliubovTables, k):
    '''The single-particle energy ε_k = -Δ + 2J(1 - cos k) at arbitrary real momenta.'''
    return -tables.Delta + 2 * tables.J * (1 - np.cos(k))

def omega_at(tables:BogoliubovTables, k):
    '''The closed-form Bogoliubov frequency at arbitrary real momenta.'''
    eps = epsilon_at(tables, k)
    return np.sqrt(eps * (eps + 2 * tables.Un0))

def dispersion_tables(mf:MeanField, params:ModelParams) -> BogoliubovTables:
    '''
    Builds the Bogoliubov tables on the momentum grid of the chain

    ## Description
    Substituting the renormalized detuning into ε_k = -δ + Un0 - 2J cos k gives
    ε_k = -Δ + 2J(1 - cos k), which is positive for every k when Δ < 0.

    ## Parameters
    - `mf` (MeanField): The mean-field state
    - `params` (ModelParams): The model parameters, only L, J and U are used

    ## Returns
    - `BogoliubovTables`: The tables in Fourier order

    ## Raises
    - `GaplessOrUnstable`: When Δ ≥ 0 or some ε_k(ε_k + 2Un0) is not positive
    '''
    if mf.Delta >= 0:
        raise GaplessOrUnstable(f"The renormalized detuning Δ={mf.Delta} must be negative for a gapped spectrum")

    Un0 = params.U * mf.n0
    k_grid = momentum_grid(params.L)
    eps = -mf.Delta + 2 * params.J * (1 - np.cos(k_grid))
    omega2 = eps * (eps + 2 * Un0)
    if np.any(omega2 <= 0):
        raise GaplessOrUnstable("The Bogoliubov spectrum has a non-positive ω_k²")

    omega = np.sqrt(omega2)
    root_plus = np.sqrt(eps + 2 * Un0)
    root_eps = np.sqrt(eps)

    return BogoliubovTables(
        k_grid = k_grid,
        eps = eps,
        omega = omega,
        u = (root_plus + root_eps) / (2 * np.sqrt(omega)),
        v = (root_plus - root_eps) / (2 * np.sqrt(omega)),
        J = float(params.J),
        Delta = float(mf.Delta),
        Un0 = float(Un0),
    )

def tables_from_energies(J:float, Delta:float, Un0:float, L:int = 2) -> BogoliubovTables:
    '''
    Bogoliubov tables labelled only by (J, Δ, Un0)

    ## Description
    The dispersion depends on the interaction only through Un0, so the tables are
    built with U = 1. This is used wherever the continuous dispersion is the only
    thing needed, e.g. when sweeping the detuning.
    '''
    params = ModelParams(L=L, J=J, U=1.0, Delta=Delta, n0_target=max(Un0, 1e-300))
    return dispersion_tables(solve_mean_field(params), params)

def pair_coupling(tables:BogoliubovTables, mf:MeanField) -> complex:
    '''The pair amplitude Uψ0², written with Un0 so that U itself is not needed.'''
    return tables.Un0 * mf.psi0 ** 2 / mf.n0

def bogoliubov_steady_state(tables:BogoliubovTables, mf:MeanField) -> SecondOrderState:
    '''
    The closed-form Bogoliubov steady state

    ## Description
    n_k = ½(Un0)²/(ω_k² + γ²/4) and c_k = -(Uψ0²/2)(ε_k + Un0 + iγ/2)/(ω_k² + γ²/4).
    The quasiparticle occupations v_k² and anomalous correlations
    u_k v_k γ/(γ + 2iω_k) are attached as well.
    '''
    denominator = tables.omega ** 2 + 0.25 * GAMMA ** 2
    return SecondOrderState(
        n = 0.5 * tables.Un0 ** 2 / denominator,
        c = -0.5 * pair_coupling(tables, mf) * (tables.eps + tables.Un0 + 0.5j * GAMMA) / denominator,
        n_chi = tables.v ** 2,
        c_chi = tables.u * tables.v * GAMMA / (GAMMA + 2j * tables.omega),
    )

def _second_order_rhs(tables:BogoliubovTables, mf:MeanField):
    L = tables.L
    coupling = pair_coupling(tables, mf)
    rotation = 2 * tables.eps + 2 * tables.Un0 - 1j * GAMMA

    def rhs(_, y):
        n, c = y[:L], y[L:]
        dn = -GAMMA * n + 2 * np.imag(coupling * np.conj(c))
        dc = -1j * (rotation * c + coupling * (2 * n + 1))
        return np.concatenate([dn, dc])

    return rhs

def bogoliubov_trajectory(tables:BogoliubovTables, mf:MeanField, times:np.ndarray, dt:float = 0.05):
    '''
    Integrates the second-order equations of motion from zero initial data

    ## Returns
    - `tuple`: The arrays n(t) and c(t) of shape (len(times), L)
    '''
    L = tables.L
    times = np.asarray(times, dtype=float)
    solution = solve_ivp(
        _second_order_rhs(tables, mf),
        (0.0, float(times[-1])),
        np.zeros(2 * L, dtype=complex),
        method = 'DOP853',
        t_eval = times,
        max_step = dt,
        rtol = 1e-12,
        atol = 1e-14,
    )
    if not solution.success:
        raise NumericalError(f"The Bogoliubov equations could not be integrated: {solution.message}")

    return solution.y[:L].T.real, solution.y[L:].T

def integrate_bogoliubov_odes(
    tables:BogoliubovTables,
    mf:MeanField,
    t_end:float = 60.0,
    dt:float = 0.05,
    tolerances:Tolerances = Tolerances(),
    check_convergence:bool = True,
) -> SecondOrderState:
    '''
    The long-time limit of the second-order equations of motion

    ## Description
    The linear equations for n_k and c_k are integrated from zero with an eighth
    order Runge-Kutta method whose step never exceeds `dt`. This is an independent
    route to the closed-form steady state.

    ## Parameters
    - `t_end` (float): The final time, at least 40/γ is recommended
    - `dt` (float): The largest step of the integrator
    - `check_convergence` (bool): Whether to compare n at t_end and t_end - 1/γ

    ## Raises
    - `ConfigError`: When t_end is shorter than 1/γ or dt is not positive
    - `NotConverged`: When n_k still changed by more than the tolerance over the last 1/γ
    '''
    if t_end <= 1 / GAMMA or dt <= 0:
        raise ConfigError(f"Integration needs t_end > 1/γ and dt > 0, got t_end={t_end}, dt={dt}")
    if t_end < 40 / GAMMA:
        logger.warning(f"t_end={t_end} is shorter than the recommended 40/γ")

    n, c = bogoliubov_trajectory(tables, mf, np.array([t_end - 1 / GAMMA, t_end]), dt)
    change = np.max(np.abs(n[1] - n[0]))
    if check_convergence and change > tolerances.ode_steady:
        raise NotConverged(f"n_k changed by {change:.3g} during the last 1/γ", t=t_end)

    logger.debug(f"Bogoliubov equations integrated to t={t_end}, last change {change:.3g}")
    return SecondOrderState(n=n[1], c=c[1])

# ------------------------------------------------------
# Units
# ------------------------------------------------------

def gamma_per_second(units:PhysicalUnits) -> float:
    '''The loss rate γ in s⁻¹ from the linewidth ħγ.'''
    return units.hbar_gamma_ueV * 1e-6 * constants.e / constants.hbar

def to_physical(value, units:PhysicalUnits, kind:str = 'energy'):
    '''
    Converts a quantity in units of γ to laboratory units

    ## Parameters
    - `value`: The value in units of γ
    - `kind` (str): `energy` gives μeV, `rate` gives s⁻¹

    ## Raises
    - `ConfigError`: When the kind is unknown
    '''
    if kind == 'energy':
        return value * units.hbar_gamma_ueV
    if kind == 'rate':
        return value * gamma_per_second(units)
    raise ConfigError(f"Unknown unit kind `{kind}`")

def to_gamma_units(value, units:PhysicalUnits, kind:str = 'energy'):
    '''The inverse of `to_physical`.'''
    if kind == 'energy':
        return value / units.hbar_gamma_ueV
    if kind == 'rate':
        return value / gamma_per_second(units)
    raise ConfigError(f"Unknown unit kind `{kind}`")
