# -------------------------------------------------- #
# The linear response of the steady state to a       #
# static random on-site potential, and the estimate  #
# of how much disorder the scattering peaks survive. #
# -------------------------------------------------- #

from typing import Iterable, Optional, Tuple
import logging

import numpy as np
from joblib import Parallel, delayed

from .exceptions import ConfigError, SingularResponse
from .model_core import GAMMA, pair_coupling
from .types import (
    BogoliubovTables, DisorderEnsemble, DisorderPotential, MeanField,
    PhysicalUnits, Tolerances,
)

logger = logging.getLogger('blandau')

# Typical height of a scattering peak at U = 0.1γ, n0 = 100
LITERATURE_PEAK = 2e-3

def sample_potential(L:int, sigma:float, seed:int) -> DisorderPotential:
    '''
    Draws a white Gaussian on-site potential

    ## Description
    The site values are independent normal deviates of width `sigma` with the
    sample mean removed, since a uniform shift is absorbed into the detuning.
    The transform is the unitary one, V_k = L^(-1/2) Σ_j V_j e^(-ikj).

    ## Raises
    - `ConfigError`: When sigma is negative
    '''
    if sigma < 0:
        raise ConfigError(f"The disorder strength must be non-negative, got {sigma}")

    rng = np.random.Generator(np.random.PCG64(int(seed)))
    V_site = sigma * rng.standard_normal(L)
    V_site -= V_site.mean()

    return DisorderPotential(
        V_site = V_site,
        V_k = np.fft.fft(V_site, norm='ortho'),
        sigma = float(sigma),
        seed = int(seed),
    )

def response_closed_form(V_k:np.ndarray, mf:MeanField, tables:BogoliubovTables) -> np.ndarray:
    '''δn_k = |V_k ψ0|² (ε_k² + γ²/4)/(ω_k² + γ²/4)².'''
    return np.abs(V_k) ** 2 * mf.n0 * (tables.eps ** 2 + 0.25 * GAMMA ** 2) / (tables.omega ** 2 + 0.25 * GAMMA ** 2) ** 2

def response_matrix(mf:MeanField, tables:BogoliubovTables) -> np.ndarray:
    '''The stacked 2x2 response matrices L_k acting on (δψ_k, δψ*_-k).'''
    diagonal = tables.eps + tables.Un0
    coupling = pair_coupling(tables, mf)

    matrix = np.empty((tables.L, 2, 2), dtype=complex)
    matrix[:, 0, 0] = diagonal - 0.5j * GAMMA
    matrix[:, 0, 1] = coupling
    matrix[:, 1, 0] = -np.conj(coupling)
    matrix[:, 1, 1] = -diagonal - 0.5j * GAMMA
    return matrix

def linear_response(
    pot:DisorderPotential,
    mf:MeanField,
    tables:BogoliubovTables,
    tolerances:Tolerances = Tolerances(),
) -> Tuple[np.ndarray, np.ndarray]:
    '''
    The first-order change of the momentum distribution due to a potential

    ## Description
    Linearizing the mean-field equation around ψ0 gives for every mode a 2x2
    system L_k (δψ_k, δψ*_-k) = (-V_k ψ0, V_k ψ0*). The system is solved
    directly and also evaluated in closed form, and both results are returned
    so that they can be checked against each other. The k = 0 entry vanishes
    because the potential has zero mean.

    ## Returns
    - `tuple`: (closed form δn_k, direct solve δn_k)

    ## Raises
    - `SingularResponse`: When some |det L_k| is below the tolerance
    '''
    matrix = response_matrix(mf, tables)
    determinant = np.linalg.det(matrix)
    if np.any(np.abs(determinant) < tolerances.response_det):
        raise SingularResponse(f"The response matrix is singular, min |det| = {np.min(np.abs(determinant)):.3g}")

    rhs = np.stack([-pot.V_k * mf.psi0, pot.V_k * np.conj(mf.psi0)], axis=-1)
    solution = np.linalg.solve(matrix, rhs[..., None])[..., 0]

    return response_closed_form(pot.V_k, mf, tables), np.abs(solution[:, 0]) ** 2

def _member(L:int, sigma:float, seed:int, mf:MeanField, tables:BogoliubovTables) -> np.ndarray:
    return response_closed_form(sample_potential(L, sigma, seed).V_k, mf, tables)

def ensemble_response(
    L:int,
    sigma:float,
    seeds:Iterable[int],
    mf:MeanField,
    tables:BogoliubovTables,
    workers:int = 1,
) -> DisorderEnsemble:
    '''
    Averages the disorder response over independent realizations

    ## Description
    Every seed is one copy of the chain. The members are computed by joblib
    workers and merged in seed order, so the result does not depend on the
    number of workers. The expectation of white noise with the mean removed is
    |V_k|² = σ²(1 - 1/L) for k ≠ 0.
    '''
    seeds = [int(seed) for seed in seeds]
    members = Parallel(n_jobs=workers)(
        delayed(_member)(L, sigma, seed, mf, tables) for seed in seeds
    )
    per_seed = np.array(members).reshape(len(seeds), L)
    mean = per_seed.mean(axis=0)

    flat = np.full(L, sigma ** 2 * (1 - 1 / L))
    flat[0] = 0.0
    expected = response_closed_form(np.sqrt(flat), mf, tables)

    variance_ratio = float(np.var(mean[1:] / expected[1:])) if sigma > 0 else 0.0
    logger.info(f"Disorder ensemble of {len(seeds)} seeds, variance ratio {variance_ratio:.4g}")

    return DisorderEnsemble(
        mean = mean,
        per_seed = per_seed,
        expected = expected,
        variance_ratio = variance_ratio,
        seeds = seeds,
    )

def disorder_threshold(omega_peak:float, dn_peak:float, n0:float) -> float:
    '''
    The largest disorder strength that keeps the scattering peaks visible

    ## Description
    With δn_k ~ n0 (V_k/ω_k)², disorder peaks stay below the scattering peak of
    height δn_peak at frequency ω_peak when σ ≲ ω_peak sqrt(δn_peak/n0). The
    result carries the units of `omega_peak`.

    ## Raises
    - `ConfigError`: When an input is negative or n0 is not positive
    '''
    if omega_peak < 0 or dn_peak < 0 or n0 <= 0:
        raise ConfigError("The threshold needs ω_peak ≥ 0, δn_peak ≥ 0 and n0 > 0")
    return omega_peak * np.sqrt(dn_peak / n0)

def threshold_report(
    omega_peak:float,
    n0:float,
    units:PhysicalUnits,
    dn_peak:Optional[float] = None,
) -> dict:
    '''
    The disorder threshold with its provenance

    ## Description
    A measured peak height (e.g. from a hierarchy run) is used when given, the
    typical literature height otherwise. The frequency is in units of γ.
    '''
    provenance = 'hoc' if dn_peak is not None else 'literature'
    if dn_peak is None:
        dn_peak = LITERATURE_PEAK

    sigma_max = disorder_threshold(omega_peak, dn_peak, n0)
    return {
        'omega_peak': float(omega_peak),
        'dn_peak': float(dn_peak),
        'n0': float(n0),
        'provenance': provenance,
        'sigma_max_gamma': float(sigma_max),
        'sigma_max_ueV': float(sigma_max * units.hbar_gamma_ueV),
    }
