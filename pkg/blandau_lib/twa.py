# -------------------------------------------------- #
# The truncated Wigner sampler: independent noisy    #
# classical trajectories of the driven chain, whose  #
# symmetrically ordered moments estimate the photon  #
# momentum distribution after subtracting the half   #
# quantum of vacuum noise.                           #
# -------------------------------------------------- #

from dataclasses import dataclass, replace
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple, Union
import logging

import numpy as np
from joblib import Parallel, delayed

from .exceptions import NumericalBlowup
from .model_core import GAMMA
from .types import MeanField, ModelParams, Tolerances, TrajectoryEnsembleResult, TwaConfig
from .utils import momentum_grid, trajectory_rng

logger = logging.getLogger('blandau')

# One generator, or one per row of a batch
Streams = Union[np.random.Generator, Sequence[np.random.Generator]]

class SplitStepPropagator():
    '''
    A symmetric split-step integrator of the stochastic field equation

    ## Description
    The field obeys i dφ_j = [(-δ - iγ/2)φ_j - J(φ_(j+1) + φ_(j-1)) + U(|φ_j|² - 1)φ_j
    + Ω] dt + sqrt(γ/2) dW_j. The linear part (hopping, detuning and loss) is
    diagonal in momentum space and is applied exactly for half a step on either
    side of the pointwise part, which applies the Kerr phase, the drive and the
    noise increment.

    A field of shape (B, L) holds a batch of B trajectories, one per row. The
    noise of row b is then drawn from the b-th generator of the sequence passed
    to `propagate`, in the order a single trajectory would draw it.

    ## Parameters
    - `params` (ModelParams): L, J and U of the chain
    - `mf` (MeanField): The bare detuning and the drive
    - `dt` (float): The step in units of 1/γ
    - `loss` (float): The loss rate, 0 gives the lossless noise-free equation
    - `drive` (complex): Overrides the drive of the mean field
    '''

    def __init__(self, params:ModelParams, mf:MeanField, dt:float, loss:float = GAMMA, drive:Optional[complex] = None):
        self.dt = dt
        self.U = params.U
        self.drive = mf.Omega if drive is None else drive
        self.noise_amplitude = np.sqrt(loss / 2)

        k_grid = momentum_grid(params.L)
        linear = -mf.delta - 2 * params.J * np.cos(k_grid) - 0.5j * loss
        self.kcoeff = np.exp(-1j * linear * dt / 2)

    def _kpropagate(self, field:np.ndarray) -> np.ndarray:
        return np.fft.ifft(self.kcoeff * np.fft.fft(field, axis=-1), axis=-1)

    @staticmethod
    def _increment(shape:Tuple[int, ...], rng:Streams) -> np.ndarray:
        if isinstance(rng, np.random.Generator):
            return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        if len(rng) != shape[0]:
            raise ValueError(f"A batch of {shape[0]} trajectories needs as many streams, got {len(rng)}")
        return np.stack([one.standard_normal(shape[-1]) + 1j * one.standard_normal(shape[-1]) for one in rng])

    def _xpropagate(self, field:np.ndarray, rng:Streams) -> np.ndarray:
        field = field * np.exp(-1j * self.U * (np.abs(field) ** 2 - 1) * self.dt) - 1j * self.drive * self.dt
        if self.noise_amplitude:
            # ⟨dW* dW⟩ = dt, split evenly between the two quadratures
            dW = self._increment(field.shape, rng) * np.sqrt(self.dt / 2)
            field = field - 1j * self.noise_amplitude * dW
        return field

    def propagate(self, field:np.ndarray, rng:Streams) -> np.ndarray:
        field = self._kpropagate(field)
        field = self._xpropagate(field, rng)
        return self._kpropagate(field)

@lru_cache(maxsize=8)
def _propagator(params:ModelParams, mf:MeanField, dt:float, loss:float, drive:Optional[complex]) -> SplitStepPropagator:
    return SplitStepPropagator(params, mf, dt, loss, drive)

def blowup_limit(mf:MeanField, tolerances:Tolerances = Tolerances()) -> float:
    return tolerances.blowup_factor * np.sqrt(max(mf.n0, 1.0))

def step_trajectory(
    state:np.ndarray,
    dt:float,
    rng:Streams,
    params:ModelParams,
    mf:MeanField,
    loss:float = GAMMA,
    drive:Optional[complex] = None,
    tolerances:Tolerances = Tolerances(),
) -> np.ndarray:
    '''
    Advances a classical field, or a batch of them, by one step

    ## Parameters
    - `state` (np.ndarray): The complex site amplitudes φ_j, shape (L,) or (B, L)
    - `dt` (float): The step in units of 1/γ
    - `rng` (np.random.Generator): The stream of this trajectory, or one stream per row of a batch

    ## Returns
    - `np.ndarray`: The field after the step

    ## Raises
    - `NumericalBlowup`: When an amplitude leaves the physical range, with the
    row of the batch as trajectory
    '''
    field = _propagator(params, mf, dt, loss, drive).propagate(state, rng)
    limit = blowup_limit(mf, tolerances)
    inside = np.abs(field) < limit
    if not np.all(inside):
        row = int(np.flatnonzero(~inside.all(axis=-1))[0]) if field.ndim > 1 else None
        raise NumericalBlowup(f"The field amplitude exceeded {limit:.3g}", trajectory=row)
    return field

@dataclass
class TrajectoryMoments():
    '''The block averaged moments of one trajectory.'''

    block_power: np.ndarray
    block_amplitude: np.ndarray
    power_square_sum: np.ndarray
    samples: int

def initial_field(mf:MeanField, L:int, rng:np.random.Generator) -> np.ndarray:
    '''The mean field plus half a quantum of Gaussian vacuum noise per mode.'''
    return mf.psi0 + 0.5 * (rng.standard_normal(L) + 1j * rng.standard_normal(L))

def run_batch(
    params:ModelParams,
    mf:MeanField,
    cfg:TwaConfig,
    indices:Sequence[int],
    tolerances:Tolerances = Tolerances(),
) -> List[TrajectoryMoments]:
    '''
    Runs a batch of trajectories side by side and collects their samples

    ## Description
    After the burn-in a sample is taken every `sample_interval`. Each sample is
    the unitary transform φ̃_k = L^(-1/2) Σ_j e^(-ikj) φ_j; its power and its
    k = 0 amplitude are averaged in blocks of consecutive samples. Row b of the
    batch is trajectory `indices[b]` with its own random stream.

    ## Raises
    - `NumericalBlowup`: With the trajectory index attached
    '''
    rngs = [trajectory_rng(cfg.master_seed, index) for index in indices]
    L = params.L
    B = len(indices)
    field = np.stack([initial_field(mf, L, rng) for rng in rngs])

    burn_steps = int(round(cfg.burn_in / cfg.dt))
    interval_steps = max(int(round(cfg.sample_interval / cfg.dt)), 1)
    block = min(cfg.block_size, cfg.samples_per_trajectory)
    n_blocks = cfg.samples_per_trajectory // block
    n_samples = n_blocks * block

    power = np.empty((B, n_samples, L))
    amplitude = np.empty((B, n_samples), dtype=complex)
    try:
        for _ in range(burn_steps):
            field = step_trajectory(field, cfg.dt, rngs, params, mf, tolerances=tolerances)
        for sample in range(n_samples):
            for _ in range(interval_steps):
                field = step_trajectory(field, cfg.dt, rngs, params, mf, tolerances=tolerances)
            transformed = np.fft.fft(field, axis=-1, norm='ortho')
            power[:, sample] = np.abs(transformed) ** 2
            amplitude[:, sample] = transformed[:, 0]
    except NumericalBlowup as exc:
        index = indices[exc.trajectory]
        raise NumericalBlowup(f"Trajectory {index}: {exc}", trajectory=index)

    return [
        TrajectoryMoments(
            block_power = power[row].reshape(n_blocks, block, L).mean(axis=1),
            block_amplitude = amplitude[row].reshape(n_blocks, block).mean(axis=1),
            power_square_sum = (power[row] ** 2).sum(axis=0),
            samples = n_samples,
        )
        for row in range(B)
    ]

def run_trajectory(
    params:ModelParams,
    mf:MeanField,
    cfg:TwaConfig,
    index:int,
    tolerances:Tolerances = Tolerances(),
) -> TrajectoryMoments:
    '''Runs trajectory `index` on its own.'''
    return run_batch(params, mf, cfg, [index], tolerances)[0]

def trajectory_batches(cfg:TwaConfig) -> List[range]:
    '''The fixed partition of the trajectory indices into batches of `batch_size`.'''
    return [
        range(first, min(first + cfg.batch_size, cfg.n_trajectories))
        for first in range(0, cfg.n_trajectories, cfg.batch_size)
    ]

def merge_moments(moments:List[TrajectoryMoments], cfg:TwaConfig, L:int) -> TrajectoryEnsembleResult:
    '''
    Reduces the trajectory moments in index order

    ## Description
    The vacuum contribution ½ is subtracted from every mode. At k = 0 the
    coherent part |⟨φ̃_0⟩|² is removed as well and reported as the condensate
    density. The naive standard error of the samples is multiplied by the
    square root of the autocorrelation inflation found from the spread of the
    block means.
    '''
    block_power = np.concatenate([one.block_power for one in moments])
    block_amplitude = np.concatenate([one.block_amplitude for one in moments])
    samples = sum(one.samples for one in moments)

    mean_power = block_power.mean(axis=0)
    mean_amplitude = block_amplitude.mean()

    n_k = mean_power - 0.5
    n_k[0] -= abs(mean_amplitude) ** 2

    sample_variance = sum(one.power_square_sum for one in moments) / samples - mean_power ** 2
    naive = np.sqrt(np.clip(sample_variance, 0, None) / max(samples - 1, 1))
    if len(block_power) > 1:
        block_error = block_power.std(axis=0, ddof=1) / np.sqrt(len(block_power))
        with np.errstate(divide='ignore', invalid='ignore'):
            inflation = np.where(naive > 0, (block_error / naive) ** 2, 1.0)
    else:
        inflation = np.ones(L)

    return TrajectoryEnsembleResult(
        n_k = n_k,
        stderr_k = naive * np.sqrt(np.maximum(inflation, 1.0)),
        samples_used = samples,
        condensate_density = float(abs(mean_amplitude) ** 2 / L),
        inflation_k = inflation,
        config = cfg,
    )

def simulate_ensemble(
    params:ModelParams,
    mf:MeanField,
    cfg:TwaConfig,
    workers:int = 1,
    tolerances:Tolerances = Tolerances(),
) -> TrajectoryEnsembleResult:
    '''
    Estimates the momentum distribution from an ensemble of trajectories

    ## Description
    Every trajectory owns the random stream derived from (master_seed, index).
    The trajectories are propagated in the fixed batches of `trajectory_batches`
    and the moments are merged in index order, so the result is the same for
    any number of workers.

    ## Parameters
    - `params` (ModelParams): The model parameters
    - `mf` (MeanField): The mean field the trajectories start from
    - `cfg` (TwaConfig): The sampling configuration
    - `workers` (int): The number of joblib workers

    ## Returns
    - `TrajectoryEnsembleResult`: n_k with standard errors

    ## Raises
    - `ConfigError`: When dt violates the stability bound
    - `NumericalBlowup`: When a trajectory blows up, with its index
    '''
    cfg.check_step(params, mf)
    logger.info(f"Sampling {cfg.n_trajectories} trajectories with {cfg.samples_per_trajectory} samples each (seed {cfg.master_seed})")

    batches = Parallel(n_jobs=workers)(
        delayed(run_batch)(params, mf, cfg, indices, tolerances)
        for indices in trajectory_batches(cfg)
    )
    moments = [one for batch in batches for one in batch]
    result = merge_moments(moments, cfg, params.L)

    negative = np.flatnonzero(result.n_k < -3 * result.stderr_k)
    if len(negative):
        logger.warning(f"{len(negative)} modes have significantly negative occupations")
    return result

def step_bias_check(
    params:ModelParams,
    mf:MeanField,
    cfg:TwaConfig,
    workers:int = 1,
    tolerances:Tolerances = Tolerances(),
) -> dict:
    '''
    Compares the ensemble at dt with the ensemble at dt/2

    ## Returns
    - `dict`: The per-mode change in units of the combined standard error, its
    maximum and whether every change stays below one standard error
    '''
    coarse = simulate_ensemble(params, mf, cfg, workers, tolerances)
    fine = simulate_ensemble(params, mf, replace(cfg, dt=cfg.dt / 2), workers, tolerances)

    combined = np.sqrt(coarse.stderr_k ** 2 + fine.stderr_k ** 2)
    ratio = np.abs(fine.n_k - coarse.n_k) / combined
    return {
        'ratio_k': ratio,
        'max_ratio': float(ratio.max()),
        'passed': bool(np.all(np.abs(fine.n_k - coarse.n_k) < combined)),
    }
