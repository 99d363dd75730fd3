# ------------------------------------------------- #
# Contains a number of useful functions and methods #
# used in the blandau library: the momentum grid    #
# conventions, the index tables for momentum sums,  #
# and the seeding of the random streams.            #
# ------------------------------------------------- #

from functools import lru_cache
from typing import Tuple

import numpy as np

from . import __version__

def mode_numbers(L:int) -> np.ndarray:
    '''
    The integer mode numbers m of an L site chain in array order

    ## Description
    Arrays of the library are kept in discrete Fourier transform order so that
    `np.fft` can be applied without any shifting. Position p holds the mode
    m = p for p < L/2 and m = p - L otherwise, which covers m in [-L/2, L/2 - 1].
    '''
    return np.rint(np.fft.fftfreq(L, 1.0 / L)).astype(int)

def momentum_grid(L:int) -> np.ndarray:
    '''The lattice momenta k_m = 2πm/L in array order.'''
    return 2 * np.pi * mode_numbers(L) / L

@lru_cache(maxsize=16)
def index_tables(L:int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    '''
    Index tables used to evaluate momentum sums with fancy indexing

    ## Description
    Since array position and mode number agree modulo L, momentum arithmetic is
    position arithmetic modulo L.

    ## Returns
    - `neg` (np.ndarray): neg[p] is the position of -k
    - `k_minus_q` (np.ndarray): k_minus_q[p, r] is the position of k - q
    - `k_plus_q` (np.ndarray): k_plus_q[p, r] is the position of k + q
    '''
    positions = np.arange(L)
    neg = (-positions) % L
    k_minus_q = (positions[:, None] - positions[None, :]) % L
    k_plus_q = (positions[:, None] + positions[None, :]) % L

    # The tables are shared between calls
    for table in (neg, k_minus_q, k_plus_q):
        table.setflags(write=False)
    return neg, k_minus_q, k_plus_q

def wrap_momentum(k):
    '''Maps a lattice momentum into [-π, π).'''
    return np.mod(np.asarray(k) + np.pi, 2 * np.pi) - np.pi

def nearest_mode(k:float, L:int) -> int:
    '''The array position of the grid momentum closest to k.'''
    return int(np.rint(wrap_momentum(k) * L / (2 * np.pi))) % L

def display_order(values:np.ndarray, axes = None) -> np.ndarray:
    '''Reorders an array from Fourier order to ascending momentum.'''
    return np.fft.fftshift(values, axes=axes)

def trajectory_rng(master_seed:int, index:int) -> np.random.Generator:
    '''
    Creates the random stream of one trajectory or ensemble member

    ## Description
    The stream is a PCG64 generator seeded by the seed sequence with entropy
    `master_seed` and spawn key `(index,)`. This is the same stream that
    `SeedSequence(master_seed).spawn(n)[index]` would produce, but it can be
    built by a worker without knowing how many siblings exist.

    ## Parameters
    - `master_seed` (int): The run seed, a non-negative 64-bit integer
    - `index` (int): The index of the trajectory

    ## Returns
    - `np.random.Generator`: An independent generator for this index
    '''
    sequence = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(index),))
    return np.random.Generator(np.random.PCG64(sequence))

def code_version() -> str:
    '''The version string written into every artifact header.'''
    return f"blandau {__version__}"
