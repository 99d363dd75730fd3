# -------------------------------------------------- #
# Contains the search for the resonance contours of  #
# the three-quasiparticle scattering processes, i.e. #
# the zero set of ω_k - ω_q - ω_(k-q) in the (k, q)  #
# plane, its extremal momenta and the detuning Δ0    #
# at which the scattering channels close.            #
# -------------------------------------------------- #

from typing import Dict, List, Optional, Tuple
import logging

import numpy as np
from scipy.optimize import bisect, brentq, minimize, minimize_scalar

from .model_core import omega_at, tables_from_energies
from .types import BogoliubovTables, ExtremalMomenta, ResonanceContour, Tolerances
from .utils import wrap_momentum

logger = logging.getLogger('blandau')

def mismatch(tables:BogoliubovTables, k, q):
    '''
    The energy mismatch of a decay k → q + (k - q)

    ## Description
    Evaluates ω_k - ω_q - ω_(k-q) with the closed-form dispersion, so the
    momenta need not lie on the grid of the chain. The momentum of the second
    daughter is wrapped into [-π, π). Works elementwise on arrays.

    ## Parameters
    - `tables` (BogoliubovTables): The tables holding J, Δ and Un0
    - `k`: The momentum of the decaying quasiparticle
    - `q`: The momentum of one daughter

    ## Returns
    - The mismatch in units of γ
    '''
    return omega_at(tables, k) - omega_at(tables, q) - omega_at(tables, wrap_momentum(np.asarray(k) - np.asarray(q)))

def _axis(grid_n:int) -> np.ndarray:
    return np.pi * np.arange(1, grid_n + 1) / grid_n

def _refine_edge(func, low:float, high:float, f_low:float, f_high:float, xtol:float) -> float:
    if f_low == 0:
        return low
    if f_high == 0:
        return high
    return brentq(func, low, high, xtol=xtol, rtol=4 * np.finfo(float).eps)

def resonance_contours(tables:BogoliubovTables, grid_n:int = 256, tolerances:Tolerances = Tolerances()) -> ResonanceContour:
    '''
    Traces the resonance contour in the quadrant (0, π]²

    ## Description
    The mismatch is sampled on a `grid_n` x `grid_n` grid. Following marching
    squares, every cell edge whose end points have opposite signs carries one
    point of the contour, and that point is refined by bracketing along the edge
    until the mismatch is below the contour tolerance. Each edge is visited once,
    points are ordered by grid row (k) and then by q.

    ## Parameters
    - `tables` (BogoliubovTables): The tables holding the dispersion parameters
    - `grid_n` (int): The grid resolution, at least 256 for the refinement
    guarantees of the extremal momenta

    ## Returns
    - `ResonanceContour`: The contour, with an empty point list when no channel exists
    '''
    axis = _axis(grid_n)
    values = mismatch(tables, axis[:, None], axis[None, :])
    xtol = 1e-14

    points = []
    for row, k in enumerate(axis):
        row_points = []

        # Edges along q at fixed k
        crossings = np.flatnonzero(np.sign(values[row, :-1]) * np.sign(values[row, 1:]) < 0)
        for column in crossings:
            q = _refine_edge(
                lambda x: mismatch(tables, k, x),
                axis[column], axis[column + 1],
                values[row, column], values[row, column + 1], xtol,
            )
            row_points.append((k, q))

        # Edges along k at fixed q, attached to the lower row
        if row + 1 < grid_n:
            crossings = np.flatnonzero(np.sign(values[row]) * np.sign(values[row + 1]) < 0)
            for column in crossings:
                q = axis[column]
                k_star = _refine_edge(
                    lambda x: mismatch(tables, x, q),
                    axis[row], axis[row + 1],
                    values[row, column], values[row + 1, column], xtol,
                )
                row_points.append((k_star, q))

        # Grid nodes that sit exactly on the zero set
        for column in np.flatnonzero(values[row] == 0):
            row_points.append((k, axis[column]))

        points.extend(sorted(row_points, key=lambda one: one[1]))

    points = np.array(points, dtype=float).reshape(-1, 2)
    if len(points):
        worst = np.max(np.abs(mismatch(tables, points[:, 0], points[:, 1])))
        if worst >= tolerances.contour:
            logger.warning(f"A contour point misses the tolerance, |mismatch|={worst:.3g}")

    extremal = extremal_momenta(tables, grid_n, tolerances, sampled=values) if len(points) else None
    logger.info(f"Resonance contour with {len(points)} points (Δ={tables.Delta}, J={tables.J}, Un0={tables.Un0})")
    return ResonanceContour(points=points, extremal=extremal)

def _profile(func, low:float, high:float, samples:int = 64) -> float:
    '''The maximum of a one dimensional function on [low, high], sampled then polished.'''
    if high <= low:
        return float(func(low))
    grid = np.linspace(low, high, samples)
    values = func(grid)
    best = int(np.argmax(values))
    left, right = grid[max(best - 1, 0)], grid[min(best + 1, samples - 1)]
    result = minimize_scalar(lambda x: -func(x), bounds=(left, right), method='bounded', options={'xatol': 1e-12})
    return float(max(values[best], -result.fun))

def _root_between(func, inside:float, outside:float, xtol:float, limit:float) -> float:
    '''
    Finds the boundary of {func ≥ 0} between a point inside and a point outside

    ## Description
    The outside point is pushed away from the inside point until the function
    is negative there or the limit of the domain is reached.
    '''
    step = outside - inside
    outside = float(np.clip(outside, min(limit, inside), max(limit, inside)))
    while func(outside) >= 0:
        if outside == limit:
            return limit
        outside = float(np.clip(outside + step, min(limit, inside), max(limit, inside)))
        step *= 2
    return brentq(func, min(inside, outside), max(inside, outside), xtol=xtol)

def extremal_momenta(
    tables:BogoliubovTables,
    grid_n:int = 256,
    tolerances:Tolerances = Tolerances(),
    sampled:Optional[np.ndarray] = None,
) -> Optional[ExtremalMomenta]:
    '''
    The extremal momenta of the resonance contour

    ## Description
    k_min and k_max are the boundaries of the set of k for which some q closes
    the decay, i.e. the zeros of g(k) = max_q mismatch(k, q). Likewise q_min and
    q_max are the zeros of h(q) = max_k mismatch(k, q). The grid samples give
    the brackets and the zeros are refined with Brent's method.

    ## Returns
    - `ExtremalMomenta`: The four extrema, `None` when no channel exists
    '''
    axis = _axis(grid_n)
    if sampled is None:
        sampled = mismatch(tables, axis[:, None], axis[None, :])

    rows = np.flatnonzero(sampled.max(axis=1) >= 0)
    columns = np.flatnonzero(sampled.max(axis=0) >= 0)
    if not len(rows):
        return None

    xtol = tolerances.extremal * 1e-2
    spacing = np.pi / grid_n

    # Only q ≤ k can decay, the other half of the quadrant has ω_q > ω_k
    g = lambda k: _profile(lambda q: mismatch(tables, k, q), 0.0, k)
    h = lambda q: _profile(lambda k: mismatch(tables, k, q), q, np.pi)

    k_min = _root_between(g, axis[rows[0]], axis[rows[0]] - spacing, xtol, 0.0)
    k_max = _root_between(g, axis[rows[-1]], axis[rows[-1]] + spacing, xtol, np.pi)
    q_min = _root_between(h, axis[columns[0]], axis[columns[0]] - spacing, xtol, 0.0)
    q_max = _root_between(h, axis[columns[-1]], axis[columns[-1]] + spacing, xtol, np.pi)

    extremal = ExtremalMomenta(q_min=float(q_min), k_min=float(k_min), q_max=float(q_max), k_max=float(k_max))
    logger.debug(f"Extremal momenta {extremal}")
    return extremal

def max_mismatch(tables:BogoliubovTables, grid_n:int = 128) -> float:
    '''
    The largest mismatch over the quadrant

    ## Description
    A channel exists exactly when this is non-negative. The grid maximum is
    polished with a Nelder-Mead search started in the best cell.
    '''
    axis = _axis(grid_n)
    values = mismatch(tables, axis[:, None], axis[None, :])
    row, column = np.unravel_index(np.argmax(values), values.shape)

    objective = lambda x: -float(mismatch(tables, np.clip(x[0], 0, np.pi), np.clip(x[1], 0, np.pi)))
    result = minimize(objective, x0=[axis[row], axis[column]], method='Nelder-Mead', options={'xatol': 1e-10, 'fatol': 1e-12})
    return float(max(values[row, column], -result.fun))

def sweep_detuning(
    J:float,
    Un0:float,
    Delta_range:Tuple[float, float],
    steps:int,
    grid_n:int = 256,
    tolerances:Tolerances = Tolerances(),
) -> Tuple[List[Dict], Optional[float]]:
    '''
    Follows the extremal momenta as the renormalized detuning changes

    ## Description
    For `steps` values of Δ evenly spread over `Delta_range` the extremal momenta
    are found (missing entries where the contour is empty). The critical
    detuning Δ0, below which no channel exists, is the zero of the largest
    mismatch as a function of Δ and is located by bisection.

    ## Parameters
    - `J` (float): The hopping
    - `Un0` (float): The mean-field energy
    - `Delta_range` (tuple): The (lowest, highest) detuning, both negative
    - `steps` (int): The number of detunings

    ## Returns
    - `list`: One row per detuning with the keys Delta, q_min, k_min, q_max, k_max, points
    - `float`: Δ0, or `None` when the range does not straddle the boundary
    '''
    low, high = sorted(Delta_range)
    rows = []
    for Delta in np.linspace(low, high, steps):
        contour = resonance_contours(tables_from_energies(J, Delta, Un0), grid_n, tolerances)
        row = {'Delta': float(Delta), 'points': len(contour.points)}
        row.update(contour.extremal.serialize() if contour.extremal else dict.fromkeys(['q_min', 'k_min', 'q_max', 'k_max']))
        rows.append(row)

    channel = lambda Delta: max_mismatch(tables_from_energies(J, Delta, Un0))
    f_low, f_high = channel(low), channel(high)
    if np.sign(f_low) == np.sign(f_high):
        logger.info(f"No channel boundary inside Δ ∈ [{low}, {high}]")
        return rows, None

    Delta0 = bisect(channel, low, high, xtol=tolerances.detuning)
    logger.info(f"Channels close at Δ0 = {Delta0:.6f} for J={J}, Un0={Un0}")
    return rows, float(Delta0)

def mirror_points(contour:ResonanceContour) -> np.ndarray:
    '''The contour together with its point reflection into the negative quadrant.'''
    return np.concatenate([contour.points, -contour.points[::-1]])
