# -------------------------------------------------- #
# The hierarchy of correlations with a factorized    #
# cutoff: the condensate, the second-order           #
# correlators n_k, c_k and the third-order matrices  #
# M_(k,q), R_(k,q) are evolved together until the    #
# momentum distribution stops changing.              #
# -------------------------------------------------- #

from typing import Optional, Tuple
import logging

import numpy as np
from scipy.integrate import RK45
from scipy.ndimage import maximum_filter, minimum_filter

from .contour import mismatch
from .exceptions import NotConverged, StiffnessFailure, ZeroMomentumArm
from .model_core import (
    GAMMA, bogoliubov_steady_state, dispersion_tables, solve_mean_field,
)
from .types import (
    BogoliubovTables, ConvergenceTrace, CorrelationState, HocOptions, MeanField,
    ModelParams, SecondOrderState, Tolerances,
)
from .utils import index_tables, momentum_grid, nearest_mode

logger = logging.getLogger('blandau')

class HierarchyRhs():
    '''
    The right-hand side of the hierarchy equations

    ## Description
    Holds the momentum tables of one chain so that every evaluation is a fixed
    number of vectorized operations on the L x L matrices. Momentum sums use the
    index arithmetic of `utils.index_tables`. The instance is callable with the
    signature expected by the scipy integrators, acting on packed states.

    ## Parameters
    - `params` (ModelParams): L, J and U of the chain
    - `mf` (MeanField): The bare detuning δ and the drive Ω
    - `options` (HocOptions): The switches of the equations
    '''

    def __init__(self, params:ModelParams, mf:MeanField, options:HocOptions = HocOptions()):
        self.L = params.L
        self.J = params.J
        self.U = params.U
        self.delta = mf.delta
        self.Omega = mf.Omega
        self.options = options

        self.neg, self.k_minus_q, self.k_plus_q = index_tables(self.L)
        self.rows = np.arange(self.L)[:, None]
        self.cos_k = np.cos(momentum_grid(self.L))

        # Kronecker masks of the diagonal factorizations
        self.on_diagonal = np.eye(self.L, dtype=bool)
        self.sum_zero = self.k_plus_q == 0

    def derivative(self, state:CorrelationState) -> CorrelationState:
        '''
        The time derivative of every component of the state

        ## Returns
        - `CorrelationState`: The derivatives, with the time of the input
        '''
        L, U = self.L, self.U
        psi, n, c, M, R = state.psi0, state.n, state.c, state.M, state.R
        neg, KmQ, KpQ, rows = self.neg, self.k_minus_q, self.k_plus_q, self.rows
        back = self.options.back_reaction

        density = abs(psi) ** 2
        eps = -self.delta - 2 * self.J * self.cos_k + U * density
        Sn = n.sum()
        Sc = c.sum()
        root_L = np.sqrt(L)

        # Condensate
        dpsi = (eps[0] - 0.5j * GAMMA) * psi + self.Omega
        if back:
            dpsi += 2 * U * psi * Sn / L + U * np.conj(psi) * Sc / L + U * np.conj(M).sum() / L ** 1.5
        dpsi *= -1j

        pair = U * (psi ** 2 + (Sc / L if back else 0.0))
        hartree = 2 * U * (density + (Sn / L if back else 0.0))
        M_columns = M.sum(axis=0)       # Σ_q M_(q,k)
        M_rows = M.sum(axis=1)          # Σ_q M_(k,q)
        R_rows = R.sum(axis=1)          # Σ_q R_(k,q)

        # Second order
        dn = -GAMMA * n + 2 * np.imag(
            pair * np.conj(c)
            + 2 * U * psi / root_L * M_columns
            + U * np.conj(psi) / root_L * np.conj(M_rows)
        )
        dc = -1j * (
            (2 * eps + hartree - 1j * GAMMA) * c
            + pair * (2 * n + 1)
            + 2 * U * psi / root_L * (np.conj(M_columns)[neg] + np.conj(M_columns))
            + U * np.conj(psi) / root_L * (R_rows[neg] + R_rows)
        )

        if self.options.freeze_third_order:
            return CorrelationState(psi0=complex(dpsi), n=dn, c=dc, M=np.zeros_like(M), R=np.zeros_like(R), t=state.t)

        # Third order
        eps_k = eps[:, None]
        eps_q = eps[None, :]
        n_k, n_q = n[:, None], n[None, :]
        c_k, c_q = c[:, None], c[None, :]
        n_kmq, c_kmq = n[KmQ], c[KmQ]
        n_kpq, c_kpq = n[KpQ], c[KpQ]

        drive_M = 2 * U * psi / root_L * (
            np.conj(c_kmq) * n_q + n_kmq * np.conj(c_q) - n_k * (np.conj(c_q) + np.conj(c_kmq))
        ) + 2 * U * np.conj(psi) / root_L * (
            n_kmq * n_q - n_k * (1 + n_q + n_kmq) - c_k * (np.conj(c_q) + np.conj(c_kmq))
        )
        drive_R = 2 * U * psi / root_L * (
            c_k + c_q + c_kpq
            + n_kpq * c_q + c_kpq * n_q + n_k * c_q + n_k * c_kpq + c_k * n_q + c_k * n_kpq
        ) + 2 * U * np.conj(psi) / root_L * (c_k * c_q + c_k * c_kpq + c_q * c_kpq)

        if self.options.include_diagonal_factorizations:
            k_zero = np.zeros((L, L), dtype=bool)
            k_zero[0] = True
            q_zero = k_zero.T
            edges = self.on_diagonal.astype(float) + q_zero

            drive_M = drive_M + k_zero * np.conj(c_q) * (2 * U * psi / root_L * Sn + U * np.conj(psi) / root_L * Sc)
            drive_M = drive_M - edges * n_k * (2 * U * np.conj(psi) / root_L * Sn + U * psi / root_L * np.conj(Sc))
            drive_R = drive_R + (2 * U * psi / root_L * Sn + U * np.conj(psi) / root_L * Sc) * (
                self.sum_zero * c_k + q_zero * c_k + k_zero * c_q
            )

        dM = -1j * (
            (eps_k - eps_q - eps[KmQ] - U * density - 1.5j * GAMMA) * M
            - U * np.conj(psi) ** 2 * (np.conj(M.T) + np.conj(M[KmQ, rows]))
            + U * psi ** 2 * np.conj(R[neg, :])
            + drive_M
        )
        dR = -1j * (
            (eps_k + eps_q + eps[KpQ] + 3 * U * density - 1.5j * GAMMA) * R
            + U * psi ** 2 * (np.conj(M[neg, :]) + np.conj(M[neg, :].T) + np.conj(M[KpQ, rows]))
            + drive_R
        )
        return CorrelationState(psi0=complex(dpsi), n=dn, c=dc, M=dM, R=dR, t=state.t)

    def __call__(self, t:float, y:np.ndarray) -> np.ndarray:
        return self.derivative(CorrelationState.unpack(y, self.L, t)).pack()

def hoc_rhs(state:CorrelationState, params:ModelParams, mf:MeanField, options:HocOptions = HocOptions()) -> CorrelationState:
    '''
    The time derivative of a hierarchy state

    ## Description
    The condensate follows the Gross-Pitaevskii equation with the back-reaction
    of n, c and M. The second-order correlators couple to the third-order ones,
    and M and R are driven by the factorized fourth-order correlators. Fifth
    order and the connected part of fourth order are dropped, and ⟨φ_0⟩ is zero.

    ## Parameters
    - `state` (CorrelationState): The current state
    - `params` (ModelParams): The model parameters
    - `mf` (MeanField): The mean field providing δ and Ω
    - `options` (HocOptions): The switches of the equations

    ## Returns
    - `CorrelationState`: The derivatives of ψ0, n, c, M and R
    '''
    return HierarchyRhs(params, mf, options).derivative(state)

def initial_state(mf:MeanField, bogoliubov:SecondOrderState) -> CorrelationState:
    '''The mean-field condensate with the Bogoliubov n and c, M = R = 0.'''
    L = len(bogoliubov.n)
    return CorrelationState(
        psi0 = mf.psi0,
        n = bogoliubov.n.copy(),
        c = bogoliubov.c.astype(complex),
        M = np.zeros((L, L), dtype=complex),
        R = np.zeros((L, L), dtype=complex),
    )

def change_rate(previous:np.ndarray, current:np.ndarray, dt:float, guard:float) -> float:
    '''
    The relative change rate δ = 1/(L Δt) Σ_k |n_k(t + Δt) - n_k(t)| / n_k(t)

    ## Description
    Modes whose previous occupation is below `guard` are left out of the sum.
    '''
    kept = previous >= guard
    return float(np.sum(np.abs(current[kept] - previous[kept]) / previous[kept]) / (len(previous) * dt))

def symmetry_error(state:CorrelationState) -> float:
    '''
    The worst relative violation of the operator exchange symmetries

    ## Description
    Compares M_(k,q) with M_(k,k-q) and R_(k,q) with R_(q,k) and R_(k,-k-q).
    '''
    neg, KmQ, KpQ = index_tables(state.L)
    rows = np.arange(state.L)[:, None]
    M, R = state.M, state.R

    errors = [0.0]
    scale = np.max(np.abs(M))
    if scale > 0:
        errors.append(np.max(np.abs(M - M[rows, KmQ])) / scale)
    scale = np.max(np.abs(R))
    if scale > 0:
        errors.append(np.max(np.abs(R - R.T)) / scale)
        errors.append(np.max(np.abs(R - R[rows, neg[KpQ]])) / scale)
    return float(max(errors))

def fit_decay_rate(times:np.ndarray, delta:np.ndarray) -> float:
    '''κ from a straight-line fit of log δ(t), `nan` with fewer than two usable points.'''
    kept = delta > 0
    if np.count_nonzero(kept) < 2:
        return float('nan')
    slope, _ = np.polyfit(times[kept], np.log(delta[kept]), 1)
    return float(-slope)

def evolve_to_steady_state(
    params:ModelParams,
    eps_stop:Optional[float] = None,
    dt_monitor:Optional[float] = None,
    options:HocOptions = HocOptions(),
    tolerances:Tolerances = Tolerances(),
    initial:Optional[CorrelationState] = None,
) -> Tuple[CorrelationState, ConvergenceTrace]:
    '''
    Relaxes the hierarchy to its steady state

    ## Description
    The integration starts from the mean-field condensate and the Bogoliubov
    steady state with M = R = 0, and uses the embedded Runge-Kutta 4(5) pair of
    scipy. The dense output is sampled every `dt_monitor` and the relative
    change rate δ(t) of the momentum distribution is computed between two
    samples. The first sample with δ below `eps_stop` is returned.

    ## Parameters
    - `params` (ModelParams): The model parameters, Δ must be negative
    - `eps_stop` (float): The stopping threshold, the option value by default
    - `dt_monitor` (float): The monitor spacing, the option value by default
    - `options` (HocOptions): The switches of the equations
    - `initial` (CorrelationState): Overrides the initial state

    ## Returns
    - `CorrelationState`: The steady state
    - `ConvergenceTrace`: δ(t) at the monitor times and the fitted decay rate

    ## Raises
    - `GaplessOrUnstable`: When the Bogoliubov spectrum is not gapped
    - `NotConverged`: When δ is still above the threshold at t_max
    - `StiffnessFailure`: When the step size falls below its lower bound
    '''
    eps_stop = options.eps_stop if eps_stop is None else eps_stop
    dt_monitor = options.dt_monitor if dt_monitor is None else dt_monitor

    mf = solve_mean_field(params, tolerances)
    tables = dispersion_tables(mf, params)
    if initial is None:
        initial = initial_state(mf, bogoliubov_steady_state(tables, mf))

    L = params.L
    rhs = HierarchyRhs(params, mf, options)
    solver = RK45(
        rhs, initial.t, initial.pack(), t_bound = initial.t + tolerances.hoc_t_max,
        rtol = tolerances.hoc_rtol, atol = tolerances.hoc_atol,
    )
    logger.info(f"Relaxing the hierarchy for L={L}, U={params.U}, Δ={mf.Delta} with ε_stop={eps_stop}")

    times, deltas, symmetry = [], [], []
    previous = initial.n
    next_monitor = initial.t + dt_monitor
    steps = 0

    while solver.status == 'running':
        message = solver.step()
        steps += 1
        if solver.status == 'failed':
            raise StiffnessFailure(f"The integrator failed at t={solver.t:.6g}: {message}")
        if solver.status == 'running' and solver.step_size < tolerances.hoc_min_step:
            raise StiffnessFailure(f"The step size {solver.step_size:.3g} fell below {tolerances.hoc_min_step} at t={solver.t:.6g}")

        while next_monitor <= solver.t:
            state = CorrelationState.unpack(solver.dense_output()(next_monitor), L, next_monitor)
            delta = change_rate(previous, state.n, dt_monitor, tolerances.hoc_density_guard)
            times.append(next_monitor)
            deltas.append(delta)
            symmetry.append(symmetry_error(state))

            logger.debug(f"t={next_monitor:.1f} δ={delta:.3e} after {steps} steps")
            if symmetry[-1] > tolerances.hoc_symmetry:
                logger.warning(f"The correlator symmetries are violated by {symmetry[-1]:.3g} at t={next_monitor:.1f}")
            if state.n.min() < -1e-9:
                logger.warning(f"Negative occupation {state.n.min():.3g} at t={next_monitor:.1f}")

            if delta < eps_stop:
                trace = ConvergenceTrace(
                    times = np.array(times),
                    delta = np.array(deltas),
                    kappa_fit = fit_decay_rate(np.array(times), np.array(deltas)),
                    converged = True,
                    symmetry_error = np.array(symmetry),
                )
                logger.info(f"Steady state reached at t={next_monitor:.1f} with δ={delta:.3e}, κ={trace.kappa_fit:.4g}")
                return state, trace

            previous = state.n
            next_monitor += dt_monitor

    raise NotConverged(
        f"δ={deltas[-1] if deltas else float('nan'):.3e} is still above {eps_stop} at t={solver.t:.6g}",
        t = float(solver.t),
    )

def deviation_from_bogoliubov(state:CorrelationState, reference:SecondOrderState) -> Tuple[np.ndarray, np.ndarray]:
    '''δn_k = n_k - n_k^bog and its size relative to n_k^bog.'''
    deviation = state.n - reference.n
    return deviation, deviation / reference.n

def contour_cells(tables:BogoliubovTables, radius:int) -> np.ndarray:
    '''
    Grid cells of the (k, q) plane near the resonance contour

    ## Description
    A cell is marked when the mismatch ω_k - ω_q - ω_(k-q) changes sign within
    `radius` grid spacings of it, on the periodic grid of the chain.
    '''
    k_grid = momentum_grid(tables.L)
    values = mismatch(tables, k_grid[:, None], k_grid[None, :])
    size = 2 * radius + 1
    highest = maximum_filter(values, size=size, mode='wrap')
    lowest = minimum_filter(values, size=size, mode='wrap')
    return (highest >= 0) & (lowest <= 0)

def third_order_map(
    state:CorrelationState,
    tables:Optional[BogoliubovTables] = None,
    tolerances:Tolerances = Tolerances(),
) -> Tuple[np.ndarray, Optional[dict]]:
    '''
    The magnitude of the third-order correlation matrix

    ## Description
    With the dispersion tables the enhancement of |M| along the resonance
    contour is measured too: the mean over cells within one grid spacing of the
    contour is compared with the median over cells farther than five spacings.

    ## Returns
    - `np.ndarray`: |M_(k,q)| in Fourier order
    - `dict`: The contour mean, the background median, their ratio and whether
    the ratio exceeds the enhancement factor, `None` without tables
    '''
    magnitude = np.abs(state.M)
    if tables is None:
        return magnitude, None

    near = contour_cells(tables, 1)
    far = ~contour_cells(tables, 5)
    if not near.any() or not far.any():
        logger.warning("The resonance contour does not split the grid, no enhancement measured")
        return magnitude, None

    contour_mean = float(magnitude[near].mean())
    background = float(np.median(magnitude[far]))
    ratio = contour_mean / background if background > 0 else float('inf') if contour_mean > 0 else float('nan')
    return magnitude, {
        'contour_mean': contour_mean,
        'background_median': background,
        'enhancement': ratio,
        'enhanced': bool(ratio > tolerances.enhancement_factor),
    }

def detection_signal(state:CorrelationState, Omega:complex, theta:float, chi:float, k:float, q:float) -> float:
    '''
    The homodyne signal that measures one entry of M

    ## Description
    Interfering the arms k, q and k - q with a reference beam of phase θ and a
    local oscillator of phase χ gives 2 Re{Ω e^(i(θ+χ)) M_(k,q)}.

    ## Parameters
    - `Omega` (complex): The drive amplitude
    - `theta` (float): The phase of the reference beam
    - `chi` (float): The phase of the local oscillator
    - `k` (float): The momentum of the first arm
    - `q` (float): The momentum of the second arm

    ## Raises
    - `ZeroMomentumArm`: When one of k, q, k - q is the condensate mode
    '''
    L = state.L
    k_mode = nearest_mode(k, L)
    q_mode = nearest_mode(q, L)
    if k_mode == 0 or q_mode == 0 or (k_mode - q_mode) % L == 0:
        raise ZeroMomentumArm(f"The arms k={k}, q={q} include the condensate mode")
    return float(2 * np.real(Omega * np.exp(1j * (theta + chi)) * state.M[k_mode, q_mode]))

def detection_map(state:CorrelationState, Omega:complex, theta:float = 0.0, chi:float = 0.0) -> np.ndarray:
    '''The detection signal over every (k, q), `nan` where an arm is the condensate mode.'''
    L = state.L
    _, KmQ, _ = index_tables(L)
    signal = 2 * np.real(Omega * np.exp(1j * (theta + chi)) * state.M)
    positions = np.arange(L)
    blocked = (positions[:, None] == 0) | (positions[None, :] == 0) | (KmQ == 0)
    return np.where(blocked, np.nan, signal)
