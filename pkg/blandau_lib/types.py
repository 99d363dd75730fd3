# ------------------------------------------------- #
# A very important file that contains all of the    #
# types used in the blandau library. The            #
# BlandauType class is the parent class which all   #
# other records inherit from. This class allows the #
# records to be serialized to JSON for the run      #
# summaries and the output metadata headers.        #
# ------------------------------------------------- #

from dataclasses import dataclass, field, fields
from functools import cached_property
from typing import Any, Dict, List, Optional, Tuple
import enum, json

import numpy as np
from scipy import constants

from .enums import Branch
from .exceptions import ConfigError

class BlandauType():
    '''
    A parent class used to define a blandau record.

    ## Description
    A blandau record is a dataclass holding parameters or results. In most cases
    the fields are numbers, numpy arrays or other records, all of which are turned
    into JSON friendly values by `serialize`.
    '''

    def serialize(self) -> dict:
        '''
        A method used to serialize the record.

        ## Description
        This method walks the dataclass fields of the record and converts each of
        them. `None` values are dropped, the same way empty optional fields were
        dropped from protocol payloads.

        ## Returns
        - `dict`: A dict of the serialized data
        '''
        def single_value_serialize(value:Any) -> Any:
            '''
            Serializes a single value to its JSON type

            ## Description
            A method used to convert an object of any supported type to a JSON
            type. This method is only accessible within the `serialize` function.
            '''

            # If the value is an Enum
            if isinstance(value, enum.Enum):
                return value.value

            # If the object is a subclass of BlandauType
            elif isinstance(value, BlandauType):
                return value.serialize()

            # Complex numbers become [re, im] pairs
            elif isinstance(value, (complex, np.complexfloating)):
                return [float(value.real), float(value.imag)]

            # Numpy scalars and arrays
            elif isinstance(value, np.generic):
                return value.item()
            elif isinstance(value, np.ndarray):
                if np.iscomplexobj(value):
                    return np.stack([value.real, value.imag], axis=-1).tolist()
                return value.tolist()

            # If the object is already of an acceptable data type
            elif isinstance(value, (bool, int, float, str)):
                return value

            # Lists and tuples are serialized item by item
            elif isinstance(value, (list, tuple)):
                return [single_value_serialize(one) for one in value]

            elif isinstance(value, dict):
                return {str(key):single_value_serialize(one) for key,one in value.items()}

            # If none of the above is the case then we dont know how to serialize this
            else:
                raise ValueError(f"An object of the type `{type(value)}` does not have any known serialization method")

        return {
            one.name:single_value_serialize(getattr(self, one.name))
            for one in fields(self)
            if getattr(self, one.name) is not None
        }

    def __str__(self) -> str:
        '''
        Converts the record to a JSON string

        ## Returns
        - `str`: A string of the serialized data
        '''
        return json.dumps(self.serialize(), sort_keys=True)

# ------------------------------------------------------
# Configuration records
# ------------------------------------------------------

@dataclass(frozen=True)
class Tolerances(BlandauType):
    '''
    Every numerical tolerance of the library in one place

    ## Description
    The defaults are the values the steady-state contracts are stated with. Any of
    them can be overridden from the `[tolerances]` section of a run configuration.
    '''

    mean_field_residual: float = 1e-12     # relative residual of the mean-field cubic
    mean_field_scan_points: int = 200000   # sign-change scan resolution for the cubic
    ode_steady: float = 1e-10              # |n(t_end) - n(t_end - 1/γ)| for the Bogoliubov ODEs
    contour: float = 1e-8                  # |mismatch| of refined contour points (units of γ)
    extremal: float = 1e-6                 # extremal momenta refinement
    detuning: float = 1e-4                 # Δ0 bisection tolerance (units of γ)
    hoc_rtol: float = 1e-8
    hoc_atol: float = 1e-10
    hoc_min_step: float = 1e-8
    hoc_t_max: float = 1e3
    hoc_density_guard: float = 1e-12       # modes below this are left out of δ(t)
    hoc_symmetry: float = 1e-9
    enhancement_factor: float = 3.0        # contour-adjacent |M| over background median
    hc_cap: int = 500000
    hc_condition_max: float = 1e14
    response_det: float = 1e-14
    blowup_factor: float = 1e3

@dataclass(frozen=True)
class ModelParams(BlandauType):
    '''
    The parameters of the driven-dissipative Bose-Hubbard chain

    ## Description
    All rates are in units of the loss rate γ, which is fixed to one internally and
    only kept for unit conversion. The detuning is given either bare (`delta`) or
    renormalized (`Delta`), and exactly one of `n0_target` and `Omega` drives the
    mean-field solve.

    ## Parameters
    - `L` (int): The number of cavities, even and at least 2
    - `J` (float): The hopping strength
    - `U` (float): The on-site interaction
    - `gamma` (float): The loss rate
    - `delta` (float): The bare laser detuning δ = ω_L - ω_c
    - `Delta` (float): The renormalized detuning Δ = δ - U n0 + 2J, must be negative
    - `n0_target` (float): The mean-field density per site
    - `Omega` (complex): The drive amplitude
    - `branch` (Branch): The bistability branch used when `Omega` is given

    ## Raises
    - `ConfigError`: When any of the invariants above is violated
    '''

    L: int
    J: float
    U: float
    gamma: float = 1.0
    delta: Optional[float] = None
    Delta: Optional[float] = None
    n0_target: Optional[float] = None
    Omega: Optional[complex] = None
    branch: Optional[Branch] = None

    def __post_init__(self):
        if int(self.L) != self.L or self.L < 2 or self.L % 2:
            raise ConfigError(f"The chain length must be an even integer >= 2, got {self.L}")
        if self.J < 0 or self.U < 0:
            raise ConfigError(f"Hopping and interaction must be non-negative, got J={self.J}, U={self.U}")
        if self.gamma <= 0:
            raise ConfigError(f"The loss rate must be positive, got {self.gamma}")
        if (self.delta is None) == (self.Delta is None):
            raise ConfigError("Exactly one of the bare detuning `delta` and the renormalized detuning `Delta` must be given")
        if (self.n0_target is None) == (self.Omega is None):
            raise ConfigError("Exactly one of `n0_target` and `Omega` must drive the mean-field solve")
        if self.n0_target is not None and self.n0_target <= 0:
            raise ConfigError(f"The target density must be positive, got {self.n0_target}")
        if self.Delta is not None and self.Delta >= 0:
            raise ConfigError(f"The renormalized detuning must be negative, got {self.Delta}")
        if self.branch is not None and not isinstance(self.branch, Branch):
            object.__setattr__(self, 'branch', Branch(self.branch))

    @classmethod
    def from_mean_field_energy(cls, L:int, J:float, Delta:float, Un0:float, U:float, **kwargs) -> 'ModelParams':
        '''
        Builds parameters from the mean-field energy U n0 and the interaction U

        ## Description
        The figures of the steady-state study are labelled by (J, Δ, U n0) at fixed
        U, which fixes the density n0 = U n0 / U. For U = 0 the density has to be
        given explicitly with the `n0_target` keyword.
        '''
        if U == 0:
            n0_target = kwargs.pop('n0_target', 1.0)
        else:
            n0_target = Un0 / U
        return cls(L=L, J=J, U=U, Delta=Delta, n0_target=n0_target, **kwargs)

@dataclass(frozen=True)
class PhysicalUnits(BlandauType):
    '''
    The laboratory scales used to turn rates in units of γ into measurable numbers

    ## Parameters
    - `hbar_gamma_ueV` (float): The linewidth ħγ in μeV
    - `omega_L_eV` (float): The laser photon energy ħω_L in eV
    - `dx_um` (float): The cavity spacing in μm
    - `lifetime_ps` (float): The photon lifetime in ps
    '''

    hbar_gamma_ueV: float = 33.0
    omega_L_eV: float = 1.6
    dx_um: float = 1.0
    lifetime_ps: float = 20.0

    def __post_init__(self):
        for one in fields(self):
            if getattr(self, one.name) <= 0:
                raise ConfigError(f"The unit `{one.name}` must be positive")

        # ħ/τ must reproduce the linewidth
        linewidth_ueV = constants.hbar / (self.lifetime_ps * 1e-12) / constants.e * 1e6
        if abs(linewidth_ueV - self.hbar_gamma_ueV) > 0.05 * self.hbar_gamma_ueV:
            raise ConfigError(f"The lifetime {self.lifetime_ps} ps gives ħ/τ = {linewidth_ueV:.3g} μeV, inconsistent with ħγ = {self.hbar_gamma_ueV} μeV")

# ------------------------------------------------------
# Bogoliubov level records
# ------------------------------------------------------

@dataclass(frozen=True)
class MeanField(BlandauType):
    '''
    The homogeneous mean-field steady state

    ## Parameters
    - `psi0` (complex): The condensate amplitude
    - `n0` (float): The condensate density |ψ0|²
    - `Delta` (float): The renormalized detuning
    - `Omega` (complex): The drive amplitude
    - `delta` (float): The bare detuning consistent with n0 and Δ
    - `branch_stable` (bool): The sign of the k=0 linear response determinant
    '''

    psi0: complex
    n0: float
    Delta: float
    Omega: complex
    delta: float
    branch_stable: bool = True

@dataclass(frozen=True, eq=False)
class BogoliubovTables(BlandauType):
    '''
    The Bogoliubov dispersion and transform coefficients on the momentum grid

    ## Description
    All arrays are stored in discrete Fourier transform order, the array position p
    holds the mode number m = p for p < L/2 and m = p - L so index arithmetic is
    simply modulo L. The closed-form parameters are kept so that the dispersion can
    also be evaluated at arbitrary real momenta.
    '''

    k_grid: np.ndarray
    eps: np.ndarray
    omega: np.ndarray
    u: np.ndarray
    v: np.ndarray
    J: float
    Delta: float
    Un0: float

    @property
    def L(self) -> int:
        return len(self.k_grid)

@dataclass(frozen=True, eq=False)
class SecondOrderState(BlandauType):
    '''
    The momentum distribution and anomalous correlator of the fluctuations

    ## Parameters
    - `n` (np.ndarray): n_k = ⟨φ†_k φ_k⟩
    - `c` (np.ndarray): c_k = ⟨φ_k φ_-k⟩
    - `n_chi` (np.ndarray): Occupations of the Bogoliubov quasiparticles, optional
    - `c_chi` (np.ndarray): Anomalous correlations of the quasiparticles, optional
    '''

    n: np.ndarray
    c: np.ndarray
    n_chi: Optional[np.ndarray] = None
    c_chi: Optional[np.ndarray] = None

# ------------------------------------------------------
# Contour records
# ------------------------------------------------------

@dataclass(frozen=True)
class ExtremalMomenta(BlandauType):
    '''The coordinate extrema of the resonance contour, all in (0, π].'''

    q_min: float
    k_min: float
    q_max: float
    k_max: float

@dataclass(frozen=True, eq=False)
class ResonanceContour(BlandauType):
    '''
    The zero set of ω_k - ω_q - ω_(k-q) in the positive quadrant

    ## Parameters
    - `points` (np.ndarray): An (n, 2) array of (k, q) pairs ordered by grid row
    - `extremal` (ExtremalMomenta): The extremal momenta, `None` for an empty contour
    '''

    points: np.ndarray
    extremal: Optional[ExtremalMomenta] = None

    @property
    def empty(self) -> bool:
        return len(self.points) == 0

# ------------------------------------------------------
# Truncated Wigner records
# ------------------------------------------------------

@dataclass(frozen=True)
class TwaConfig(BlandauType):
    '''
    The sampling configuration of the truncated Wigner ensemble

    ## Parameters
    - `dt` (float): The integration step in units of 1/γ
    - `burn_in` (float): The time discarded before sampling starts
    - `sample_interval` (float): The time between two samples, at least 1/γ
    - `n_samples` (int): The total number of samples over all trajectories
    - `master_seed` (int): The seed every trajectory stream is derived from
    - `n_trajectories` (int): The number of independent trajectories
    - `block_size` (int): The number of consecutive samples per block for the errors
    - `batch_size` (int): The number of trajectories propagated together
    '''

    dt: float = 0.005
    burn_in: float = 20.0
    sample_interval: float = 5.0
    n_samples: int = 100000
    master_seed: int = 0
    n_trajectories: int = 100
    block_size: int = 10
    batch_size: int = 16

    def __post_init__(self):
        if self.sample_interval < 1:
            raise ConfigError(f"The sample interval must be at least 1/γ, got {self.sample_interval}")
        if self.n_trajectories < 1 or self.n_samples < self.n_trajectories:
            raise ConfigError("Every trajectory must contribute at least one sample")
        if self.dt <= 0 or self.burn_in < 0:
            raise ConfigError("The step must be positive and the burn-in non-negative")
        if self.batch_size < 1:
            raise ConfigError(f"The batch size must be positive, got {self.batch_size}")

    def check_step(self, params:ModelParams, mean_field:MeanField) -> None:
        '''
        Checks the step against the stability bound of the split-step integrator

        ## Raises
        - `ConfigError`: When dt exceeds 0.05 / max(U n0, |Δ|, 1)
        '''
        bound = 0.05 / max(params.U * mean_field.n0, abs(mean_field.Delta), 1.0)
        if self.dt > bound * (1 + 1e-12):
            raise ConfigError(f"The step dt={self.dt} exceeds the stability bound {bound:.3g}")

    @property
    def samples_per_trajectory(self) -> int:
        return self.n_samples // self.n_trajectories

@dataclass(frozen=True, eq=False)
class TrajectoryEnsembleResult(BlandauType):
    '''
    The vacuum-subtracted momentum distribution of a Wigner ensemble

    ## Description
    `n_k` may be negative, which is the signature of the spurious decay of the
    vacuum noise. The k = 0 entry is the connected fluctuation and the condensate
    density is kept in `condensate_density`.
    '''

    n_k: np.ndarray
    stderr_k: np.ndarray
    samples_used: int
    condensate_density: float
    inflation_k: np.ndarray
    config: TwaConfig

# ------------------------------------------------------
# Hierarchy of correlations records
# ------------------------------------------------------

@dataclass(frozen=True)
class HocOptions(BlandauType):
    '''
    The switches of the hierarchy right-hand side

    ## Parameters
    - `freeze_third_order` (bool): Keeps M and R at zero
    - `back_reaction` (bool): Couples the fluctuations back into ψ0 and renormalizes
    the pair and density couplings of n and c by (1/L)Σc and (1/L)Σn
    - `include_diagonal_factorizations` (bool): Adds the Kronecker-diagonal
    factorized fourth-order terms to the drives of M and R
    - `dt_monitor` (float): The spacing of the convergence monitor
    - `eps_stop` (float): The relative change rate at which the relaxation stops
    '''

    freeze_third_order: bool = False
    back_reaction: bool = True
    include_diagonal_factorizations: bool = False
    dt_monitor: float = 1.0
    eps_stop: float = 1e-6

    def __post_init__(self):
        if self.dt_monitor <= 0 or self.eps_stop <= 0:
            raise ConfigError("The monitor spacing and the stopping threshold must be positive")

@dataclass(eq=False)
class CorrelationState(BlandauType):
    '''
    The integration state of the third-order correlation hierarchy

    ## Parameters
    - `psi0` (complex): The condensate amplitude, evolved with back-reaction
    - `n` (np.ndarray): n_k
    - `c` (np.ndarray): c_k
    - `M` (np.ndarray): M[k, q] = ⟨φ†_(k-q) φ†_q φ_k⟩
    - `R` (np.ndarray): R[k, q] = ⟨φ_(-k-q) φ_q φ_k⟩
    - `t` (float): The time in units of 1/γ
    '''

    psi0: complex
    n: np.ndarray
    c: np.ndarray
    M: np.ndarray
    R: np.ndarray
    t: float = 0.0

    @property
    def L(self) -> int:
        return len(self.n)

    def pack(self) -> np.ndarray:
        '''Flattens the state to one complex vector [ψ0, n, c, M, R].'''
        return np.concatenate([
            np.array([self.psi0], dtype=complex),
            self.n.astype(complex),
            self.c,
            self.M.ravel(),
            self.R.ravel(),
        ])

    @classmethod
    def unpack(cls, y:np.ndarray, L:int, t:float = 0.0) -> 'CorrelationState':
        '''The inverse of `pack`, n is returned as its real part.'''
        offsets = np.cumsum([1, L, L, L * L])
        return cls(
            psi0 = complex(y[0]),
            n = y[1:offsets[1]].real.copy(),
            c = y[offsets[1]:offsets[2]].copy(),
            M = y[offsets[2]:offsets[3]].reshape(L, L).copy(),
            R = y[offsets[3]:].reshape(L, L).copy(),
            t = t,
        )

@dataclass(frozen=True, eq=False)
class ConvergenceTrace(BlandauType):
    '''
    The monitor of the relaxation towards the steady state

    ## Parameters
    - `times` (np.ndarray): The monitor times
    - `delta` (np.ndarray): The relative change rate δ(t) at those times
    - `kappa_fit` (float): The decay rate of a log-linear fit of δ(t)
    - `converged` (bool): Whether the final δ is below the stopping threshold
    - `symmetry_error` (np.ndarray): The worst relative violation of the exchange
    symmetries of M and R at each monitor time
    '''

    times: np.ndarray
    delta: np.ndarray
    kappa_fit: float
    converged: bool
    symmetry_error: Optional[np.ndarray] = None

# ------------------------------------------------------
# Hard cutoff records
# ------------------------------------------------------

@dataclass(frozen=True, order=True)
class CorrelatorIndex(BlandauType):
    '''
    A normal-ordered monomial ⟨Π φ†_k^a_k Π φ_k^b_k⟩

    ## Description
    The exponents are stored as sparse maps, i.e. tuples of (mode, exponent) pairs
    sorted by mode, where the mode is the array position of the momentum in
    discrete Fourier transform order. The order of the fields makes instances
    sortable by (order, a, b), which is the enumeration order.
    '''

    order: int
    a: Tuple[Tuple[int, int], ...]
    b: Tuple[Tuple[int, int], ...]

    @classmethod
    def from_maps(cls, a:Dict[int, int], b:Dict[int, int]) -> 'CorrelatorIndex':
        a = tuple(sorted((mode, exp) for mode,exp in a.items() if exp))
        b = tuple(sorted((mode, exp) for mode,exp in b.items() if exp))
        return cls(
            order = sum(exp for _,exp in a) + sum(exp for _,exp in b),
            a = a,
            b = b,
        )

    def conjugate(self) -> 'CorrelatorIndex':
        return CorrelatorIndex(order=self.order, a=self.b, b=self.a)

    @property
    def self_conjugate(self) -> bool:
        return self.a == self.b

    @property
    def canonical(self) -> bool:
        '''
        Whether this index is the stored member of its conjugate pair

        ## Description
        The member with more annihilators is stored, ties are broken by comparing
        the annihilator map with the creator map.
        '''
        n_a = sum(exp for _,exp in self.a)
        n_b = sum(exp for _,exp in self.b)
        if n_b != n_a:
            return n_b > n_a
        return self.b >= self.a

    def momentum(self, L:int) -> int:
        '''The total momentum Σ m (b_m - a_m) modulo L.'''
        return (sum(mode * exp for mode,exp in self.b) - sum(mode * exp for mode,exp in self.a)) % L

@dataclass(frozen=True, eq=False)
class HcSystem(BlandauType):
    '''
    The linear steady-state system of the hard cutoff hierarchy

    ## Description
    The steady state solves 0 = matrix·C + conjugate_matrix·C* + drive, where C holds
    the canonical correlators in `index_list` order.
    '''

    index_list: List[CorrelatorIndex]
    matrix: Any
    conjugate_matrix: Any
    drive: np.ndarray
    tags: Dict[Tuple[int, int, bool], frozenset]
    cutoff: int

@dataclass(frozen=True, eq=False)
class HcSolution(BlandauType):
    '''
    The solved hard cutoff hierarchy

    ## Parameters
    - `state` (SecondOrderState): The extracted n_k and c_k
    - `values` (np.ndarray): The full canonical correlator vector
    - `index_list` (list): The indices the values belong to
    - `condition` (float): A 1-norm condition estimate of the real system
    '''

    state: SecondOrderState
    values: np.ndarray
    index_list: List[CorrelatorIndex]
    condition: float

    @cached_property
    def positions(self) -> Dict[CorrelatorIndex, int]:
        return {one:position for position,one in enumerate(self.index_list)}

    def value(self, index:CorrelatorIndex) -> complex:
        '''
        Looks up a correlator, conjugating when the canonical partner is stored

        ## Raises
        - `KeyError`: When neither the index nor its conjugate is part of the system
        '''
        lookup = self.positions
        if index in lookup:
            return complex(self.values[lookup[index]])
        return complex(np.conj(self.values[lookup[index.conjugate()]]))

# ------------------------------------------------------
# Disorder records
# ------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DisorderPotential(BlandauType):
    '''
    A static random on-site potential and its Fourier transform

    ## Description
    The transform convention is V_j = L^(-1/2) Σ_k V_k e^(ikj), so V_k is the
    unitary discrete Fourier transform of the site values and V_(-k) = V_k*.
    '''

    V_site: np.ndarray
    V_k: np.ndarray
    sigma: float
    seed: int

@dataclass(frozen=True, eq=False)
class DisorderEnsemble(BlandauType):
    '''
    The response of the momentum distribution averaged over disorder realizations

    ## Parameters
    - `mean` (np.ndarray): The seed-averaged δn_k
    - `per_seed` (np.ndarray): One row of δn_k per seed, in seed order
    - `expected` (np.ndarray): The white-noise expectation of δn_k
    - `variance_ratio` (float): The variance over k of mean/expected, which falls
    off as one over the number of seeds
    - `seeds` (list): The seeds in merge order
    '''

    mean: np.ndarray
    per_seed: np.ndarray
    expected: np.ndarray
    variance_ratio: float
    seeds: List[int]
