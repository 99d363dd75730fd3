# -------------------------------------------------- #
# The hard cutoff hierarchy for small chains: every  #
# momentum conserving normal-ordered correlator up   #
# to a given order is an unknown of one linear       #
# steady-state system, all higher orders are zero.   #
# The couplings are generated by commuting each      #
# monomial with the fluctuation Hamiltonian.         #
# -------------------------------------------------- #

from collections import Counter, defaultdict
from dataclasses import replace
from itertools import combinations, combinations_with_replacement
from math import comb
from typing import Dict, Iterable, List, Optional, Tuple
import logging

import numpy as np
import pandas as pd
from scipy import sparse
from scipy.sparse.linalg import LinearOperator, onenormest, splu

from .enums import ALL_GROUPS, Scheme, TermGroup
from .exceptions import ConfigError, InternalMismatch, SingularSystem, TooLarge
from .hoc import evolve_to_steady_state
from .model_core import GAMMA, bogoliubov_steady_state, dispersion_tables, solve_mean_field
from .types import (
    CorrelatorIndex, HcSolution, HcSystem, MeanField, ModelParams,
    SecondOrderState, Tolerances,
)
from .utils import index_tables, momentum_grid

logger = logging.getLogger('blandau')

MAX_L = 16
MAX_CUTOFF = 6

# A monomial is a pair of sorted tuples: the modes of the creators and of the annihilators
Monomial = Tuple[Tuple[int, ...], Tuple[int, ...]]

# ------------------------------------------------------
# Enumeration
# ------------------------------------------------------

def projected_count(L:int, N_c:int) -> int:
    '''The expected number of canonical correlators, used to refuse oversized systems early.'''
    total = sum(comb(2 * L + order - 1, order) for order in range(1, N_c + 1))
    return total // (2 * L) + 1

def enumerate_correlators(L:int, N_c:int, cap:int = Tolerances().hc_cap) -> List[CorrelatorIndex]:
    '''
    Lists the unknowns of the hard cutoff system

    ## Description
    Every multiset of N creators and annihilators with 1 ≤ N ≤ N_c is visited
    once. Those that conserve momentum and are the stored member of their
    conjugate pair are kept, sorted by order and then lexicographically.

    ## Parameters
    - `L` (int): The number of modes, at most 16
    - `N_c` (int): The cutoff order, at most 6
    - `cap` (int): The largest admissible number of correlators

    ## Returns
    - `list`: The canonical correlator indices

    ## Raises
    - `ConfigError`: When L or N_c is outside the supported range
    - `TooLarge`: When the count exceeds the cap
    '''
    if not 2 <= L <= MAX_L or not 1 <= N_c <= MAX_CUTOFF:
        raise ConfigError(f"The hard cutoff supports L ≤ {MAX_L} and 1 ≤ N_c ≤ {MAX_CUTOFF}, got L={L}, N_c={N_c}")
    if projected_count(L, N_c) > cap:
        raise TooLarge(f"About {projected_count(L, N_c)} correlators expected for L={L}, N_c={N_c}, the cap is {cap}")

    indices = []
    for order in range(1, N_c + 1):
        # Types below L are creators of mode t, the others annihilators of mode t - L
        for combo in combinations_with_replacement(range(2 * L), order):
            if sum(t - L for t in combo if t >= L) % L != sum(t for t in combo if t < L) % L:
                continue
            index = CorrelatorIndex.from_maps(
                Counter(t for t in combo if t < L),
                Counter(t - L for t in combo if t >= L),
            )
            if index.canonical:
                indices.append(index)

    if len(indices) > cap:
        raise TooLarge(f"{len(indices)} correlators exceed the cap of {cap}")

    logger.debug(f"Enumerated {len(indices)} correlators for L={L}, N_c={N_c}")
    return sorted(indices)

def to_monomial(index:CorrelatorIndex) -> Monomial:
    expand = lambda pairs: tuple(mode for mode,exp in pairs for _ in range(exp))
    return expand(index.a), expand(index.b)

def to_index(monomial:Monomial) -> CorrelatorIndex:
    return CorrelatorIndex.from_maps(Counter(monomial[0]), Counter(monomial[1]))

# ------------------------------------------------------
# Fluctuation Hamiltonian
# ------------------------------------------------------

class FluctuationHamiltonian():
    '''
    The Hamiltonian of the fluctuations around a fixed condensate

    ## Description
    The terms are normal-ordered monomials with merged coefficients, one list
    per `TermGroup`:

    - Σ_k (ε_k + Un0) φ†_k φ_k
    - ½ Σ_k (Uψ0² φ†_k φ†_-k + Uψ0*² φ_-k φ_k)
    - (U/√L) Σ_(k,q) (ψ0 φ†_k φ†_q φ_(k+q) + ψ0* φ†_(k+q) φ_q φ_k)
    - (U/2L) Σ_(k,q,p) φ†_(k+p) φ†_(q-p) φ_q φ_k

    The terms linear in φ vanish because the condensate is the mean-field
    fixed point. Terms are indexed by the modes of their creators and
    annihilators so that only the ones that can contract with a given
    correlator are visited.
    '''

    def __init__(self, params:ModelParams, mf:MeanField, groups:Iterable[TermGroup] = ALL_GROUPS):
        L = params.L
        self.L = L
        self.groups = frozenset(groups)
        tables = dispersion_tables(mf, params)
        neg, k_minus_q, k_plus_q = index_tables(L)

        U = params.U
        psi0 = mf.psi0
        pair = U * psi0 ** 2
        cubic = U / np.sqrt(L)

        merged = {group: defaultdict(complex) for group in TermGroup}

        def add(group:TermGroup, coefficient:complex, creators, annihilators):
            merged[group][(tuple(sorted(int(m) for m in creators)), tuple(sorted(int(m) for m in annihilators)))] += coefficient

        for k in range(L):
            add(TermGroup.detuning_loss, tables.eps[k] + tables.Un0, [k], [k])
            add(TermGroup.pair_creation, 0.5 * pair, [k, neg[k]], [])
            add(TermGroup.pair_annihilation, 0.5 * np.conj(pair), [], [k, neg[k]])
            for q in range(L):
                add(TermGroup.cubic_psi0, cubic * psi0, [k, q], [k_plus_q[k, q]])
                add(TermGroup.cubic_psi0_conj, cubic * np.conj(psi0), [k_plus_q[k, q]], [q, k])
                if TermGroup.quartic in self.groups:
                    for p in range(L):
                        add(TermGroup.quartic, 0.5 * U / L, [k_plus_q[k, p], k_minus_q[q, p]], [q, k])

        self.terms: Dict[TermGroup, List[Tuple[complex, Monomial]]] = {}
        self.by_creator: Dict[TermGroup, Dict[int, List[int]]] = {}
        self.by_annihilator: Dict[TermGroup, Dict[int, List[int]]] = {}
        for group in self.groups:
            terms = [(coefficient, monomial) for monomial,coefficient in sorted(merged[group].items()) if coefficient != 0]
            by_creator, by_annihilator = defaultdict(list), defaultdict(list)
            for position,(_, (creators, annihilators)) in enumerate(terms):
                for mode in set(creators):
                    by_creator[mode].append(position)
                for mode in set(annihilators):
                    by_annihilator[mode].append(position)
            self.terms[group] = terms
            self.by_creator[group] = by_creator
            self.by_annihilator[group] = by_annihilator

    def candidates(self, group:TermGroup, monomial:Monomial) -> List[int]:
        '''The terms of a group sharing a contractible mode with the monomial.'''
        creators, annihilators = monomial
        found = set()
        for mode in set(annihilators):
            found.update(self.by_creator[group].get(mode, ()))
        for mode in set(creators):
            found.update(self.by_annihilator[group].get(mode, ()))
        return sorted(found)

def _contractions(annihilators:Tuple[int, ...], creators:Tuple[int, ...]):
    '''
    Every way of moving the annihilators left of the creators to the right

    ## Description
    Yields (multiplicity, remaining annihilators, remaining creators) for every
    non-empty subset of creator slots, the multiplicity being the number of
    annihilator slots of equal modes they can be paired with.
    '''
    slots = range(len(creators))
    for size in range(1, len(creators) + 1):
        for subset in combinations(slots, size):
            remaining = list(annihilators)
            multiplicity = 1
            for slot in subset:
                matches = remaining.count(creators[slot])
                if not matches:
                    multiplicity = 0
                    break
                multiplicity *= matches
                remaining.remove(creators[slot])
            if multiplicity:
                leftover = [mode for slot,mode in enumerate(creators) if slot not in subset]
                yield multiplicity, tuple(remaining), tuple(leftover)

def commutator_terms(
    monomial:Monomial,
    hamiltonian:FluctuationHamiltonian,
) -> Dict[Monomial, Dict[TermGroup, complex]]:
    '''
    The right-hand side of i d⟨C⟩/dt for one normal-ordered monomial

    ## Description
    The commutator of two normal-ordered products only keeps the terms with at
    least one contraction: C·T contributes the contractions of the annihilators
    of C with the creators of T, and T·C those of the annihilators of T with the
    creators of C, with the opposite sign. The loss adds -iγN/2 on the diagonal.

    ## Returns
    - `dict`: The coefficient of each resulting monomial per term group, the
    empty monomial standing for the constant one
    '''
    creators, annihilators = monomial
    result: Dict[Monomial, Dict[TermGroup, complex]] = defaultdict(lambda: defaultdict(complex))

    if TermGroup.detuning_loss in hamiltonian.groups:
        result[monomial][TermGroup.detuning_loss] += -0.5j * GAMMA * (len(creators) + len(annihilators))

    for group in hamiltonian.groups:
        terms = hamiltonian.terms[group]
        for position in hamiltonian.candidates(group, monomial):
            coefficient, (t_creators, t_annihilators) = terms[position]

            for multiplicity, rest, leftover in _contractions(annihilators, t_creators):
                key = (tuple(sorted(creators + leftover)), tuple(sorted(rest + t_annihilators)))
                result[key][group] += coefficient * multiplicity

            for multiplicity, rest, leftover in _contractions(t_annihilators, creators):
                key = (tuple(sorted(t_creators + leftover)), tuple(sorted(rest + annihilators)))
                result[key][group] -= coefficient * multiplicity

    return result

# ------------------------------------------------------
# Assembly and solution
# ------------------------------------------------------

def assemble_system(
    params:ModelParams,
    mf:MeanField,
    N_c:int,
    term_groups:Iterable[TermGroup] = ALL_GROUPS,
    tolerances:Tolerances = Tolerances(),
) -> HcSystem:
    '''
    Assembles the steady-state equations of the hard cutoff hierarchy

    ## Description
    For every canonical correlator C the equation i dC/dt = Σ A C' + Σ B C'* + d
    is generated, where correlators above the cutoff are dropped and constants
    collect in the drive. A coupling to a non-canonical correlator is stored as a
    coupling to the conjugate of its canonical partner. The steady state is the
    solution of 0 = A C + B C* + d.

    ## Parameters
    - `params` (ModelParams): The model parameters, L ≤ 16
    - `mf` (MeanField): The fixed condensate
    - `N_c` (int): The cutoff order
    - `term_groups` (iterable): The groups of Hamiltonian terms to include

    ## Returns
    - `HcSystem`: The sparse system with the term group of every entry

    ## Raises
    - `InternalMismatch`: When a coupling breaks momentum conservation
    - `TooLarge`: When the system exceeds the cap
    '''
    index_list = enumerate_correlators(params.L, N_c, tolerances.hc_cap)
    lookup = {index:position for position,index in enumerate(index_list)}
    hamiltonian = FluctuationHamiltonian(params, mf, term_groups)
    size = len(index_list)
    L = params.L

    entries = {False: defaultdict(complex), True: defaultdict(complex)}
    tags = defaultdict(set)
    drive = np.zeros(size, dtype=complex)

    for row, index in enumerate(index_list):
        for monomial, by_group in commutator_terms(to_monomial(index), hamiltonian).items():
            value = sum(by_group.values())
            if value == 0:
                continue
            order = len(monomial[0]) + len(monomial[1])
            if order > N_c:
                continue
            if order == 0:
                drive[row] += value
                continue

            target = to_index(monomial)
            if target.momentum(L):
                raise InternalMismatch(f"The row of {index} couples to the non-conserving {target}")
            conjugated = not target.canonical
            if conjugated:
                target = target.conjugate()
            if target not in lookup:
                raise InternalMismatch(f"The row of {index} couples to {target} which is not enumerated")

            column = lookup[target]
            entries[conjugated][(row, column)] += value
            tags[(row, column, conjugated)].update(group for group,one in by_group.items() if one != 0)

    def to_matrix(values:Dict[Tuple[int, int], complex]):
        if not values:
            return sparse.csr_matrix((size, size), dtype=complex)
        keys = list(values)
        return sparse.csr_matrix(
            ([values[key] for key in keys], ([key[0] for key in keys], [key[1] for key in keys])),
            shape = (size, size),
            dtype = complex,
        )

    logger.info(f"Hard cutoff system of {size} correlators for L={L}, N_c={N_c}")
    return HcSystem(
        index_list = index_list,
        matrix = to_matrix(entries[False]),
        conjugate_matrix = to_matrix(entries[True]),
        drive = drive,
        tags = {key:frozenset(value) for key,value in tags.items()},
        cutoff = N_c,
    )

def real_system(system:HcSystem):
    '''
    The equivalent real system of twice the size

    ## Description
    Writing C = x + iy, the equations A C + B C* = -d become
    [[Ar + Br, Bi - Ai], [Ai + Bi, Ar - Br]] (x, y) = -(dr, di).
    '''
    A, B = system.matrix, system.conjugate_matrix
    matrix = sparse.bmat([
        [A.real + B.real, B.imag - A.imag],
        [A.imag + B.imag, A.real - B.real],
    ], format='csc')
    rhs = -np.concatenate([system.drive.real, system.drive.imag])
    return matrix, rhs

def condition_estimate(matrix, factor) -> float:
    '''The 1-norm condition number estimate ‖A‖₁ ‖A⁻¹‖₁.'''
    inverse = LinearOperator(
        matrix.shape,
        matvec = lambda x: factor.solve(np.asarray(x, dtype=float).ravel()),
        rmatvec = lambda x: factor.solve(np.asarray(x, dtype=float).ravel(), trans='T'),
        dtype = float,
    )
    if matrix.shape[0] < 3:
        return float(np.linalg.cond(matrix.toarray(), 1))
    return float(onenormest(matrix) * onenormest(inverse))

def second_order_rows(index_list:List[CorrelatorIndex], L:int) -> Tuple[List[CorrelatorIndex], List[CorrelatorIndex]]:
    '''The indices of n_k = ⟨φ†_k φ_k⟩ and c_k = ⟨φ_k φ_-k⟩ in Fourier order.'''
    neg, _, _ = index_tables(L)
    n_index = [CorrelatorIndex.from_maps({k: 1}, {k: 1}) for k in range(L)]
    c_index = [CorrelatorIndex.from_maps({}, Counter([k, int(neg[k])])) for k in range(L)]
    return n_index, c_index

def solve_system(system:HcSystem, L:int, tolerances:Tolerances = Tolerances()) -> HcSolution:
    '''
    Solves an assembled system with a sparse LU factorization

    ## Raises
    - `SingularSystem`: When the factorization fails or the condition estimate
    exceeds the configured bound
    '''
    matrix, rhs = real_system(system)
    try:
        factor = splu(matrix)
    except RuntimeError as exc:
        raise SingularSystem(f"The hard cutoff system could not be factorized: {exc}")

    condition = condition_estimate(matrix, factor)
    if not np.isfinite(condition) or condition > tolerances.hc_condition_max:
        raise SingularSystem(f"The hard cutoff system is ill-conditioned, cond₁ ≈ {condition:.3g}", condition=condition)

    solution = factor.solve(rhs)
    size = len(system.index_list)
    values = solution[:size] + 1j * solution[size:]
    if not np.all(np.isfinite(values)):
        raise SingularSystem("The hard cutoff solution is not finite", condition=condition)

    result = HcSolution(state=None, values=values, index_list=system.index_list, condition=condition)
    if system.cutoff < 2:
        # Second order is truncated away
        state = SecondOrderState(n=np.zeros(L), c=np.zeros(L, dtype=complex))
    else:
        n_index, c_index = second_order_rows(system.index_list, L)
        state = SecondOrderState(
            n = np.array([result.value(index).real for index in n_index]),
            c = np.array([result.value(index) for index in c_index]),
        )
    logger.debug(f"Hard cutoff N_c={system.cutoff} solved, cond₁ ≈ {condition:.3g}")
    return replace(result, state=state)

def solve_hc(
    params:ModelParams,
    N_c:int,
    term_groups:Iterable[TermGroup] = ALL_GROUPS,
    tolerances:Tolerances = Tolerances(),
) -> HcSolution:
    '''
    The steady state of the hard cutoff hierarchy

    ## Description
    The condensate is held at the mean-field value, so the truncated hierarchy
    is linear and its steady state is found by a direct solve instead of a time
    integration. ⟨φ_0⟩ is one of the unknowns.

    ## Returns
    - `HcSolution`: n_k, c_k and the full correlator vector

    ## Raises
    - `SingularSystem`: With the condition estimate
    '''
    mf = solve_mean_field(params, tolerances)
    system = assemble_system(params, mf, N_c, term_groups, tolerances)
    return solve_system(system, params.L, tolerances)

# ------------------------------------------------------
# Scheme comparison
# ------------------------------------------------------

def delta_n(n:np.ndarray, reference:np.ndarray) -> float:
    '''Δn = 1/L Σ_k |n_k - n_k^bog| / n_k^bog.'''
    return float(np.mean(np.abs(n - reference) / reference))

def compare_truncations(
    params:ModelParams,
    schemes:Iterable[Scheme],
    U_values:Optional[Iterable[float]] = None,
    tolerances:Tolerances = Tolerances(),
) -> Tuple[pd.DataFrame, pd.DataFrame]:
    '''
    Compares truncation schemes against the Bogoliubov distribution

    ## Description
    The mean-field energy Un0 of `params` is kept fixed while U is varied, so the
    density follows as n0 = Un0/U and the Bogoliubov reference is the same for
    every U. The hard cutoff schemes are solved directly and the factorized
    cutoff is relaxed with the hierarchy integrator. At U = 0 the corrections
    vanish and Δn is zero for every scheme.

    ## Parameters
    - `params` (ModelParams): The chain with its renormalized detuning and density
    - `schemes` (iterable): The schemes to compare
    - `U_values` (iterable): The interactions, `params.U` by default

    ## Returns
    - `pd.DataFrame`: One row (scheme, U, delta_n) per scheme and interaction
    - `pd.DataFrame`: The per-mode rows (scheme, U, k, n_k, n_bog, dn_k)
    '''
    schemes = [Scheme(one) for one in schemes]
    U_values = [params.U] if U_values is None else [float(one) for one in U_values]
    mf = solve_mean_field(params, tolerances)
    Un0 = params.U * mf.n0
    if Un0 <= 0:
        raise ConfigError("The comparison needs a positive mean-field energy Un0")

    k_grid = momentum_grid(params.L)
    summary, curves = [], []
    for U in U_values:
        for scheme in schemes:
            if U == 0:
                summary.append({'scheme': scheme.value, 'U': U, 'delta_n': 0.0})
                continue

            point = ModelParams(L=params.L, J=params.J, U=U, Delta=mf.Delta, n0_target=Un0 / U)
            point_mf = solve_mean_field(point, tolerances)
            reference = bogoliubov_steady_state(dispersion_tables(point_mf, point), point_mf).n

            if scheme is Scheme.FC:
                n = evolve_to_steady_state(point, tolerances=tolerances)[0].n
            else:
                n = solve_hc(point, scheme.cutoff, tolerances=tolerances).state.n

            summary.append({'scheme': scheme.value, 'U': U, 'delta_n': delta_n(n, reference)})
            for k in range(params.L):
                curves.append({
                    'scheme': scheme.value, 'U': U, 'k': k_grid[k],
                    'n_k': n[k], 'n_bog': reference[k], 'dn_k': n[k] - reference[k],
                })
            logger.info(f"{scheme.value} at U={U}: Δn = {summary[-1]['delta_n']:.4e}")

    return pd.DataFrame(summary), pd.DataFrame(curves, columns=['scheme', 'U', 'k', 'n_k', 'n_bog', 'dn_k'])
