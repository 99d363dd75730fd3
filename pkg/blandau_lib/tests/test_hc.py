import unittest

import numpy as np
from django.conf import settings
from django.test import SimpleTestCase

from blandau_lib.enums import ALL_GROUPS, QUADRATIC_GROUPS, Scheme, TermGroup
from blandau_lib.exceptions import ConfigError, TooLarge
from blandau_lib.hc import (
    FluctuationHamiltonian, assemble_system, commutator_terms, compare_truncations,
    enumerate_correlators, projected_count, second_order_rows, solve_hc, to_index, to_monomial,
)
from blandau_lib.model_core import bogoliubov_steady_state, dispersion_tables, solve_mean_field
from blandau_lib.types import CorrelatorIndex, ModelParams

def standard_params(L):
    return ModelParams(L=L, J=30.0, U=0.1, Delta=-10.0, n0_target=100.0)

class EnumerationTests(SimpleTestCase):

    def test_counts(self):
        self.assertEqual(len(enumerate_correlators(10, 2)), 17)
        self.assertEqual(len(enumerate_correlators(2, 1)), 1)
        self.assertEqual(len(enumerate_correlators(2, 2)), 5)

    def test_canonical_and_conserving(self):
        indices = enumerate_correlators(6, 3)
        self.assertEqual(indices, sorted(indices))
        self.assertEqual(len(set(indices)), len(indices))
        for index in indices:
            self.assertTrue(index.canonical)
            self.assertEqual(index.momentum(6), 0)
            self.assertTrue(1 <= index.order <= 3)

    def test_second_order_rows_present(self):
        indices = set(enumerate_correlators(4, 2))
        n_index, c_index = second_order_rows(list(indices), 4)
        for index in n_index:
            self.assertIn(index, indices)
        for index in c_index:
            self.assertIn(index, indices)

    def test_limits(self):
        with self.assertRaises(ConfigError):
            enumerate_correlators(32, 2)
        with self.assertRaises(ConfigError):
            enumerate_correlators(4, 7)
        with self.assertRaises(TooLarge):
            enumerate_correlators(16, 6, cap=10)
        self.assertLess(projected_count(10, 4), projected_count(10, 5))

    def test_monomial_round_trip(self):
        index = CorrelatorIndex.from_maps({1: 2}, {0: 1, 2: 1})
        self.assertEqual(to_monomial(index), ((1, 1), (0, 2)))
        self.assertEqual(to_index(to_monomial(index)), index)

class CommutatorTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.params = standard_params(4)
        cls.mf = solve_mean_field(cls.params)
        cls.hamiltonian = FluctuationHamiltonian(cls.params, cls.mf, ALL_GROUPS)

    def totals(self, monomial):
        return {
            key: sum(by_group.values())
            for key, by_group in commutator_terms(monomial, self.hamiltonian).items()
            if abs(sum(by_group.values())) > 1e-12
        }

    def test_conjugate_rows(self):
        for monomial in [((), (1, 3)), ((3,), (1, 2)), ((1,), (1,)), ((), (0,))]:
            direct = self.totals(monomial)
            conjugate = self.totals((monomial[1], monomial[0]))
            self.assertEqual({(key[1], key[0]) for key in direct}, set(conjugate))
            for key, value in direct.items():
                self.assertAlmostEqual(conjugate[(key[1], key[0])], -np.conj(value), places=10)

    def test_occupation_row(self):
        terms = commutator_terms(((1,), (1,)), FluctuationHamiltonian(self.params, self.mf, QUADRATIC_GROUPS))
        P = 0.1 * self.mf.psi0 ** 2
        self.assertAlmostEqual(sum(terms[((1,), (1,))].values()), -1j)
        self.assertAlmostEqual(terms[((1, 3), ())][TermGroup.pair_creation], P)
        self.assertAlmostEqual(terms[((), (1, 3))][TermGroup.pair_annihilation], -np.conj(P))

class SolveTests(SimpleTestCase):

    def test_quadratic_groups_give_bogoliubov(self):
        params = standard_params(10)
        mf = solve_mean_field(params)
        reference = bogoliubov_steady_state(dispersion_tables(mf, params), mf)

        solution = solve_hc(params, 2, QUADRATIC_GROUPS)
        np.testing.assert_allclose(solution.state.n, reference.n, rtol=1e-10)
        np.testing.assert_allclose(solution.state.c, reference.c, rtol=1e-10)
        self.assertAlmostEqual(solution.value(CorrelatorIndex.from_maps({}, {0: 1})), 0)

    def test_pair_drive(self):
        params = standard_params(4)
        mf = solve_mean_field(params)
        system = assemble_system(params, mf, 2, QUADRATIC_GROUPS)
        _, c_index = second_order_rows(system.index_list, 4)
        rows = {system.index_list.index(index) for index in c_index}
        for row, value in enumerate(system.drive):
            self.assertAlmostEqual(value, 10.0 if row in rows else 0.0)
        for groups in system.tags.values():
            self.assertTrue(groups <= QUADRATIC_GROUPS)

    def test_all_groups_differ_at_order_U(self):
        params = standard_params(10)
        quadratic = solve_hc(params, 2, QUADRATIC_GROUPS).state.n
        full = solve_hc(params, 2, ALL_GROUPS).state.n
        deviation = np.max(np.abs(full - quadratic) / quadratic)
        self.assertGreater(deviation, 1e-10)
        self.assertLess(deviation, 0.05)

    def test_first_order_cutoff(self):
        solution = solve_hc(standard_params(4), 1)
        self.assertTrue(np.all(solution.state.n == 0))
        self.assertEqual(len(solution.index_list), 1)

    def test_comparison_tables(self):
        summary, curves = compare_truncations(standard_params(4), [Scheme.HC2], [0.0, 0.1])
        self.assertEqual(list(summary.columns), ['scheme', 'U', 'delta_n'])
        self.assertEqual(summary['delta_n'].iloc[0], 0.0)
        self.assertGreater(summary['delta_n'].iloc[1], 0.0)
        self.assertEqual(len(curves), 4)
        self.assertEqual(list(curves.columns), ['scheme', 'U', 'k', 'n_k', 'n_bog', 'dn_k'])

@unittest.skipUnless(settings.BLANDAU_SLOW_TESTS, 'Fifth-order hard cutoff systems')
class TruncationOrderingTests(SimpleTestCase):

    def test_factorized_cutoff_tracks_fifth_order(self):
        summary, _ = compare_truncations(standard_params(10), ['FC', 'HC4', 'HC5'], [0.02, 0.1])
        table = summary.pivot(index='U', columns='scheme', values='delta_n')
        for _, row in table.iterrows():
            self.assertLess(abs(row['FC'] - row['HC5']), abs(row['HC4'] - row['HC5']))
