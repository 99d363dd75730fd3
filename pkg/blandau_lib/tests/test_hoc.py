import unittest

import numpy as np
from django.conf import settings
from django.test import SimpleTestCase

from blandau_lib.contour import resonance_contours
from blandau_lib.exceptions import ConfigError, ZeroMomentumArm
from blandau_lib.hoc import (
    HierarchyRhs, change_rate, contour_cells, detection_map, detection_signal,
    deviation_from_bogoliubov, evolve_to_steady_state, fit_decay_rate, hoc_rhs,
    initial_state, symmetry_error, third_order_map,
)
from blandau_lib.model_core import bogoliubov_steady_state, dispersion_tables, solve_mean_field
from blandau_lib.types import CorrelationState, HocOptions, ModelParams, Tolerances
from blandau_lib.utils import momentum_grid, nearest_mode

BOGOLIUBOV_LIMIT = HocOptions(freeze_third_order=True, back_reaction=False)

def standard_params(L):
    return ModelParams(L=L, J=30.0, U=0.1, Delta=-10.0, n0_target=100.0)

def mild_params(L, U=0.1):
    # Un0 = 1 on a band of width 4γ
    return ModelParams(L=L, J=1.0, U=U, Delta=-1.0, n0_target=1.0 / U)

def bogoliubov_start(params):
    mf = solve_mean_field(params)
    reference = bogoliubov_steady_state(dispersion_tables(mf, params), mf)
    return mf, reference, initial_state(mf, reference)

class RightHandSideTests(SimpleTestCase):

    def test_non_interacting_chain_is_stationary(self):
        params = ModelParams(L=8, J=30.0, U=0.0, Delta=-10.0, n0_target=100.0)
        mf, _, state = bogoliubov_start(params)
        derivative = hoc_rhs(state, params, mf)
        self.assertLess(abs(derivative.psi0), 1e-12)
        for part in (derivative.n, derivative.c, derivative.M, derivative.R):
            self.assertLess(np.max(np.abs(part)), 1e-12)

    def test_bogoliubov_state_is_stationary_without_third_order(self):
        params = standard_params(16)
        mf, reference, state = bogoliubov_start(params)
        derivative = hoc_rhs(state, params, mf, BOGOLIUBOV_LIMIT)
        self.assertLess(np.max(np.abs(derivative.n) / reference.n), 1e-10)
        self.assertLess(np.max(np.abs(derivative.c) / np.abs(reference.c)), 1e-10)
        self.assertLess(abs(derivative.psi0), 1e-10)

    def test_single_mode_occupation(self):
        # A lone occupation decays and the pair term drives every c_k
        params = standard_params(8)
        mf = solve_mean_field(params)
        n = np.zeros(8)
        n[3] = 0.5
        state = CorrelationState(
            psi0 = mf.psi0, n = n, c = np.zeros(8, dtype=complex),
            M = np.zeros((8, 8), dtype=complex), R = np.zeros((8, 8), dtype=complex),
        )
        derivative = hoc_rhs(state, params, mf, HocOptions(back_reaction=False))
        self.assertAlmostEqual(derivative.n[3], -0.5)
        self.assertTrue(np.all(derivative.n[np.arange(8) != 3] == 0))
        self.assertAlmostEqual(abs(derivative.c[3]), 20.0)
        self.assertAlmostEqual(abs(derivative.c[1]), 10.0)

    def single_entry_state(self, L, mf, n=None, c=None, M=None):
        return CorrelationState(
            psi0 = mf.psi0,
            n = np.zeros(L) if n is None else n,
            c = np.zeros(L, dtype=complex) if c is None else c,
            M = np.zeros((L, L), dtype=complex) if M is None else M,
            R = np.zeros((L, L), dtype=complex),
        )

    def test_occupation_drives_third_order(self):
        # Only the terms of F^(M) holding n_3 survive, R stays at rest
        L, x = 8, 0.5
        params = standard_params(L)
        mf = solve_mean_field(params)
        n = np.zeros(L)
        n[3] = x
        derivative = hoc_rhs(self.single_entry_state(L, mf, n=n), params, mf, HocOptions(back_reaction=False))

        q = np.arange(L)
        expected = np.zeros((L, L), dtype=complex)
        expected[3] = -x * (1 + x * (q == 3) + x * (q == 0))
        expected[6, 3] += x ** 2
        expected *= -2j * params.U * np.conj(mf.psi0) / np.sqrt(L)
        np.testing.assert_allclose(derivative.M, expected, atol=1e-12)
        self.assertEqual(np.max(np.abs(derivative.R)), 0.0)

    def test_anomalous_entry_drives_third_order(self):
        L, y = 8, 0.3 - 0.2j
        params = standard_params(L)
        mf = solve_mean_field(params)
        c = np.zeros(L, dtype=complex)
        c[3] = y
        derivative = hoc_rhs(self.single_entry_state(L, mf, c=c), params, mf, HocOptions(back_reaction=False))

        root_L = np.sqrt(L)
        expected = np.zeros((L, L), dtype=complex)
        for k in range(L):
            for q in range(L):
                s = (k + q) % L
                linear = (k == 3) + (q == 3) + (s == 3)
                quadratic = (k == 3 and q == 3) + (k == 3 and s == 3) + (q == 3 and s == 3)
                expected[k, q] = 2 * params.U * (mf.psi0 * y * linear + np.conj(mf.psi0) * y ** 2 * quadratic) / root_L
        np.testing.assert_allclose(derivative.R, -1j * expected, atol=1e-12)

        # F^(M) keeps only -c_k(c*_q + c*_(k-q)) at k = 3
        expected = np.zeros((L, L), dtype=complex)
        expected[3, 3] = expected[3, 0] = -abs(y) ** 2
        expected *= -2j * params.U * np.conj(mf.psi0) / root_L
        np.testing.assert_allclose(derivative.M, expected, atol=1e-12)

    def test_single_third_order_entry(self):
        L, m = 8, 0.1 + 0.2j
        params = standard_params(L)
        mf = solve_mean_field(params)
        U, psi = params.U, mf.psi0
        M = np.zeros((L, L), dtype=complex)
        M[5, 1] = m
        derivative = hoc_rhs(self.single_entry_state(L, mf, M=M), params, mf, HocOptions(back_reaction=False))

        eps = -mf.delta - 2 * params.J * np.cos(momentum_grid(L)) + U * abs(psi) ** 2
        detuning = eps[5] - eps[1] - eps[4] - U * abs(psi) ** 2 - 1.5j
        expected = np.zeros((L, L), dtype=complex)
        expected[5, 1] = detuning * m
        expected[1, 5] = expected[1, 4] = -U * np.conj(psi) ** 2 * np.conj(m)
        np.testing.assert_allclose(derivative.M, -1j * expected, atol=1e-12)

        expected = np.zeros((L, L), dtype=complex)
        expected[3, 1] = expected[1, 3] = expected[1, 4] = U * psi ** 2 * np.conj(m)
        np.testing.assert_allclose(derivative.R, -1j * expected, atol=1e-12)

        # M_(5,1) enters n_1 through Σ_q M_(q,k) and n_5 through Σ_q M_(k,q)
        dn = np.zeros(L)
        dn[1] = 4 * U / np.sqrt(L) * np.imag(psi * m)
        dn[5] = 2 * U / np.sqrt(L) * np.imag(np.conj(psi) * np.conj(m))
        np.testing.assert_allclose(derivative.n, dn, atol=1e-12)

    def test_packed_call(self):
        params = standard_params(8)
        mf, _, state = bogoliubov_start(params)
        rhs = HierarchyRhs(params, mf)
        packed = rhs(0.0, state.pack())
        np.testing.assert_allclose(packed, rhs.derivative(state).pack())
        self.assertEqual(packed.shape, (1 + 2 * 8 + 2 * 64,))

    def test_options_validation(self):
        with self.assertRaises(ConfigError):
            HocOptions(dt_monitor=0.0)
        with self.assertRaises(ConfigError):
            HocOptions(eps_stop=-1.0)

class MonitorTests(SimpleTestCase):

    def test_change_rate(self):
        rate = change_rate(np.array([1.0, 2.0]), np.array([1.1, 2.0]), 1.0, 1e-12)
        self.assertAlmostEqual(rate, 0.05)

    def test_change_rate_guard(self):
        rate = change_rate(np.array([0.0, 1.0]), np.array([5.0, 1.0]), 0.5, 1e-12)
        self.assertEqual(rate, 0.0)

    def test_decay_rate(self):
        times = np.arange(10.0)
        self.assertAlmostEqual(fit_decay_rate(times, 3 * np.exp(-0.5 * times)), 0.5)
        self.assertTrue(np.isnan(fit_decay_rate(times[:1], np.ones(1))))

    def test_symmetric_third_order(self):
        params = standard_params(8)
        _, _, state = bogoliubov_start(params)
        self.assertEqual(symmetry_error(state), 0.0)

class RelaxationTests(SimpleTestCase):

    def test_bogoliubov_limit(self):
        params = standard_params(128)
        _, reference, _ = bogoliubov_start(params)
        tolerances = Tolerances(hoc_rtol=1e-11, hoc_atol=1e-14)
        state, trace = evolve_to_steady_state(params, options=BOGOLIUBOV_LIMIT, tolerances=tolerances)
        np.testing.assert_allclose(state.n, reference.n, rtol=1e-8)
        self.assertTrue(trace.converged)

    def test_bogoliubov_limit_from_half_occupations(self):
        params = mild_params(4)
        mf, reference, start = bogoliubov_start(params)
        start = CorrelationState(psi0=start.psi0, n=0.5 * start.n, c=0.5 * start.c, M=start.M, R=start.R)
        tolerances = Tolerances(hoc_rtol=1e-10, hoc_atol=1e-13)

        state, trace = evolve_to_steady_state(params, eps_stop=1e-10, options=BOGOLIUBOV_LIMIT, tolerances=tolerances, initial=start)
        np.testing.assert_allclose(state.n, reference.n, rtol=1e-7)
        self.assertGreater(trace.kappa_fit, 0)
        self.assertGreater(state.t, 10.0)

    def test_full_hierarchy_small_chain(self):
        params = mild_params(8, U=0.02)
        _, reference, _ = bogoliubov_start(params)
        state, trace = evolve_to_steady_state(params)

        self.assertTrue(trace.converged)
        self.assertTrue(np.all(state.n > 0))
        self.assertLess(symmetry_error(state), 1e-8)
        _, relative = deviation_from_bogoliubov(state, reference)
        self.assertLess(np.max(np.abs(relative)), 0.2)
        self.assertGreater(np.max(np.abs(state.M)), 0)

class ThirdOrderMapTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.params = standard_params(64)
        cls.mf = solve_mean_field(cls.params)
        cls.tables = dispersion_tables(cls.mf, cls.params)

    def synthetic_state(self, M):
        L = self.params.L
        return CorrelationState(
            psi0 = self.mf.psi0, n = np.ones(L), c = np.zeros(L, dtype=complex),
            M = M.astype(complex), R = np.zeros((L, L), dtype=complex),
        )

    def test_contour_cells(self):
        near = contour_cells(self.tables, 1)
        wide = contour_cells(self.tables, 5)
        self.assertTrue(near.any())
        self.assertTrue(np.all(wide[near]))
        self.assertFalse(wide.all())

    def test_enhancement_detected(self):
        M = 1.0 + 10.0 * contour_cells(self.tables, 1)
        magnitude, stats = third_order_map(self.synthetic_state(M), self.tables)
        np.testing.assert_allclose(magnitude, M)
        self.assertTrue(stats['enhanced'])
        self.assertAlmostEqual(stats['background_median'], 1.0)
        self.assertAlmostEqual(stats['enhancement'], 11.0)

    def test_flat_map_is_not_enhanced(self):
        _, stats = third_order_map(self.synthetic_state(np.ones((64, 64))), self.tables)
        self.assertFalse(stats['enhanced'])
        self.assertIsNone(third_order_map(self.synthetic_state(np.ones((64, 64))))[1])

    def test_detection_signal(self):
        M = np.zeros((64, 64), dtype=complex)
        k, q = 2 * np.pi * 10 / 64, 2 * np.pi * 3 / 64
        M[10, 3] = 0.25j
        state = self.synthetic_state(M)
        signal = detection_signal(state, 2.0, 0.0, 0.0, k, q)
        self.assertAlmostEqual(signal, 0.0)
        signal = detection_signal(state, 2.0, np.pi / 2, 0.0, k, q)
        self.assertAlmostEqual(signal, -1.0)

        with self.assertRaises(ZeroMomentumArm):
            detection_signal(state, 2.0, 0.0, 0.0, k, k)
        with self.assertRaises(ZeroMomentumArm):
            detection_signal(state, 2.0, 0.0, 0.0, 0.0, q)

    def test_detection_map(self):
        M = np.full((64, 64), 0.5 + 0j)
        signal = detection_map(self.synthetic_state(M), 1.0)
        self.assertTrue(np.all(np.isnan(signal[0])))
        self.assertTrue(np.all(np.isnan(signal[:, 0])))
        self.assertTrue(np.isnan(signal[7, 7]))
        self.assertAlmostEqual(signal[7, 3], 1.0)

@unittest.skipUnless(settings.BLANDAU_SLOW_TESTS, 'Desk-scale hierarchy runs')
class DeskScaleTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.params = standard_params(128)
        mf, reference, _ = bogoliubov_start(cls.params)
        cls.tables = dispersion_tables(mf, cls.params)
        cls.state, cls.trace = evolve_to_steady_state(cls.params, eps_stop=1e-6)
        cls.dn, cls.relative = deviation_from_bogoliubov(cls.state, reference)
        cls.extremal = resonance_contours(cls.tables).extremal

    def window(self, k, width=3):
        return (nearest_mode(k, 128) + np.arange(-width, width + 1)) % 128

    def test_standard_chain(self):
        self.assertTrue(self.trace.converged)
        self.assertTrue(np.all(self.state.n >= 0))
        _, stats = third_order_map(self.state, self.tables)
        self.assertTrue(stats['enhanced'])

    def test_peaks_and_dips(self):
        for k in (self.extremal.q_min, self.extremal.q_max):
            self.assertGreater(np.max(self.dn[self.window(k)]), 0)
        for k in (self.extremal.k_min, self.extremal.k_max):
            self.assertLess(np.min(self.dn[self.window(k)]), 0)

        self.assertGreater(self.dn[nearest_mode(self.extremal.q_min, 128)], 0)
        self.assertLess(self.dn[nearest_mode(self.extremal.k_max, 128)], 0)

    def test_deviation_near_q_min(self):
        peak = np.max(self.relative[self.window(self.extremal.q_min)])
        self.assertGreaterEqual(peak, 0.01)
        self.assertLessEqual(peak, 0.04)

    def test_band_edges(self):
        # Away from resonance only the renormalized couplings shift n_k, by a few 1e-3
        near_zero = np.arange(1, 6)
        near_pi = 64 + np.array([0, -1, 1, -2, 2])
        edges = np.abs(self.relative[np.concatenate([near_zero, near_pi])])

        self.assertLess(np.max(edges), 1e-2)
        self.assertLess(np.max(edges), np.max(self.relative[self.window(self.extremal.q_min)]))

    def test_interaction_scaling(self):
        # Same Un0 = 10, five times weaker interaction
        weak = ModelParams(L=128, J=30.0, U=0.02, Delta=-10.0, n0_target=500.0)
        _, reference, _ = bogoliubov_start(weak)
        state, trace = evolve_to_steady_state(weak, eps_stop=1e-6)
        dn, _ = deviation_from_bogoliubov(state, reference)

        self.assertTrue(trace.converged)
        visible = np.abs(self.dn) > 1e-4
        visible[0] = False
        self.assertGreater(visible.sum(), 3)
        np.testing.assert_allclose(dn[visible], 0.2 * self.dn[visible], rtol=0.15)
