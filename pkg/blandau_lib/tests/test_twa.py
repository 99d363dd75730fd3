import unittest

import numpy as np
from django.conf import settings
from django.test import SimpleTestCase

from blandau_lib.contour import resonance_contours
from blandau_lib.exceptions import ConfigError, NumericalBlowup
from blandau_lib.model_core import bogoliubov_steady_state, dispersion_tables, solve_mean_field
from blandau_lib.twa import (
    SplitStepPropagator, initial_field, run_batch, run_trajectory, simulate_ensemble,
    step_trajectory, trajectory_batches,
)
from blandau_lib.types import ModelParams, Tolerances, TwaConfig
from blandau_lib.utils import nearest_mode, trajectory_rng

SMALL = dict(dt=0.005, burn_in=2.0, sample_interval=1.0, n_samples=40, n_trajectories=4, block_size=5)

class TwaConfigTests(SimpleTestCase):

    def test_sampling_validation(self):
        with self.assertRaises(ConfigError):
            TwaConfig(sample_interval=0.5)
        with self.assertRaises(ConfigError):
            TwaConfig(n_samples=10, n_trajectories=20)
        with self.assertRaises(ConfigError):
            TwaConfig(batch_size=0)
        self.assertEqual(TwaConfig(n_samples=100000, n_trajectories=100).samples_per_trajectory, 1000)

    def test_step_bound(self):
        params = ModelParams(L=8, J=30.0, U=0.1, Delta=-10.0, n0_target=100.0)
        mf = solve_mean_field(params)
        TwaConfig(dt=0.005).check_step(params, mf)
        with self.assertRaises(ConfigError):
            TwaConfig(dt=0.01).check_step(params, mf)

    def test_batches(self):
        batches = trajectory_batches(TwaConfig(n_trajectories=10, n_samples=100, batch_size=4))
        self.assertEqual([list(one) for one in batches], [[0, 1, 2, 3], [4, 5, 6, 7], [8, 9]])
        self.assertEqual(len(trajectory_batches(TwaConfig(n_trajectories=3, n_samples=30, batch_size=16))), 1)

class PropagatorTests(SimpleTestCase):

    def test_lossless_noise_free_norm(self):
        params = ModelParams(L=8, J=1.0, U=0.5, Delta=-1.0, n0_target=1.0)
        mf = solve_mean_field(params)
        field = initial_field(mf, 8, trajectory_rng(3, 0))
        norm = np.sum(np.abs(field) ** 2)

        stepped = field
        for _ in range(1000):
            stepped = step_trajectory(stepped, 0.01, trajectory_rng(3, 1), params, mf, loss=0.0, drive=0j)
        self.assertLess(abs(np.sum(np.abs(stepped) ** 2) - norm) / norm, 1e-12)
        self.assertFalse(np.allclose(stepped, field))

    def test_vacuum_noise(self):
        # Loss and noise alone relax every site to half a quantum
        params = ModelParams(L=16, J=1.0, U=0.0, Delta=-1.0, n0_target=1.0)
        mf = solve_mean_field(params)
        propagator = SplitStepPropagator(params, mf, 0.005, drive=0j)
        rngs = [trajectory_rng(9, index) for index in range(200)]

        field = np.zeros((200, 16), dtype=complex)
        for _ in range(2000):
            field = propagator.propagate(field, rngs)
        self.assertAlmostEqual(np.mean(np.abs(field) ** 2), 0.5, delta=0.04)
        self.assertAlmostEqual(np.mean(field.real ** 2), 0.25, delta=0.03)

    def test_batch_rows_follow_their_streams(self):
        params = ModelParams(L=4, J=30.0, U=0.1, Delta=-10.0, n0_target=100.0)
        mf = solve_mean_field(params)
        cfg = TwaConfig(master_seed=4, **SMALL)

        batch = run_batch(params, mf, cfg, [0, 1, 2])
        for index, moments in enumerate(batch):
            alone = run_trajectory(params, mf, cfg, index)
            np.testing.assert_allclose(moments.block_power, alone.block_power, rtol=1e-9)
            np.testing.assert_allclose(moments.block_amplitude, alone.block_amplitude, rtol=1e-9)
            self.assertEqual(moments.samples, alone.samples)

    def test_blowup(self):
        params = ModelParams(L=4, J=1.0, U=0.1, Delta=-1.0, n0_target=1.0)
        mf = solve_mean_field(params)
        field = np.full(4, 1e6, dtype=complex)
        with self.assertRaises(NumericalBlowup):
            step_trajectory(field, 0.01, trajectory_rng(0, 0), params, mf, tolerances=Tolerances(blowup_factor=10.0))

        batch = np.zeros((3, 4), dtype=complex)
        batch[2] = 1e6
        rngs = [trajectory_rng(0, index) for index in range(3)]
        with self.assertRaises(NumericalBlowup) as cm:
            step_trajectory(batch, 0.01, rngs, params, mf, tolerances=Tolerances(blowup_factor=10.0))
        self.assertEqual(cm.exception.trajectory, 2)

class EnsembleTests(SimpleTestCase):

    def setUp(self):
        self.params = ModelParams(L=4, J=30.0, U=0.1, Delta=-10.0, n0_target=100.0)
        self.mf = solve_mean_field(self.params)

    def test_same_seed_same_result(self):
        cfg = TwaConfig(master_seed=7, **SMALL)
        first = simulate_ensemble(self.params, self.mf, cfg)
        second = simulate_ensemble(self.params, self.mf, cfg)
        np.testing.assert_array_equal(first.n_k, second.n_k)
        np.testing.assert_array_equal(first.stderr_k, second.stderr_k)
        self.assertEqual(first.samples_used, 40)

    def test_worker_count_does_not_matter(self):
        cfg = TwaConfig(master_seed=11, batch_size=2, **SMALL)
        serial = simulate_ensemble(self.params, self.mf, cfg, workers=1)
        parallel = simulate_ensemble(self.params, self.mf, cfg, workers=2)
        np.testing.assert_array_equal(serial.n_k, parallel.n_k)

    def test_batch_size_does_not_matter(self):
        whole = simulate_ensemble(self.params, self.mf, TwaConfig(master_seed=11, **SMALL))
        single = simulate_ensemble(self.params, self.mf, TwaConfig(master_seed=11, batch_size=1, **SMALL))
        np.testing.assert_allclose(whole.n_k, single.n_k, rtol=1e-9, atol=1e-9)

    def test_seed_changes_result(self):
        first = simulate_ensemble(self.params, self.mf, TwaConfig(master_seed=1, **SMALL))
        second = simulate_ensemble(self.params, self.mf, TwaConfig(master_seed=2, **SMALL))
        self.assertFalse(np.array_equal(first.n_k, second.n_k))

    def test_non_interacting_chain_is_coherent(self):
        params = ModelParams(L=4, J=30.0, U=0.0, Delta=-10.0, n0_target=100.0)
        mf = solve_mean_field(params)
        cfg = TwaConfig(dt=0.005, burn_in=5.0, sample_interval=1.0, n_samples=4000, n_trajectories=40, block_size=10, master_seed=5)
        result = simulate_ensemble(params, mf, cfg)

        self.assertTrue(np.all(result.stderr_k > 0))
        self.assertTrue(np.all(np.abs(result.n_k) < 3 * result.stderr_k))
        self.assertAlmostEqual(result.condensate_density, 100.0, delta=1.0)

@unittest.skipUnless(settings.BLANDAU_SLOW_TESTS, 'Desk-scale Wigner ensembles')
class WignerFailureTests(SimpleTestCase):

    def window(self, k, L, width=3):
        # Both signs of the momentum, ±width modes around each
        centre = nearest_mode(k, L)
        offsets = np.arange(-width, width + 1)
        return np.unique(np.concatenate([(centre + offsets) % L, (-centre + offsets) % L]))

    def test_spurious_negative_occupations(self):
        params = ModelParams(L=64, J=30.0, U=0.1, Delta=-10.0, n0_target=100.0)
        mf = solve_mean_field(params)
        tables = dispersion_tables(mf, params)
        reference = bogoliubov_steady_state(tables, mf)
        extremal = resonance_contours(tables).extremal
        cfg = TwaConfig(n_samples=100000, n_trajectories=100, master_seed=0)
        result = simulate_ensemble(params, mf, cfg, workers=settings.BLANDAU_WORKERS)

        near_k_max = self.window(extremal.k_max, 64)
        self.assertTrue(np.any(result.n_k[near_k_max] < -3 * result.stderr_k[near_k_max]))

        near_q_min = self.window(extremal.q_min, 64)
        pileup = result.n_k[near_q_min] > reference.n[near_q_min] + 3 * result.stderr_k[near_q_min]
        self.assertTrue(np.any(pileup))

    def test_weak_hopping_control(self):
        params = ModelParams(L=64, J=10.0, U=0.1, Delta=-10.0, n0_target=100.0)
        mf = solve_mean_field(params)
        reference = bogoliubov_steady_state(dispersion_tables(mf, params), mf)
        cfg = TwaConfig(n_samples=100000, n_trajectories=100, master_seed=0)
        result = simulate_ensemble(params, mf, cfg, workers=settings.BLANDAU_WORKERS)

        self.assertFalse(np.any(result.n_k[1:] < -3 * result.stderr_k[1:]))
        deviation = np.mean(np.abs(result.n_k - reference.n)[1:])
        self.assertLess(deviation, 3 * np.mean(result.stderr_k[1:]))
