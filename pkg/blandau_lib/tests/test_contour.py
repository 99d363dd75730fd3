import numpy as np
from django.test import SimpleTestCase

from blandau_lib.contour import (
    extremal_momenta, max_mismatch, mirror_points, mismatch, resonance_contours, sweep_detuning,
)
from blandau_lib.model_core import tables_from_energies
from blandau_lib.types import Tolerances

class ResonanceContourTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.tables = tables_from_energies(30.0, -10.0, 10.0)
        cls.contour = resonance_contours(cls.tables, 256)

    def test_points_on_zero_set(self):
        self.assertFalse(self.contour.empty)
        points = self.contour.points
        residual = np.abs(mismatch(self.tables, points[:, 0], points[:, 1]))
        self.assertLess(residual.max(), Tolerances().contour)
        self.assertTrue(np.all((points > 0) & (points <= np.pi)))

    def test_extremal_momenta(self):
        extremal = self.contour.extremal
        self.assertIsNotNone(extremal)
        for value in extremal.serialize().values():
            self.assertGreater(value, 0.0)
            self.assertLessEqual(value, np.pi)
        self.assertLessEqual(extremal.q_min, extremal.k_max)
        self.assertLessEqual(extremal.k_min, extremal.k_max)
        self.assertLessEqual(extremal.q_min, extremal.q_max)

    def test_extremal_momenta_resolution_independent(self):
        coarse = extremal_momenta(self.tables, 256)
        fine = extremal_momenta(self.tables, 512)
        for name, value in coarse.serialize().items():
            self.assertAlmostEqual(value, getattr(fine, name), delta=1e-5)

    def test_decay_is_open_inside(self):
        # A quasiparticle at π/2 can split into two at π/4
        self.assertGreater(mismatch(self.tables, np.pi / 2, np.pi / 4), 0)
        self.assertLess(mismatch(self.tables, np.pi, 0.5), 0)

    def test_flat_band_has_no_channel(self):
        contour = resonance_contours(tables_from_energies(0.0, -10.0, 10.0), 64)
        self.assertTrue(contour.empty)
        self.assertIsNone(contour.extremal)
        self.assertLess(max_mismatch(tables_from_energies(0.0, -10.0, 10.0), 32), 0)

    def test_mirror(self):
        mirrored = mirror_points(self.contour)
        self.assertEqual(len(mirrored), 2 * len(self.contour.points))
        np.testing.assert_allclose(mirrored[len(self.contour.points):], -self.contour.points[::-1])

class SweepTests(SimpleTestCase):

    def test_channels_close(self):
        rows, Delta0 = sweep_detuning(30.0, 10.0, (-200.0, -10.0), 3, grid_n=64)
        self.assertEqual([row['Delta'] for row in rows], [-200.0, -105.0, -10.0])
        self.assertEqual(rows[0]['points'], 0)
        self.assertIsNone(rows[0]['k_max'])
        self.assertGreater(rows[-1]['points'], 0)

        self.assertIsNotNone(Delta0)
        self.assertTrue(-200.0 < Delta0 < -10.0)
        self.assertLess(abs(max_mismatch(tables_from_energies(30.0, Delta0, 10.0))), 0.05)

    def test_no_boundary(self):
        _, Delta0 = sweep_detuning(30.0, 10.0, (-20.0, -10.0), 2, grid_n=32)
        self.assertIsNone(Delta0)

    def test_contour_shrinks_towards_boundary(self):
        rows, Delta0 = sweep_detuning(30.0, 10.0, (-200.0, -10.0), 12, grid_n=64)
        points = np.array([row['points'] for row in rows])
        Deltas = np.array([row['Delta'] for row in rows])

        # Rows are ordered by Δ, so counts may only grow away from Δ0
        self.assertTrue(np.all(np.diff(points) >= 0))
        self.assertTrue(np.all(points[Deltas < Delta0] == 0))
