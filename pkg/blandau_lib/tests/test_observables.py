import numpy as np
from django.test import SimpleTestCase

from blandau_lib.exceptions import ConfigError, Evanescent
from blandau_lib.observables import angle_of_mode, flux_in_bin, laser_angular_frequency
from blandau_lib.types import PhysicalUnits

class AngleTests(SimpleTestCase):

    def test_cone_aperture(self):
        theta = angle_of_mode(np.pi)
        self.assertAlmostEqual(theta, 22.80, places=1)
        self.assertLess(abs(theta - 23.0) / 23.0, 0.05)

    def test_symmetry(self):
        self.assertEqual(angle_of_mode(0.0), 0.0)
        for k in (0.3, 1.2, np.pi):
            self.assertAlmostEqual(angle_of_mode(-k), -angle_of_mode(k))

    def test_evanescent(self):
        with self.assertRaises(Evanescent):
            angle_of_mode(np.pi, PhysicalUnits(omega_L_eV=0.5))

    def test_laser_frequency(self):
        self.assertAlmostEqual(laser_angular_frequency(PhysicalUnits()) / 2.4307e15, 1.0, places=3)

class FluxTests(SimpleTestCase):

    def test_quoted_flux(self):
        flux = flux_in_bin(0.1, 128, 0.025)
        self.assertAlmostEqual(flux / 1.6044e10, 1.0, places=3)
        self.assertLess(abs(flux - 1.5e10) / 1.5e10, 0.1)

    def test_linear(self):
        self.assertEqual(flux_in_bin(0.0, 128, 0.025), 0.0)
        self.assertAlmostEqual(flux_in_bin(0.1, 128, 0.05) / flux_in_bin(0.1, 128, 0.025), 2.0)
        self.assertAlmostEqual(flux_in_bin(0.1, 128, 0.025, eps_eff=0.5) / flux_in_bin(0.1, 128, 0.025), 0.5)

    def test_invalid_bin(self):
        with self.assertRaises(ConfigError):
            flux_in_bin(0.1, 128, 0.0)
        with self.assertRaises(ConfigError):
            flux_in_bin(-0.1, 128, 0.025)
