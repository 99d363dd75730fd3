import numpy as np
from django.test import SimpleTestCase

from blandau_lib.enums import Branch
from blandau_lib.exceptions import AmbiguousBranch, ConfigError, GaplessOrUnstable, NoRoot
from blandau_lib.model_core import (
    GAMMA, bogoliubov_steady_state, dispersion_tables, integrate_bogoliubov_odes,
    mean_field_roots, solve_mean_field, tables_from_energies, to_gamma_units, to_physical,
)
from blandau_lib.types import ModelParams, PhysicalUnits

def standard_params(L=128, **kwargs):
    return ModelParams(L=L, J=30.0, U=0.1, Delta=-10.0, n0_target=100.0, **kwargs)

class MeanFieldTests(SimpleTestCase):

    def test_target_density(self):
        mf = solve_mean_field(standard_params())
        self.assertAlmostEqual(mf.psi0, 10.0)
        self.assertAlmostEqual(mf.n0, 100.0)
        self.assertAlmostEqual(mf.delta, -70.0)
        self.assertAlmostEqual(mf.Omega, complex(-100.0, 5.0))
        self.assertTrue(mf.branch_stable)

    def test_drive_recovers_density(self):
        params = ModelParams(L=8, J=30.0, U=0.1, delta=-70.0, Omega=complex(-100.0, 5.0))
        roots = mean_field_roots(params)
        self.assertEqual(len(roots), 1)
        self.assertAlmostEqual(roots[0].n0, 100.0, places=8)
        self.assertAlmostEqual(roots[0].Delta, -10.0, places=8)

    def test_bistable_window(self):
        params = ModelParams(L=2, J=0.0, U=1.0, delta=5.0, Omega=np.sqrt(5.0))
        roots = mean_field_roots(params)
        self.assertEqual(len(roots), 3)
        self.assertEqual([one.branch_stable for one in roots], [True, False, True])
        with self.assertRaises(AmbiguousBranch):
            solve_mean_field(params)

        upper = solve_mean_field(ModelParams(L=2, J=0.0, U=1.0, delta=5.0, Omega=np.sqrt(5.0), branch=Branch.upper))
        self.assertAlmostEqual(upper.n0, roots[-1].n0)
        middle = solve_mean_field(ModelParams(L=2, J=0.0, U=1.0, delta=5.0, Omega=np.sqrt(5.0), branch='middle'))
        self.assertFalse(middle.branch_stable)

    def test_vanishing_drive(self):
        with self.assertRaises(NoRoot):
            solve_mean_field(ModelParams(L=2, J=1.0, U=1.0, delta=0.0, Omega=0j))

    def test_invalid_parameters(self):
        with self.assertRaises(ConfigError):
            ModelParams(L=7, J=1.0, U=0.1, Delta=-1.0, n0_target=1.0)
        with self.assertRaises(ConfigError):
            ModelParams(L=8, J=1.0, U=0.1, Delta=-1.0, delta=-1.0, n0_target=1.0)
        with self.assertRaises(ConfigError):
            ModelParams(L=8, J=1.0, U=0.1, Delta=1.0, n0_target=1.0)

class BogoliubovTests(SimpleTestCase):

    def setUp(self):
        self.params = standard_params()
        self.mf = solve_mean_field(self.params)
        self.tables = dispersion_tables(self.mf, self.params)

    def test_transform_normalization(self):
        np.testing.assert_allclose(self.tables.u ** 2 - self.tables.v ** 2, 1.0, rtol=1e-12)

    def test_closed_form(self):
        state = bogoliubov_steady_state(self.tables, self.mf)
        self.assertAlmostEqual(state.n[0], 50.0 / 300.25, places=14)
        self.assertTrue(np.all(state.n > 0))
        np.testing.assert_allclose(state.n, state.n[(-np.arange(128)) % 128], rtol=1e-14)

    def test_equations_of_motion_reach_closed_form(self):
        closed = bogoliubov_steady_state(self.tables, self.mf)
        integrated = integrate_bogoliubov_odes(self.tables, self.mf, t_end=60.0)
        np.testing.assert_allclose(integrated.n, closed.n, rtol=1e-8)
        np.testing.assert_allclose(integrated.c, closed.c, rtol=1e-8)

    def test_positive_detuning_is_gapless(self):
        params = ModelParams(L=4, J=1.0, U=0.1, delta=5.0, n0_target=1.0)
        with self.assertRaises(GaplessOrUnstable):
            dispersion_tables(solve_mean_field(params), params)

    def test_tables_from_energies(self):
        tables = tables_from_energies(30.0, -10.0, 10.0, L=128)
        np.testing.assert_allclose(tables.omega, self.tables.omega, rtol=1e-12)

class UnitTests(SimpleTestCase):

    def test_round_trip(self):
        units = PhysicalUnits()
        for kind in ('energy', 'rate'):
            for value in (0.1, 1.0, 37.5):
                self.assertAlmostEqual(to_gamma_units(to_physical(value, units, kind), units, kind), value, delta=1e-12 * value)

    def test_linewidth(self):
        self.assertAlmostEqual(to_physical(GAMMA, PhysicalUnits()), 33.0)

    def test_inconsistent_lifetime(self):
        with self.assertRaises(ConfigError):
            PhysicalUnits(lifetime_ps=5.0)
        with self.assertRaises(ConfigError):
            to_physical(1.0, PhysicalUnits(), 'length')
