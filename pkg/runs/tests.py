from pathlib import Path
import json, tempfile

import numpy as np
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase, override_settings

from blandau_lib.io import read_csv
from runs.models import RunRecord

MILD = dict(L=4, J=1.0, U=0.1, Delta=-1.0, Un0=1.0)

class CommandTestCase(SimpleTestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.out = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def summary(self, name):
        return json.loads((self.out / f"{name}.json").read_text())

class BogoliubovCommandTests(CommandTestCase):

    def test_closed_form_table(self):
        call_command('bogoliubov', L=16, out=str(self.out), deterministic=True)
        metadata, frame = read_csv(self.out / 'n_k.csv')

        self.assertEqual(len(frame), 15)
        self.assertNotIn(0.0, list(frame['k']))
        np.testing.assert_allclose(frame['n_k'], 50 / (frame['omega'] ** 2 + 0.25), rtol=1e-12)
        self.assertEqual(metadata['subcommand'], 'bogoliubov')
        self.assertNotIn('written_at', metadata)

        summary = self.summary('bogoliubov')
        self.assertAlmostEqual(summary['mean_field']['n0'], 100.0)
        self.assertEqual(len(summary['roots']), 1)

    def test_deterministic_runs(self):
        second = self.out / 'second'
        call_command('bogoliubov', L=16, out=str(self.out), deterministic=True)
        call_command('bogoliubov', L=16, out=str(second), deterministic=True)
        self.assertEqual((self.out / 'n_k.csv').read_bytes(), (second / 'n_k.csv').read_bytes())

    def test_configuration_file(self):
        path = self.out / 'run.toml'
        path.write_text(
            "[run]\nsubcommand = 'bogoliubov'\n"
            f"out = '{self.out}'\n"
            "[model]\nL = 8\nJ = 30.0\nU = 0.1\nDelta = -10.0\nn0_target = 100.0\n"
            "[bogoliubov]\nintegrate = true\nt_end = 60.0\n"
        )
        call_command('bogoliubov', config=str(path))

        _, frame = read_csv(self.out / 'n_k.csv')
        self.assertEqual(len(frame), 7)
        np.testing.assert_allclose(frame['n_k_ode'], frame['n_k'], rtol=1e-6)
        self.assertLess(self.summary('bogoliubov')['max_relative_difference'], 1e-6)

    def test_exit_codes(self):
        with self.assertRaises(CommandError) as cm:
            call_command('bogoliubov', Delta=5.0, out=str(self.out))
        self.assertEqual(cm.exception.returncode, 2)

        with self.assertRaises(CommandError):
            call_command('bogoliubov', '--colour', 'blue', out=str(self.out))

class ObservablesCommandTests(CommandTestCase):

    def test_angles_and_flux(self):
        call_command('observables', out=str(self.out))
        _, angles = read_csv(self.out / 'angles.csv')
        summary = self.summary('observables')

        self.assertEqual(len(angles), 3)
        self.assertTrue(angles['propagating'].all())
        self.assertAlmostEqual(summary['theta_max_deg'], 22.80, places=1)
        self.assertAlmostEqual(summary['flux']['photons_per_second'] / 1.6044e10, 1.0, places=3)

    def test_evanescent_laser(self):
        units = self.out / 'units.toml'
        units.write_text("[units]\nomega_L_eV = 0.5\n")
        with self.assertRaises(CommandError) as cm:
            call_command('observables', units_file=str(units), out=str(self.out))
        self.assertEqual(cm.exception.returncode, 3)

class ModuleCommandTests(CommandTestCase):

    def test_contour(self):
        call_command('contour', L=16, grid_n=64, out=str(self.out))
        _, points = read_csv(self.out / 'contour.csv')
        summary = self.summary('contour')

        self.assertEqual(list(points.columns), ['k', 'q'])
        self.assertEqual(summary['points'], len(points))
        self.assertGreater(summary['points'], 0)
        self.assertIn('extremal', summary)

    def test_hoc(self):
        call_command('hoc', freeze_third_order=True, no_back_reaction=True, out=str(self.out), **MILD)
        _, frame = read_csv(self.out / 'n_k.csv')
        summary = self.summary('hoc')

        self.assertTrue(summary['steady_state_reached'])
        self.assertEqual(len(frame), 3)
        np.testing.assert_allclose(frame['dn_k'], 0.0, atol=1e-8)
        self.assertTrue((self.out / 'convergence.csv').exists())
        self.assertTrue((self.out / 'third_order.csv').exists())

    def test_twa(self):
        call_command(
            'twa', dt=0.005, burn_in=2.0, sample_interval=1.0, samples=40, trajectories=4, block_size=5,
            seed=3, out=str(self.out), **MILD,
        )
        _, frame = read_csv(self.out / 'n_k.csv')
        summary = self.summary('twa')

        self.assertEqual(len(frame), 3)
        self.assertEqual(summary['samples_used'], 40)
        self.assertEqual(summary['twa']['master_seed'], 3)
        self.assertTrue(np.all(frame['stderr_k'] >= 0))

    def test_disorder(self):
        call_command('disorder', L=16, seeds=5, out=str(self.out))
        _, frame = read_csv(self.out / 'disorder_response.csv')
        threshold = self.summary('disorder_threshold')

        self.assertEqual(len(frame), 15)
        np.testing.assert_allclose(frame['dn_direct_first_seed'], frame['dn_direct_first_seed'].abs())
        self.assertEqual(self.summary('disorder')['seeds'], 5)
        self.assertAlmostEqual(threshold['sigma_max_ueV'], 2.9516, places=3)

    def test_unknown_scheme(self):
        with self.assertRaises(CommandError) as cm:
            call_command('hc_compare', L=4, schemes=['HC9'], out=str(self.out))
        self.assertEqual(cm.exception.returncode, 2)

class RunLedgerTests(TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.out = self.tmp.name

    def tearDown(self):
        self.tmp.cleanup()

    def test_disabled_by_default(self):
        call_command('observables', out=self.out)
        self.assertEqual(RunRecord.objects.count(), 0)

    @override_settings(BLANDAU_RECORD_RUNS=True)
    def test_successful_run(self):
        call_command('observables', out=self.out, deterministic=True)

        run = RunRecord.objects.get()
        self.assertEqual(run.exit_code, 0)
        self.assertEqual(run.subcommand, 'observables')
        self.assertTrue(run.deterministic)
        self.assertEqual(sorted(run.artifacts.values_list('kind', flat=True)), ['csv', 'json'])
        self.assertIn('theta_max_deg', json.loads(run.summary))

    @override_settings(BLANDAU_RECORD_RUNS=True)
    def test_failed_run(self):
        with self.assertRaises(CommandError) as cm:
            call_command('hc_compare', L=32, schemes=['HC2'], out=self.out)
        self.assertEqual(cm.exception.returncode, 2)

        run = RunRecord.objects.get()
        self.assertEqual(run.exit_code, 2)
        self.assertEqual(run.subcommand, 'hc_compare')
        self.assertEqual(json.loads(run.summary)['family'], 'ConfigError')
        self.assertEqual(run.artifacts.count(), 0)
