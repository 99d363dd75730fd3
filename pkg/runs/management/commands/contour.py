# -------------------------------------------------- #
# The `contour` subcommand: the resonance contour of #
# the scattering processes, its extremal momenta and #
# optionally a sweep of the renormalized detuning.   #
# -------------------------------------------------- #

import pandas as pd

from blandau_lib.contour import mirror_points, resonance_contours, sweep_detuning
from blandau_lib.decorators import artifact_writer
from blandau_lib.enums import Subcommand
from blandau_lib.model_core import dispersion_tables, solve_mean_field
from runs.management.base import BlandauCommand

@artifact_writer('contour')
def contour_table(points) -> pd.DataFrame:
    return pd.DataFrame(points, columns=['k', 'q'])

@artifact_writer('sweep')
def sweep_table(rows) -> pd.DataFrame:
    return pd.DataFrame(rows, columns=['Delta', 'points', 'q_min', 'k_min', 'q_max', 'k_max'])

class Command(BlandauCommand):
    help = 'Traces the resonance contour and its extremal momenta'
    subcommand = Subcommand.contour

    def add_command_arguments(self, parser):
        parser.add_argument('--grid-n', type=int, help='The grid resolution of the contour search')
        parser.add_argument('--mirror', action='store_true', default=None, help='Also export the negative momentum branch')
        parser.add_argument('--sweep-from', type=float, help='The lowest detuning of a sweep')
        parser.add_argument('--sweep-to', type=float, help='The highest detuning of a sweep')
        parser.add_argument('--sweep-steps', type=int, help='The number of detunings of a sweep')

    def run(self, config, writer, options):
        params = config.model
        mf = solve_mean_field(params, config.tolerances)
        tables = dispersion_tables(mf, params)
        grid_n = self.option(config, options, 'grid_n', 256)

        contour = resonance_contours(tables, grid_n, config.tolerances)
        points = mirror_points(contour) if self.option(config, options, 'mirror', False) else contour.points
        contour_table(points, writer=writer)

        summary = {
            'points': len(contour.points),
            'extremal': contour.extremal,
            'J': tables.J, 'Delta': tables.Delta, 'Un0': tables.Un0,
        }

        low = self.option(config, options, 'sweep_from')
        high = self.option(config, options, 'sweep_to')
        if low is not None and high is not None:
            rows, Delta0 = sweep_detuning(tables.J, tables.Un0, (low, high), self.option(config, options, 'sweep_steps', 20), grid_n, config.tolerances)
            sweep_table(rows, writer=writer, header={'Delta0': Delta0})
            summary['Delta0'] = Delta0
        return summary
