# -------------------------------------------------- #
# The `bogoliubov` subcommand: the mean field, the   #
# dispersion and the closed-form second-order        #
# steady state, optionally checked against the long  #
# time limit of its equations of motion.             #
# -------------------------------------------------- #

import logging

import numpy as np
import pandas as pd

from blandau_lib.decorators import artifact_writer
from blandau_lib.enums import Subcommand
from blandau_lib.io import momentum_frame
from blandau_lib.model_core import (
    bogoliubov_steady_state, dispersion_tables, integrate_bogoliubov_odes,
    mean_field_roots, solve_mean_field,
)
from runs.management.base import BlandauCommand

logger = logging.getLogger('blandau')

@artifact_writer('n_k')
def occupation_table(tables, state, integrated=None) -> pd.DataFrame:
    columns = dict(
        eps = tables.eps, omega = tables.omega, u = tables.u, v = tables.v,
        n_k = state.n, c_k = state.c, n_chi = state.n_chi,
    )
    if integrated is not None:
        columns['n_k_ode'] = integrated.n
    return momentum_frame(tables.L, **columns)

class Command(BlandauCommand):
    help = 'Solves the mean field and the Bogoliubov steady state of the chain'
    subcommand = Subcommand.bogoliubov

    def add_command_arguments(self, parser):
        parser.add_argument('--integrate', action='store_true', default=None, help='Also integrate the second-order equations of motion')
        parser.add_argument('--t-end', type=float, help='The integration time of --integrate')

    def run(self, config, writer, options):
        params = config.model
        roots = mean_field_roots(params, config.tolerances)
        mf = solve_mean_field(params, config.tolerances)
        tables = dispersion_tables(mf, params)
        state = bogoliubov_steady_state(tables, mf)

        integrated = None
        summary = {'mean_field': mf, 'roots': [one.n0 for one in roots], 'n_total': float(state.n.sum())}
        if self.option(config, options, 'integrate', False):
            integrated = integrate_bogoliubov_odes(tables, mf, t_end=self.option(config, options, 't_end', 60.0), tolerances=config.tolerances)
            summary['max_relative_difference'] = float(np.max(np.abs(integrated.n - state.n) / state.n))
            logger.info(f"Integrated and closed-form n_k differ by at most {summary['max_relative_difference']:.3e}")

        occupation_table(tables, state, integrated, writer=writer)
        return summary
