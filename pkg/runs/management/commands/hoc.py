# -------------------------------------------------- #
# The `hoc` subcommand: relaxes the hierarchy of     #
# correlations to its steady state and writes the    #
# corrections to the Bogoliubov momentum             #
# distribution, the third-order map and the trace    #
# of the convergence monitor.                        #
# -------------------------------------------------- #

import logging

import numpy as np
import pandas as pd

from blandau_lib.contour import resonance_contours
from blandau_lib.decorators import artifact_writer
from blandau_lib.enums import Subcommand
from blandau_lib.hoc import (
    deviation_from_bogoliubov, detection_map, evolve_to_steady_state, third_order_map,
)
from blandau_lib.io import matrix_frame, momentum_frame
from blandau_lib.model_core import bogoliubov_steady_state, dispersion_tables, solve_mean_field
from blandau_lib.types import HocOptions
from blandau_lib.utils import nearest_mode
from runs.management.base import BlandauCommand

logger = logging.getLogger('blandau')

@artifact_writer('n_k')
def correction_table(state, reference) -> pd.DataFrame:
    dn, relative = deviation_from_bogoliubov(state, reference)
    return momentum_frame(state.L, n_k=state.n, n_bog=reference.n, dn_k=dn, dn_rel=relative, c_k=state.c)

@artifact_writer('third_order')
def third_order_table(magnitude) -> pd.DataFrame:
    return matrix_frame(magnitude)

@artifact_writer('detection')
def detection_table(signal) -> pd.DataFrame:
    return matrix_frame(signal)

@artifact_writer('convergence')
def convergence_table(trace) -> pd.DataFrame:
    columns = {'t': trace.times, 'delta': trace.delta}
    if trace.symmetry_error is not None:
        columns['symmetry_error'] = trace.symmetry_error
    return pd.DataFrame(columns)

def extremal_deviations(relative, extremal, L) -> dict:
    '''The relative correction at the modes nearest to each extremal momentum.'''
    return {
        name: float(relative[nearest_mode(value, L)])
        for name, value in extremal.serialize().items()
    }

class Command(BlandauCommand):
    help = 'Relaxes the hierarchy of correlations to its steady state'
    subcommand = Subcommand.hoc

    def add_command_arguments(self, parser):
        parser.add_argument('--eps-stop', type=float, help='The relative change rate at which the relaxation stops')
        parser.add_argument('--dt-monitor', type=float, help='The spacing of the convergence monitor')
        parser.add_argument('--freeze-third-order', action='store_true', default=None, help='Keep M and R at zero')
        parser.add_argument('--no-back-reaction', action='store_true', default=None, help='Decouple the fluctuations from the condensate')
        parser.add_argument('--include-diagonal-factorizations', action='store_true', default=None, help='Add the diagonal fourth-order factorizations')
        parser.add_argument('--detection', action='store_true', default=None, help='Also write the homodyne detection map')

    def hoc_options(self, config, options) -> HocOptions:
        no_back_reaction = self.option(config, options, 'no_back_reaction', None)
        back_reaction = not no_back_reaction if no_back_reaction is not None else self.option(config, options, 'back_reaction', True)
        return HocOptions(
            freeze_third_order = self.option(config, options, 'freeze_third_order', False),
            back_reaction = back_reaction,
            include_diagonal_factorizations = self.option(config, options, 'include_diagonal_factorizations', False),
            dt_monitor = self.option(config, options, 'dt_monitor', 1.0),
            eps_stop = self.option(config, options, 'eps_stop', 1e-6),
        )

    def run(self, config, writer, options):
        params = config.model
        hoc_options = self.hoc_options(config, options)
        mf = solve_mean_field(params, config.tolerances)
        tables = dispersion_tables(mf, params)
        reference = bogoliubov_steady_state(tables, mf)

        state, trace = evolve_to_steady_state(params, options=hoc_options, tolerances=config.tolerances)
        correction_table(state, reference, writer=writer, header={'hoc': hoc_options})
        convergence_table(trace, writer=writer)

        magnitude, enhancement = third_order_map(state, tables, config.tolerances)
        third_order_table(magnitude, writer=writer)
        if self.option(config, options, 'detection', False):
            detection_table(detection_map(state, mf.Omega), writer=writer)

        _, relative = deviation_from_bogoliubov(state, reference)
        summary = {
            'hoc': hoc_options,
            'steady_state_reached': trace.converged,
            't_final': float(state.t),
            'kappa_fit': trace.kappa_fit,
            'delta_final': float(trace.delta[-1]),
            'psi0': state.psi0,
            'min_n_k': float(state.n.min()),
            'max_abs_relative_correction': float(np.max(np.abs(relative[1:]))),
            'third_order_enhancement': enhancement,
        }

        contour = resonance_contours(tables, tolerances=config.tolerances)
        if contour.extremal is not None:
            summary['extremal'] = contour.extremal
            summary['relative_correction_at_extremal'] = extremal_deviations(relative, contour.extremal, params.L)
        else:
            logger.info("No scattering channel is open, the corrections stay at the background level")
        return summary
