# -------------------------------------------------- #
# The `disorder` subcommand: the response of the     #
# momentum distribution to static on-site disorder,  #
# averaged over seeds, and the disorder strength the #
# scattering peaks survive.                          #
# -------------------------------------------------- #

import logging

import numpy as np
import pandas as pd

from blandau_lib.decorators import artifact_writer
from blandau_lib.disorder import ensemble_response, linear_response, sample_potential, threshold_report
from blandau_lib.enums import Subcommand
from blandau_lib.io import momentum_frame
from blandau_lib.model_core import dispersion_tables, solve_mean_field, to_gamma_units
from runs.management.base import BlandauCommand

logger = logging.getLogger('blandau')

@artifact_writer('disorder_response')
def response_table(L, ensemble, direct) -> pd.DataFrame:
    return momentum_frame(L, dn_mean=ensemble.mean, dn_expected=ensemble.expected, dn_direct_first_seed=direct)

class Command(BlandauCommand):
    help = 'Computes the response of the steady state to static disorder'
    subcommand = Subcommand.disorder

    def add_command_arguments(self, parser):
        parser.add_argument('--sigma', type=float, help='The disorder strength in units of γ')
        parser.add_argument('--seeds', type=int, help='The number of disorder realizations')
        parser.add_argument('--omega-peak-ueV', type=float, help='The frequency of the scattering peak in μeV')
        parser.add_argument('--dn-peak', type=float, help='The height of the scattering peak, e.g. from a hierarchy run')

    def run(self, config, writer, options):
        params = config.model
        mf = solve_mean_field(params, config.tolerances)
        tables = dispersion_tables(mf, params)

        sigma = self.option(config, options, 'sigma', 0.1)
        seeds = range(config.seed, config.seed + self.option(config, options, 'seeds', 100))
        ensemble = ensemble_response(params.L, sigma, seeds, mf, tables, config.workers)

        # The closed form is checked against the direct solve on the first member
        closed, direct = linear_response(sample_potential(params.L, sigma, config.seed), mf, tables, config.tolerances)
        scale = max(float(np.max(np.abs(direct))), 1e-300)
        mismatch = float(np.max(np.abs(closed - direct))) / scale
        if mismatch > 1e-12:
            logger.warning(f"The closed-form response differs from the direct solve by {mismatch:.3g}")
        response_table(params.L, ensemble, direct, writer=writer, header={'sigma': sigma})

        omega_peak = to_gamma_units(self.option(config, options, 'omega_peak_ueV', 660.0), config.units)
        threshold = threshold_report(omega_peak, mf.n0, config.units, self.option(config, options, 'dn_peak'))
        writer.summary('disorder_threshold', threshold)

        return {
            'sigma': sigma,
            'seeds': len(ensemble.seeds),
            'variance_ratio': ensemble.variance_ratio,
            'closed_form_mismatch': mismatch,
            'threshold': threshold,
        }
