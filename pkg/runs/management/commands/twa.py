# -------------------------------------------------- #
# The `twa` subcommand: samples the momentum         #
# distribution with the truncated Wigner ensemble    #
# and sets it against the Bogoliubov prediction.     #
# -------------------------------------------------- #

import logging

import numpy as np
import pandas as pd

from blandau_lib.decorators import artifact_writer
from blandau_lib.enums import Subcommand
from blandau_lib.io import momentum_frame
from blandau_lib.model_core import bogoliubov_steady_state, dispersion_tables, solve_mean_field
from blandau_lib.twa import simulate_ensemble, step_bias_check
from blandau_lib.types import TwaConfig
from runs.management.base import BlandauCommand

logger = logging.getLogger('blandau')

# Flag name -> TwaConfig field
CONFIG_FIELDS = {
    'dt': 'dt',
    'burn_in': 'burn_in',
    'sample_interval': 'sample_interval',
    'samples': 'n_samples',
    'trajectories': 'n_trajectories',
    'block_size': 'block_size',
    'batch_size': 'batch_size',
}

@artifact_writer('n_k')
def ensemble_table(L, result, reference) -> pd.DataFrame:
    return momentum_frame(
        L,
        n_k = result.n_k,
        stderr_k = result.stderr_k,
        n_bog = reference.n,
        inflation_k = result.inflation_k,
    )

@artifact_writer('step_bias')
def bias_table(L, check) -> pd.DataFrame:
    return momentum_frame(L, ratio_k=check['ratio_k'])

class Command(BlandauCommand):
    help = 'Samples the momentum distribution with the truncated Wigner ensemble'
    subcommand = Subcommand.twa

    def add_command_arguments(self, parser):
        parser.add_argument('--dt', type=float, help='The integration step in units of 1/γ')
        parser.add_argument('--burn-in', type=float, help='The time discarded before sampling')
        parser.add_argument('--sample-interval', type=float, help='The time between two samples')
        parser.add_argument('--samples', type=int, help='The total number of samples')
        parser.add_argument('--trajectories', type=int, help='The number of trajectories')
        parser.add_argument('--block-size', type=int, help='The samples per block of the error estimate')
        parser.add_argument('--batch-size', type=int, help='The trajectories propagated together')
        parser.add_argument('--bias-check', action='store_true', default=None, help='Also rerun at half the step')

    def twa_config(self, config, options) -> TwaConfig:
        values = {
            field: self.option(config, options, flag)
            for flag, field in CONFIG_FIELDS.items()
        }
        return TwaConfig(master_seed=config.seed, **{key:value for key,value in values.items() if value is not None})

    def run(self, config, writer, options):
        params = config.model
        mf = solve_mean_field(params, config.tolerances)
        reference = bogoliubov_steady_state(dispersion_tables(mf, params), mf)
        cfg = self.twa_config(config, options)

        result = simulate_ensemble(params, mf, cfg, config.workers, config.tolerances)
        ensemble_table(params.L, result, reference, writer=writer, header={'twa': cfg})

        fluctuations = slice(1, None)
        negative = result.n_k[fluctuations] < -3 * result.stderr_k[fluctuations]
        excess = result.n_k[fluctuations] > reference.n[fluctuations] + 3 * result.stderr_k[fluctuations]
        summary = {
            'twa': cfg,
            'samples_used': result.samples_used,
            'condensate_density': result.condensate_density,
            'negative_modes': int(negative.sum()),
            'excess_modes': int(excess.sum()),
            'mean_abs_deviation': float(np.mean(np.abs(result.n_k - reference.n)[fluctuations])),
            'mean_stderr': float(np.mean(result.stderr_k[fluctuations])),
        }

        if self.option(config, options, 'bias_check', False):
            check = step_bias_check(params, mf, cfg, config.workers, config.tolerances)
            bias_table(params.L, check, writer=writer)
            summary['step_bias'] = {'max_ratio': check['max_ratio'], 'passed': check['passed']}
            if not check['passed']:
                logger.warning(f"Halving the step moved some modes by more than one standard error, max {check['max_ratio']:.3g}")
        return summary
