# -------------------------------------------------- #
# The `observables` subcommand: emission angles of   #
# chosen modes and the photon flux collected in a    #
# momentum bin, in laboratory units.                 #
# -------------------------------------------------- #

import numpy as np
import pandas as pd

from blandau_lib.decorators import artifact_writer
from blandau_lib.enums import Subcommand
from blandau_lib.exceptions import Evanescent
from blandau_lib.model_core import gamma_per_second
from blandau_lib.observables import angle_of_mode, flux_in_bin
from runs.management.base import BlandauCommand, comma_list

@artifact_writer('angles')
def angle_table(momenta, units) -> pd.DataFrame:
    rows = []
    for k in momenta:
        try:
            rows.append({'k': k, 'theta_deg': angle_of_mode(k, units), 'propagating': True})
        except Evanescent:
            rows.append({'k': k, 'theta_deg': np.nan, 'propagating': False})
    return pd.DataFrame(rows, columns=['k', 'theta_deg', 'propagating'])

class Command(BlandauCommand):
    help = 'Turns occupations and momenta into emission angles and photon fluxes'
    subcommand = Subcommand.observables
    uses_model = False

    def add_command_arguments(self, parser):
        parser.add_argument('--k', type=comma_list(float), help='Comma separated lattice momenta')
        parser.add_argument('--L', type=int, help='The number of cavities')
        parser.add_argument('--n-k', type=float, help='The occupation of the modes in the bin')
        parser.add_argument('--delta-k-frac', type=float, help='The bin width as a fraction of the Brillouin zone')
        parser.add_argument('--eps-eff', type=float, help='The overall detection efficiency')

    def run(self, config, writer, options):
        units = config.units
        momenta = self.option(config, options, 'k', [0.0, np.pi / 2, np.pi])
        angles = angle_table(momenta, units, writer=writer)

        L = self.option(config, options, 'L', 128)
        n_k = self.option(config, options, 'n_k', 0.1)
        delta_k_frac = self.option(config, options, 'delta_k_frac', 0.025)
        eps_eff = self.option(config, options, 'eps_eff', 1.0)

        return {
            'units': units,
            'gamma_per_second': gamma_per_second(units),
            'theta_max_deg': angle_of_mode(np.pi, units),
            'angles': angles.to_dict(orient='records'),
            'flux': {
                'L': L, 'n_k': n_k, 'delta_k_frac': delta_k_frac, 'eps_eff': eps_eff,
                'photons_per_second': flux_in_bin(n_k, L, delta_k_frac, units, eps_eff),
            },
        }
