# -------------------------------------------------- #
# The `hc_compare` subcommand: compares the hard     #
# cutoff schemes and the factorized cutoff against   #
# the Bogoliubov distribution on a small chain.      #
# -------------------------------------------------- #

import pandas as pd

from blandau_lib.decorators import artifact_writer
from blandau_lib.enums import Scheme, Subcommand
from blandau_lib.exceptions import ConfigError
from blandau_lib.hc import compare_truncations
from runs.management.base import BlandauCommand, comma_list

DEFAULT_SCHEMES = ['FC', 'HC2', 'HC4', 'HC5']
DEFAULT_U = [0.02, 0.1]

@artifact_writer('delta_n')
def summary_table(frame) -> pd.DataFrame:
    return frame

@artifact_writer('hc_curves')
def curves_table(frame) -> pd.DataFrame:
    return frame

def closer_to(summary:pd.DataFrame, target:str, candidate:str, other:str) -> dict:
    '''Per interaction, whether `candidate` is closer to `target` than `other` is.'''
    table = summary.pivot(index='U', columns='scheme', values='delta_n')
    if not {target, candidate, other} <= set(table.columns):
        return {}
    return {
        str(U): bool(abs(row[candidate] - row[target]) < abs(row[other] - row[target]))
        for U, row in table.iterrows()
    }

class Command(BlandauCommand):
    help = 'Compares truncation schemes of the correlation hierarchy on a small chain'
    subcommand = Subcommand.hc_compare
    model_defaults = {'L': 10}

    def add_command_arguments(self, parser):
        parser.add_argument('--U-values', type=comma_list(float), help='Comma separated interactions, Un0 is kept fixed')
        parser.add_argument('--schemes', type=comma_list(str), help='Comma separated schemes among FC, HC2 ... HC6')

    def run(self, config, writer, options):
        names = self.option(config, options, 'schemes', DEFAULT_SCHEMES)
        try:
            schemes = [Scheme(one) for one in names]
        except ValueError as exc:
            raise ConfigError(f"Unknown truncation scheme: {exc}")
        U_values = self.option(config, options, 'U_values', DEFAULT_U)

        summary, curves = compare_truncations(config.model, schemes, U_values, config.tolerances)
        summary_table(summary, writer=writer)
        curves_table(curves, writer=writer)

        return {
            'schemes': [one.value for one in schemes],
            'U_values': [float(one) for one in U_values],
            'delta_n': summary.to_dict(orient='records'),
            'FC_closer_to_HC5_than_HC4': closer_to(summary, 'HC5', 'FC', 'HC4'),
        }
