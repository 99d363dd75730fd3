# -------------------------------------------------- #
# The base class of every blandau subcommand. It     #
# owns the global flags, turns them together with    #
# the optional configuration file into a RunConfig,  #
# maps the error families onto exit codes and keeps  #
# the run ledger.                                    #
# -------------------------------------------------- #

from dataclasses import fields
from pathlib import Path
from typing import Any, Dict, Optional
import json, logging, time

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from blandau_lib.config import RunConfig, load_units
from blandau_lib.enums import Branch, Subcommand
from blandau_lib.exceptions import BlandauError, ConfigError
from blandau_lib.io import ArtifactWriter, to_json_value
from blandau_lib.types import ModelParams
from blandau_lib.utils import code_version

logger = logging.getLogger('blandau')

# (J, Δ, Un0) = (30, -10, 10)γ at U = 0.1γ on 128 sites
STANDARD_MODEL = {'L': 128, 'J': 30.0, 'U': 0.1, 'Delta': -10.0, 'n0_target': 100.0}

def comma_list(cast):
    '''An argparse type for comma separated values.'''
    return lambda text: [cast(one) for one in text.split(',') if one.strip()]

class BlandauCommand(BaseCommand):
    '''
    A subcommand of the blandau command line

    ## Description
    Subclasses set `subcommand`, add their own flags in `add_command_arguments`
    and do their work in `run`, which receives the merged configuration and the
    artifact writer and returns the JSON summary. Any `BlandauError` is logged
    and turned into a `CommandError` carrying the exit code of its family.
    '''

    subcommand: Subcommand = None
    uses_model = True
    model_defaults: Dict[str, Any] = {}

    def add_arguments(self, parser):
        parser.add_argument('--seed', type=int, help='The master seed of the run')
        parser.add_argument('--deterministic', action='store_true', default=None, help='Bit-for-bit reproducible outputs')
        parser.add_argument('--out', type=str, help='The output directory')
        parser.add_argument('--units-file', type=str, help='A TOML file with a [units] section')
        parser.add_argument('--config', type=str, help='A TOML run configuration')
        parser.add_argument('--workers', type=int, help='The number of parallel workers')

        if self.uses_model:
            parser.add_argument('--L', type=int, help='The number of cavities')
            parser.add_argument('--J', type=float, help='The hopping in units of γ')
            parser.add_argument('--U', type=float, help='The on-site interaction in units of γ')
            parser.add_argument('--Delta', type=float, help='The renormalized detuning')
            parser.add_argument('--delta', type=float, help='The bare detuning')
            parser.add_argument('--Un0', type=float, help='The mean-field energy U n0')
            parser.add_argument('--n0', type=float, help='The mean-field density')
            parser.add_argument('--Omega-re', type=float, help='The real part of the drive')
            parser.add_argument('--Omega-im', type=float, default=0.0, help='The imaginary part of the drive')
            parser.add_argument('--branch', type=str, choices=[one.value for one in Branch], help='The bistability branch')

        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def run(self, config:RunConfig, writer:ArtifactWriter, options:Dict[str, Any]) -> Dict[str, Any]:
        raise NotImplementedError

    # ------------------------------------------------------
    # Configuration
    # ------------------------------------------------------

    def model_from_options(self, base:Optional[ModelParams], options:Dict[str, Any]) -> ModelParams:
        '''
        Merges the model flags into the model of the configuration file

        ## Description
        Without a configuration the standard parameters, updated with the
        `model_defaults` of the subcommand, are the starting point.
        A flag for one detuning or for the drive replaces its alternative, and
        `--Un0` fixes the density through n0 = Un0/U.
        '''
        if base is None:
            model = dict(STANDARD_MODEL, **self.model_defaults)
        else:
            model = {one.name:getattr(base, one.name) for one in fields(base) if getattr(base, one.name) is not None}

        for key in ('L', 'J', 'U'):
            if options.get(key) is not None:
                model[key] = options[key]
        if options.get('Delta') is not None:
            model.pop('delta', None)
            model['Delta'] = options['Delta']
        if options.get('delta') is not None:
            model.pop('Delta', None)
            model['delta'] = options['delta']
        if options.get('n0') is not None:
            model.pop('Omega', None)
            model['n0_target'] = options['n0']
        if options.get('Un0') is not None:
            if not model['U'] > 0:
                raise ConfigError("--Un0 needs a positive interaction U")
            model.pop('Omega', None)
            model['n0_target'] = options['Un0'] / model['U']
        if options.get('Omega_re') is not None:
            model.pop('n0_target', None)
            model['Omega'] = complex(options['Omega_re'], options.get('Omega_im') or 0.0)
        if options.get('branch') is not None:
            model['branch'] = Branch(options['branch'])

        return ModelParams(**model)

    def build_config(self, options:Dict[str, Any]) -> RunConfig:
        if options.get('config'):
            config = RunConfig.load(options['config'])
            if config.subcommand is not self.subcommand:
                logger.warning(f"The configuration was written for `{config.subcommand.value}`, running `{self.subcommand.value}`")
                config = config.with_overrides(subcommand=self.subcommand)
        else:
            config = RunConfig(subcommand=self.subcommand, out=str(settings.BLANDAU_OUTPUT_DIR), workers=settings.BLANDAU_WORKERS)

        config = config.with_overrides(
            seed = options.get('seed'),
            deterministic = options.get('deterministic'),
            out = options.get('out'),
            workers = options.get('workers'),
        )
        if options.get('units_file'):
            config = config.with_overrides(units=load_units(options['units_file']))
        if self.uses_model:
            config = config.with_overrides(model=self.model_from_options(config.model, options))
        if config.deterministic and config.workers != 1:
            logger.info("Deterministic mode runs with a single worker")
            config = config.with_overrides(workers=1)
        return config

    # ------------------------------------------------------
    # Execution
    # ------------------------------------------------------

    def handle(self, *args, **options):
        started = time.perf_counter()
        config = None
        writer = None
        try:
            config = self.build_config(options)
            metadata = {
                'subcommand': config.subcommand.value,
                'seed': config.seed,
                'model': config.model,
                'options': config.section(self.section_name),
            }
            writer = ArtifactWriter(Path(config.out), metadata, config.deterministic)

            logger.info(f"Running `{self.subcommand.value}` into {config.out}")
            summary = self.run(config, writer, options)
            summary['wall_time'] = time.perf_counter() - started
            summary['code_version'] = code_version()
            writer.summary(self.subcommand.value, summary)

        except BlandauError as exc:
            logger.critical(f"`{self.subcommand.value}` failed: {exc}")
            self.record(config, writer, exc.exit_code, {'error': str(exc), 'family': type(exc).__name__}, time.perf_counter() - started)
            raise CommandError(str(exc), returncode=exc.exit_code)
        except Exception:
            logger.exception(f"`{self.subcommand.value}` failed with an unexpected error")
            raise

        self.record(config, writer, 0, summary, summary['wall_time'])
        logger.info(f"`{self.subcommand.value}` finished in {summary['wall_time']:.2f} s")

    def option(self, config:RunConfig, options:Dict[str, Any], key:str, default:Any = None) -> Any:
        '''A flag value, else the value of the module section, else the default.'''
        if options.get(key) is not None:
            return options[key]
        return config.section(self.section_name).get(key, default)

    @property
    def section_name(self) -> str:
        return 'hc' if self.subcommand is Subcommand.hc_compare else self.subcommand.value

    def record(self, config:Optional[RunConfig], writer:Optional[ArtifactWriter], exit_code:int, summary:Dict[str, Any], wall_time:float) -> None:
        '''Stores the run and its artifacts when the run ledger is enabled.'''
        if not settings.BLANDAU_RECORD_RUNS or config is None:
            return

        from runs.models import RunArtifact, RunRecord

        run = RunRecord.objects.create(
            subcommand = self.subcommand.value,
            config = config.dumps(),
            seed = config.seed,
            deterministic = config.deterministic,
            exit_code = exit_code,
            summary = json.dumps(summary, sort_keys=True, default=to_json_value),
            code_version = code_version(),
            wall_time = wall_time,
        )
        for path, kind in (writer.written if writer else []):
            RunArtifact.objects.create(run=run, path=str(path), kind=kind)
        logger.debug(f"Recorded run {run.id} with {run.artifacts.count()} artifacts")
