# -------------------------------------------------- #
# The run configuration: a TOML file with a section  #
# for the model, the run, the tolerances, the units  #
# and one section per subcommand. Complex numbers    #
# are written as <name>_re / <name>_im pairs.        #
# -------------------------------------------------- #

from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, Optional, Union

import toml

from .enums import Subcommand
from .exceptions import ConfigError, IoError
from .types import BlandauType, ModelParams, PhysicalUnits, Tolerances

MODULE_SECTIONS = ('bogoliubov', 'contour', 'twa', 'hoc', 'hc', 'disorder', 'observables')

def encode_complex(section:Dict[str, Any]) -> Dict[str, Any]:
    '''Replaces every complex value by a `_re` / `_im` pair of floats.'''
    encoded = {}
    for key, value in section.items():
        if isinstance(value, complex):
            encoded[f"{key}_re"] = float(value.real)
            encoded[f"{key}_im"] = float(value.imag)
        else:
            encoded[key] = value
    return encoded

def decode_complex(section:Dict[str, Any]) -> Dict[str, Any]:
    '''Joins `_re` / `_im` pairs back into complex values.'''
    decoded = dict(section)
    for key in list(section):
        if key.endswith('_re') and f"{key[:-3]}_im" in section:
            name = key[:-3]
            decoded[name] = complex(decoded.pop(key), decoded.pop(f"{name}_im"))
    return decoded

def _record(cls, section:Dict[str, Any], name:str):
    known = {one.name for one in fields(cls)}
    unknown = set(section) - known
    if unknown:
        raise ConfigError(f"Unknown keys in [{name}]: {', '.join(sorted(unknown))}")
    try:
        return cls(**section)
    except TypeError as exc:
        raise ConfigError(f"Invalid [{name}] section: {exc}")

@dataclass(frozen=True)
class RunConfig(BlandauType):
    '''
    Everything needed to repeat a run

    ## Parameters
    - `subcommand` (Subcommand): The module the run dispatches to
    - `model` (ModelParams): The model parameters, not needed by every subcommand
    - `seed` (int): The master seed
    - `deterministic` (bool): Whether outputs must be bit-for-bit reproducible
    - `out` (str): The output directory
    - `workers` (int): The number of joblib workers
    - `tolerances` (Tolerances): The numerical tolerances
    - `units` (PhysicalUnits): The laboratory scales
    - `options` (dict): The module sections, keyed by section name
    '''

    subcommand: Subcommand
    model: Optional[ModelParams] = None
    seed: int = 0
    deterministic: bool = False
    out: str = 'output'
    workers: int = 1
    tolerances: Tolerances = Tolerances()
    units: PhysicalUnits = PhysicalUnits()
    options: Dict[str, Dict[str, Any]] = field(default_factory=dict)

    def __post_init__(self):
        if not isinstance(self.subcommand, Subcommand):
            try:
                object.__setattr__(self, 'subcommand', Subcommand(self.subcommand))
            except ValueError:
                raise ConfigError(f"Unknown subcommand `{self.subcommand}`")
        if self.seed < 0 or self.workers < 1:
            raise ConfigError("The seed must be non-negative and there must be at least one worker")
        unknown = set(self.options) - set(MODULE_SECTIONS)
        if unknown:
            raise ConfigError(f"Unknown sections: {', '.join(sorted(unknown))}")

    def section(self, name:str) -> Dict[str, Any]:
        '''The options of one module section, empty when absent.'''
        return dict(self.options.get(name, {}))

    def with_overrides(self, **overrides) -> 'RunConfig':
        '''A copy where every override that is not `None` replaces the stored value.'''
        return replace(self, **{key:value for key,value in overrides.items() if value is not None})

    def to_dict(self) -> Dict[str, Any]:
        document = {
            'run': {
                'subcommand': self.subcommand.value,
                'seed': self.seed,
                'deterministic': self.deterministic,
                'out': str(self.out),
                'workers': self.workers,
            },
            'tolerances': self.tolerances.serialize(),
            'units': self.units.serialize(),
        }
        if self.model is not None:
            model = {one.name:getattr(self.model, one.name) for one in fields(self.model) if getattr(self.model, one.name) is not None}
            if 'branch' in model:
                model['branch'] = model['branch'].value
            document['model'] = encode_complex(model)
        for name in sorted(self.options):
            document[name] = encode_complex(self.options[name])
        return document

    def dumps(self) -> str:
        '''The TOML text of the configuration.'''
        return toml.dumps(self.to_dict())

    @classmethod
    def loads(cls, text:str) -> 'RunConfig':
        '''
        Parses the TOML text of a configuration

        ## Raises
        - `ConfigError`: When the text is not valid TOML or a section is invalid
        '''
        try:
            document = toml.loads(text)
        except toml.TomlDecodeError as exc:
            raise ConfigError(f"The configuration is not valid TOML: {exc}")

        run = document.pop('run', {})
        if 'subcommand' not in run:
            raise ConfigError("The [run] section must name the subcommand")
        unknown = set(run) - {'subcommand', 'seed', 'deterministic', 'out', 'workers'}
        if unknown:
            raise ConfigError(f"Unknown keys in [run]: {', '.join(sorted(unknown))}")

        model = document.pop('model', None)
        return cls(
            subcommand = run.pop('subcommand'),
            model = _record(ModelParams, decode_complex(model), 'model') if model is not None else None,
            tolerances = _record(Tolerances, document.pop('tolerances', {}), 'tolerances'),
            units = _record(PhysicalUnits, document.pop('units', {}), 'units'),
            options = {name:decode_complex(section) for name,section in document.items()},
            **run,
        )

    @classmethod
    def load(cls, path:Union[str, Path]) -> 'RunConfig':
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise IoError(f"The configuration {path} could not be read: {exc}")
        return cls.loads(text)

    def dump(self, path:Union[str, Path]) -> None:
        try:
            Path(path).write_text(self.dumps())
        except OSError as exc:
            raise IoError(f"The configuration {path} could not be written: {exc}")

def load_units(path:Union[str, Path]) -> PhysicalUnits:
    '''Reads a units file, i.e. a TOML document with a single [units] section.'''
    try:
        document = toml.loads(Path(path).read_text())
    except OSError as exc:
        raise IoError(f"The units file {path} could not be read: {exc}")
    except toml.TomlDecodeError as exc:
        raise ConfigError(f"The units file is not valid TOML: {exc}")
    return _record(PhysicalUnits, document.get('units', document), 'units')
