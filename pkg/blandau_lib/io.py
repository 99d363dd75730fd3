# -------------------------------------------------- #
# Writing and reading the run artifacts: CSV tables  #
# whose first lines are `#` prefixed metadata and    #
# JSON summaries with sorted keys.                   #
# -------------------------------------------------- #

from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union
import datetime, json, logging

import numpy as np
import pandas as pd

from .exceptions import IoError
from .types import BlandauType
from .utils import code_version, display_order, momentum_grid

logger = logging.getLogger('blandau')

def to_json_value(value:Any) -> Any:
    '''The `json.dumps` default hook for records, numpy values and complex numbers.'''
    if isinstance(value, BlandauType):
        return value.serialize()
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, np.ndarray):
        if np.iscomplexobj(value):
            return np.stack([value.real, value.imag], axis=-1).tolist()
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"An object of the type `{type(value)}` can not be written to JSON")

def metadata_lines(metadata:Dict[str, Any], deterministic:bool = False) -> List[str]:
    '''
    The header lines of a CSV artifact

    ## Description
    Every entry becomes one `# key: value` line with the value as compact JSON.
    The code version is always added and the wall clock time only outside the
    deterministic mode, so that repeated deterministic runs give identical files.
    '''
    header = dict(metadata)
    header['code_version'] = code_version()
    if not deterministic:
        header['written_at'] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    return [
        f"# {key}: {json.dumps(header[key], sort_keys=True, default=to_json_value)}"
        for key in sorted(header)
    ]

def write_csv(path:Union[str, Path], frame:pd.DataFrame, metadata:Dict[str, Any], deterministic:bool = False) -> Path:
    '''
    Writes a table with its metadata header

    ## Raises
    - `IoError`: When the file can not be written
    '''
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', newline='') as handle:
            handle.write('\n'.join(metadata_lines(metadata, deterministic)) + '\n')
            frame.to_csv(handle, index=False, float_format='%.17g')
    except OSError as exc:
        raise IoError(f"The table {path} could not be written: {exc}")
    logger.debug(f"Wrote {len(frame)} rows to {path}")
    return path

def read_csv(path:Union[str, Path]) -> Tuple[Dict[str, Any], pd.DataFrame]:
    '''
    Reads a table written by `write_csv`

    ## Returns
    - `dict`: The metadata of the header
    - `pd.DataFrame`: The table

    ## Raises
    - `IoError`: When the file can not be read
    '''
    metadata = {}
    try:
        with open(path) as handle:
            header = 0
            for line in handle:
                if not line.startswith('# '):
                    break
                key, _, value = line[2:].rstrip('\n').partition(': ')
                metadata[key] = json.loads(value)
                header += 1
        frame = pd.read_csv(path, skiprows=header)
    except (OSError, ValueError) as exc:
        raise IoError(f"The table {path} could not be read: {exc}")
    return metadata, frame

def write_json(path:Union[str, Path], summary:Dict[str, Any]) -> Path:
    '''
    Writes a run summary with sorted keys

    ## Raises
    - `IoError`: When the file can not be written
    '''
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(summary, sort_keys=True, indent=2, default=to_json_value) + '\n')
    except OSError as exc:
        raise IoError(f"The summary {path} could not be written: {exc}")
    return path

def momentum_frame(L:int, post_select:bool = True, **columns) -> pd.DataFrame:
    '''
    A table of per-mode columns in ascending momentum

    ## Description
    With `post_select` the k = 0 row is left out, as the condensate line is
    filtered out of every measured fluctuation spectrum.
    '''
    frame = {'k': display_order(momentum_grid(L))}
    for name, values in columns.items():
        values = np.asarray(values)
        if np.iscomplexobj(values):
            frame[f"{name}_re"] = display_order(values.real)
            frame[f"{name}_im"] = display_order(values.imag)
        else:
            frame[name] = display_order(values)
    frame = pd.DataFrame(frame)
    if post_select:
        frame = frame[frame['k'] != 0].reset_index(drop=True)
    return frame

def matrix_frame(matrix:np.ndarray) -> pd.DataFrame:
    '''A dense (k, q) matrix as a table, both axes in ascending momentum.'''
    L = matrix.shape[0]
    k_grid = display_order(momentum_grid(L))
    return pd.DataFrame(display_order(matrix), index=pd.Index(k_grid, name='k'), columns=[f"{one:.12g}" for one in k_grid]).reset_index()

class ArtifactWriter():
    '''
    Writes the artifacts of one run into its output directory

    ## Description
    All tables of a run share the metadata header, and every written path is
    kept so that the run ledger can record it.

    ## Parameters
    - `out_dir` (Path): The output directory
    - `metadata` (dict): The header entries (parameters, seed, ...)
    - `deterministic` (bool): Leaves the wall clock time out of the headers
    '''

    def __init__(self, out_dir:Union[str, Path], metadata:Dict[str, Any], deterministic:bool = False):
        self.out_dir = Path(out_dir)
        self.metadata = metadata
        self.deterministic = deterministic
        self.written: List[Tuple[Path, str]] = []

    def table(self, name:str, frame:pd.DataFrame, extra:Optional[Dict[str, Any]] = None) -> Path:
        metadata = dict(self.metadata, **(extra or {}))
        path = write_csv(self.out_dir / f"{name}.csv", frame, metadata, self.deterministic)
        self.written.append((path, 'csv'))
        return path

    def summary(self, name:str, summary:Dict[str, Any]) -> Path:
        path = write_json(self.out_dir / f"{name}.json", summary)
        self.written.append((path, 'json'))
        return path
