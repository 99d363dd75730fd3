# --------------------------------------------------- #
# This file contains the decorator that turns a       #
# function returning a table into one that also       #
# writes the table as a headed CSV artifact. Reduces  #
# the repetition in the subcommands.                  #
# --------------------------------------------------- #

from functools import wraps

import pandas as pd

def artifact_writer(name:str):
    '''
    A decorator used for functions producing an output table

    ## Description
    The decorated function returns a `pandas.DataFrame`. The decorator writes it
    as `<name>.csv` through the `writer` that is passed as a keyword argument and
    returns the table unchanged. Extra header entries can be given with the
    `header` keyword argument.

    ## Parameters
    - `name` (str): The file name of the artifact, without the extension

    ## Returns
    - `function`: A new function with the modifications needed

    ## Raises
    - `ValueError`: Occurs when the function does not return a DataFrame
    - `KeyError`: If no `writer` is passed as a keyword argument
    '''
    def decorator(function):
        @wraps(function)
        def inner(*args, **kwargs):
            # The writer is passed by name so that it never shifts the
            # positional arguments of the wrapped function
            if 'writer' not in kwargs:
                raise KeyError(f"No writer was passed to '{function.__name__}'. Are you sure that the writer is passed as a named argument?")
            writer = kwargs.pop('writer')
            header = kwargs.pop('header', None)

            frame = function(*args, **kwargs)
            if not isinstance(frame, pd.DataFrame):
                raise ValueError(f"Function '{function.__name__}' must return a DataFrame.")

            writer.table(name, frame, header)
            return frame

        return inner

    return decorator
