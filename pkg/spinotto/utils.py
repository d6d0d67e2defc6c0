"""
Utility functions
"""
import functools
import hashlib
import logging
import os
import platform
import sys
from collections.abc import Collection
from typing import Any, Mapping, Optional, Union

import numpy as np
import ujson as json

from spinotto import _SIG_FIGS


@functools.lru_cache(maxsize=None)
def get_logger() -> logging.Logger:
    """spinotto logger"""
    logger = logging.getLogger('spinotto')
    if len(logger.handlers) == 0:
        logging.basicConfig(level=logging.INFO)
    return logger


def validate_dir(output_dir: str) -> None:
    """Check that specified output directory exists, can write."""
    if not os.path.exists(output_dir):
        try:
            os.makedirs(output_dir)
        except (IOError, OSError, PermissionError) as e:
            raise OSError(
                'Cannot create directory: {}'.format(output_dir)
            ) from e
    elif not os.path.isdir(output_dir):
        raise OSError(
            'File exists, should be a directory: {}'.format(output_dir)
        )


def validate_output_path(path: str) -> str:
    """
    Expand and normalize an output file path, creating the parent
    directory if needed.  Returns the real path.
    """
    path = os.path.realpath(os.path.expanduser(path))
    parent = os.path.dirname(path)
    if parent:
        validate_dir(parent)
    if os.path.isdir(path):
        raise OSError('Output path is a directory: {}'.format(path))
    return path


def round_sig(value: Optional[float], sig_figs: int = _SIG_FIGS) -> Any:
    """
    Round a float to the given number of significant digits.
    ``None`` and non-float values pass through unchanged.
    """
    if value is None or isinstance(value, (bool, int, np.bool_)):
        return value
    value = float(value)
    if not np.isfinite(value):
        return value
    return float('{:.{}g}'.format(value, sig_figs))


def to_jsonable(data: Any) -> Any:
    """
    Recursively convert numpy scalars and arrays, tuples and
    mappings into plain Python values that ujson can serialize.
    Floats are rounded to the package's output precision.
    """
    if data is None or isinstance(data, (str, bool)):
        return data
    if isinstance(data, np.bool_):
        return bool(data)
    if isinstance(data, (int, np.integer)):
        return int(data)
    if isinstance(data, (float, np.floating)):
        return round_sig(data)
    if isinstance(data, np.ndarray):
        return [to_jsonable(x) for x in data.tolist()]
    if isinstance(data, Mapping):
        return {str(k): to_jsonable(v) for k, v in data.items()}
    if isinstance(data, Collection):
        return [to_jsonable(x) for x in data]
    raise TypeError(
        "Invalid type '{}' cannot be written as JSON".format(type(data))
    )


def write_json(path: str, data: Mapping[str, Any]) -> None:
    """
    Dump a mapping of strings to data to a JSON file.

    Values can be any numeric type, a boolean, ``None``, a string,
    or any (nested) collection of those, e.g. a :class:`numpy.ndarray`.

    :param path: File path for the created json. Will be overwritten if
        already in existence.

    :param data: A mapping from strings to values.
    """
    out = to_jsonable(data)
    try:
        with open(path, 'w') as fd:
            json.dump(out, fd, indent=2, sort_keys=True)
            fd.write('\n')
    except (IOError, OSError) as e:
        raise OSError('Cannot write JSON file: {}'.format(path)) from e


def read_json(path: str) -> Any:
    """Load a JSON document, reporting the path on failure."""
    if not os.path.exists(path):
        raise OSError('no such file {}'.format(path))
    try:
        with open(path, 'r') as fd:
            return json.load(fd)
    except ValueError as e:
        raise ValueError(
            'Cannot parse JSON file {}: {}'.format(path, str(e))
        ) from e


def array_digest(*arrays: Union[np.ndarray, Collection]) -> str:
    """Short, platform-independent digest of numeric arrays."""
    sha = hashlib.sha256()
    for arr in arrays:
        values = np.ascontiguousarray(np.asarray(arr, dtype='<f8'))
        sha.update(values.tobytes())
    return sha.hexdigest()[:16]


def show_versions(output: bool = True) -> str:
    """Prints out system and dependency information for debugging"""

    import importlib
    import struct

    deps_info = []
    try:
        (sysname, _, release, _, machine, _) = platform.uname()
        deps_info.extend(
            [
                ("python", sys.version),
                ("python-bits", struct.calcsize("P") * 8),
                ("OS", f"{sysname}"),
                ("OS-release", f"{release}"),
                ("machine", f"{machine}"),
                ("byteorder", f"{sys.byteorder}"),
            ]
        )
    # pylint: disable=broad-except
    except Exception:
        pass

    deps = ['spinotto', 'numpy', 'scipy', 'pandas', 'ujson', 'xarray', 'tqdm']
    for module in deps:
        try:
            if module in sys.modules:
                mod = sys.modules[module]
            else:
                mod = importlib.import_module(module)
        # pylint: disable=broad-except
        except Exception:
            deps_info.append((module, None))
        else:
            try:
                ver = mod.__version__  # type: ignore
                deps_info.append((module, ver))
            # pylint: disable=broad-except
            except Exception:
                deps_info.append((module, "installed"))

    out = 'INSTALLED VERSIONS\n---------------------\n'
    for k, info in deps_info:
        out += f'{k}: {info}\n'
    if output:
        print(out)
        return " "
    else:
        return out
