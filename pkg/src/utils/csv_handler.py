"""CSV and JSON handling utilities."""
import json
from pathlib import Path

import numpy as np
import pandas as pd

FLOAT_FORMAT = '%.17g'


def save_to_csv(data, filename, fieldnames=None):
    """
    Save a table to a CSV file with full float precision.

    Args:
        data: DataFrame, or list of dictionaries
        filename: Output CSV filename
        fieldnames: Column order (optional)
    """
    frame = data if isinstance(data, pd.DataFrame) else pd.DataFrame(list(data))
    if fieldnames is not None:
        frame = frame.reindex(columns=list(fieldnames))
    Path(filename).parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(filename, index=False, float_format=FLOAT_FORMAT)


def read_from_csv(filename):
    """
    Read data from CSV file.

    Args:
        filename: CSV filename to read

    Returns:
        pd.DataFrame: Table with float columns parsed at full precision
    """
    return pd.read_csv(filename, float_precision='round_trip')


def _to_builtin(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def save_json(payload, filename):
    """Write a JSON document with sorted keys; numpy values are converted."""
    Path(filename).parent.mkdir(parents=True, exist_ok=True)
    with open(filename, 'w', encoding='utf-8') as f:
        json.dump(payload, f, indent=2, sort_keys=True, default=_to_builtin)
        f.write('\n')


def read_json(filename):
    with open(filename, 'r', encoding='utf-8') as f:
        return json.load(f)
