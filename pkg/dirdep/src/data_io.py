"""Delimited-text ingestion of paired samples

Input schema: one header row, then one observation per row. Column roles
are chosen by name (or zero-based position):

    circular-deg / circular-rad   one angle column
    sphere                        d + 1 coordinate columns, unit rows
    linear                        one real-valued column

The delimiter is sniffed (comma, semicolon, tab or whitespace).
"""

import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import List, Sequence, Union

import numpy as np
import pandas as pd

import sys
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from shared.errors import ConfigurationError, InputError
from shared.models import UNIT_NORM_TOL, DirectionalSample, PairedSample, SampleKind

from . import geometry


logger = logging.getLogger(__name__)


class ColumnType(str, Enum):
    CIRCULAR_DEG = "circular-deg"
    CIRCULAR_RAD = "circular-rad"
    SPHERE = "sphere"
    LINEAR = "linear"


@dataclass(frozen=True)
class DataFile:
    """A data file and the roles of its columns

    Attributes:
        path: file location
        x_cols: column names (or positions) of the X component
        y_cols: column names (or positions) of the Y component
        x_type: data type of X
        y_type: data type of Y
        renormalize: scale non-unit sphere rows to norm 1 instead of rejecting them
    """
    path: str
    x_cols: Sequence[str]
    y_cols: Sequence[str]
    x_type: ColumnType = ColumnType.CIRCULAR_DEG
    y_type: ColumnType = ColumnType.CIRCULAR_DEG
    renormalize: bool = False

    def __post_init__(self):
        for name in ('x_type', 'y_type'):
            try:
                object.__setattr__(self, name, ColumnType(getattr(self, name)))
            except ValueError:
                valid = ', '.join(t.value for t in ColumnType)
                raise ConfigurationError(f"--{name.replace('_', '-')} must be one of {valid}")
        object.__setattr__(self, 'x_cols', parse_columns(self.x_cols))
        object.__setattr__(self, 'y_cols', parse_columns(self.y_cols))


def parse_columns(spec: Union[str, Sequence[str]]) -> List[str]:
    """Split a comma-separated column list"""
    items = spec.split(',') if isinstance(spec, str) else list(spec)
    cols = [str(c).strip() for c in items if str(c).strip()]
    if not cols:
        raise ConfigurationError("Column list is empty")
    return cols


def _read_frame(path: str) -> pd.DataFrame:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"Data file not found: {path}")
    try:
        frame = pd.read_csv(p, sep=None, engine='python', skipinitialspace=True)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise InputError(f"Failed to parse data file {path}: {e}")
    frame.columns = [str(c).strip() for c in frame.columns]
    return frame


def _select(frame: pd.DataFrame, cols: Sequence[str], role: str, path: str) -> pd.DataFrame:
    resolved = []
    for c in cols:
        if c in frame.columns:
            resolved.append(c)
        elif c.isdigit() and int(c) < len(frame.columns):
            resolved.append(frame.columns[int(c)])
        else:
            raise ConfigurationError(
                f"--{role}-cols: column '{c}' not found in {path} "
                f"(columns: {', '.join(frame.columns)})"
            )
    return frame[resolved]


def _numeric(block: pd.DataFrame, role: str) -> np.ndarray:
    values = block.apply(pd.to_numeric, errors='coerce')
    bad = values.isna().any(axis=1).to_numpy()
    if bad.any():
        i = int(np.argmax(bad))
        # +2: one header line, one-based line numbers
        raise InputError(
            f"Row {i + 2} ({role}): non-numeric or missing value in {block.iloc[i].tolist()}"
        )
    arr = values.to_numpy(dtype=float)
    if not np.all(np.isfinite(arr)):
        i = int(np.argmax(~np.isfinite(arr).all(axis=1)))
        raise InputError(f"Row {i + 2} ({role}): non-finite value")
    return arr


def to_sample(values: np.ndarray, kind: ColumnType, role: str,
              renormalize: bool = False) -> DirectionalSample:
    """Convert a numeric block into a DirectionalSample of the given type

    Raises:
        ConfigurationError: If the column count does not fit the type
        InputError: On non-unit sphere rows (unless renormalize)
    """
    kind = ColumnType(kind)
    ncols = values.shape[1]

    if kind in (ColumnType.CIRCULAR_DEG, ColumnType.CIRCULAR_RAD, ColumnType.LINEAR):
        if ncols != 1:
            raise ConfigurationError(f"--{role}-type {kind.value} needs exactly one column, got {ncols}")
        col = values[:, 0]
        if kind == ColumnType.LINEAR:
            return geometry.linear_sample(col)
        angles = geometry.degrees_to_angles(col) if kind == ColumnType.CIRCULAR_DEG else geometry.as_angles(col)
        return geometry.angles_to_sample(angles)

    if ncols < 2:
        raise ConfigurationError(f"--{role}-type sphere needs at least two columns, got {ncols}")
    if not renormalize:
        norms = np.linalg.norm(values, axis=1)
        off = np.abs(norms - 1.0) > UNIT_NORM_TOL
        if off.any():
            i = int(np.argmax(off))
            raise InputError(
                f"Row {i + 2} ({role}): not a unit vector (norm {norms[i]:.12g}); "
                f"use --renormalize to rescale"
            )
    return geometry.make_sample(values, SampleKind.SPHERE, renormalize=renormalize)


def read_paired_sample(data: DataFile) -> PairedSample:
    """Read a DataFile into a PairedSample

    Raises:
        InputError: Missing file, parse failures or bad rows (message names the row)
        ConfigurationError: Unknown columns or column counts that do not fit the type
    """
    frame = _read_frame(data.path)
    if len(frame) < 2:
        raise InputError(f"Data file {data.path} needs at least two data rows, got {len(frame)}")

    x = to_sample(_numeric(_select(frame, data.x_cols, 'x', data.path), 'x'),
                  data.x_type, 'x', data.renormalize)
    y = to_sample(_numeric(_select(frame, data.y_cols, 'y', data.path), 'y'),
                  data.y_type, 'y', data.renormalize)
    logger.info(f"Read {x.n} rows from {data.path} ({data.x_type.value} x {data.y_type.value})")
    return PairedSample(x, y)
