"""Embedded real-data examples

Two small paired circular datasets ship with the package, both stored in
degrees exactly as published:

- bloodpressure: estimated peak times of diastolic blood pressure for 10
  students, two successive measurements (theta, phi).
- wind: wind directions at 6 a.m. and 12 noon on 21 consecutive days.

The rock-magnetism example (52 specimens, remanence directions at two
temperatures) has no published values to embed. Users supply it as a
spherical csv instead; see ROCK_SCHEMA.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Tuple

import pandas as pd

import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from shared.errors import InputError
from shared.models import PairedSample

from . import geometry


logger = logging.getLogger(__name__)


ROCK_SCHEMA = """\
The rock-magnetism data are not embedded. Supply them as a csv with one
header row and six columns, two unit vectors per specimen:

    x1,y1,z1,x2,y2,z2
    0.123,-0.456,0.881,0.130,-0.449,0.884
    ...

and run, for example:

    dirdep test rock.csv --x-cols x1,y1,z1 --y-cols x2,y2,z2 \\
        --x-type sphere --y-type sphere --stat dcor:energy:1 -B 5000

Rows that are not unit vectors within 1e-9 are rejected; pass
--renormalize to scale them to norm 1 instead."""


@dataclass(frozen=True)
class EmbeddedDataset:
    """A paired circular dataset stored in degrees"""
    name: str
    description: str
    columns: Tuple[str, str]
    first: Tuple[float, ...]
    second: Tuple[float, ...]

    @property
    def n(self) -> int:
        return len(self.first)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({self.columns[0]: self.first, self.columns[1]: self.second})

    def to_paired_sample(self) -> PairedSample:
        return PairedSample(
            geometry.angles_to_sample(geometry.degrees_to_angles(self.first)),
            geometry.angles_to_sample(geometry.degrees_to_angles(self.second))
        )


BLOODPRESSURE = EmbeddedDataset(
    name="bloodpressure",
    description="Peak times of diastolic blood pressure, two successive measurements (10 pairs, degrees)",
    columns=("theta", "phi"),
    first=(30, 15, 11, 4, 348, 347, 341, 333, 332, 285),
    second=(25, 5, 349, 358, 340, 347, 345, 331, 329, 287),
)

WIND = EmbeddedDataset(
    name="wind",
    description="Wind direction at 6 a.m. and 12 noon on 21 consecutive days (21 pairs, degrees)",
    columns=("am6", "pm12"),
    first=(356, 97.2, 211, 232, 343, 292, 157, 302, 335, 302, 324,
           84.6, 324, 340, 157, 238, 254, 146, 232, 122, 329),
    second=(119, 162, 221, 259, 270, 28.8, 97.2, 292, 39.6, 313, 94.2,
            45, 47, 108, 221, 270, 119, 248, 270, 45, 23.4),
)

_DATASETS: Dict[str, EmbeddedDataset] = {d.name: d for d in (BLOODPRESSURE, WIND)}


def list_datasets() -> List[EmbeddedDataset]:
    return list(_DATASETS.values())


def get_dataset(name: str) -> EmbeddedDataset:
    """Look up an embedded dataset by name

    Raises:
        InputError: For unknown names; for `rock` the message explains the csv schema
    """
    key = name.strip().lower()
    if key == "rock":
        raise InputError(ROCK_SCHEMA)
    if key not in _DATASETS:
        raise InputError(
            f"Unknown dataset '{name}'. Available datasets: {', '.join(_DATASETS)}"
        )
    return _DATASETS[key]


def export_dataset(name: str, path: str) -> Path:
    """Write an embedded dataset as csv (degrees, one header row)"""
    dataset = get_dataset(name)
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    dataset.to_frame().to_csv(out, index=False, lineterminator="\n")
    logger.info(f"Exported dataset '{dataset.name}' ({dataset.n} rows) to {out}")
    return out
