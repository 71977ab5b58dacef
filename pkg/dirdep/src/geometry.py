"""Points on spheres and chord distances

Cartesian unit vectors are the canonical representation of directional
data; angles are an input convenience only. Linear marginals are stored
as one-column samples so every distance goes through the same code path.
"""

import logging
from typing import Sequence, Union

import numpy as np
from scipy.spatial.distance import pdist, squareform

import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from shared.errors import InputError
from shared.models import AngleVector, DirectionalSample, SampleKind


logger = logging.getLogger(__name__)


AngleLike = Union[AngleVector, Sequence[float], np.ndarray]


def as_angles(angles: AngleLike) -> AngleVector:
    if isinstance(angles, AngleVector):
        return angles
    return AngleVector(np.asarray(angles, dtype=float))


def angles_to_sample(angles: AngleLike) -> DirectionalSample:
    """Embed circular data in R^2: row i = (cos theta_i, sin theta_i)

    Raises:
        InputError: If an angle is not finite
    """
    theta = as_angles(angles).angles
    points = np.column_stack((np.cos(theta), np.sin(theta)))
    return DirectionalSample(points, SampleKind.SPHERE)


def sample_to_angles(sample: DirectionalSample) -> AngleVector:
    """Recover angles in [0, 2*pi) from a sample on the circle

    Raises:
        InputError: If the sample is not circular
    """
    if not sample.is_circular:
        raise InputError(
            f"Angular statistics need circular data, got a {sample.kind.value} "
            f"sample with {sample.ambient_dim} coordinates"
        )
    return AngleVector(np.arctan2(sample.points[:, 1], sample.points[:, 0]))


def degrees_to_angles(values: Union[Sequence[float], np.ndarray]) -> AngleVector:
    """Convert degrees to an AngleVector in radians"""
    return AngleVector(np.deg2rad(np.asarray(values, dtype=float)))


def linear_sample(values: Union[Sequence[float], np.ndarray]) -> DirectionalSample:
    """Wrap real-valued observations as a one-column sample"""
    return DirectionalSample(np.asarray(values, dtype=float).reshape(-1, 1), SampleKind.LINEAR)


def make_sample(points: np.ndarray, kind: SampleKind = SampleKind.SPHERE,
                renormalize: bool = False) -> DirectionalSample:
    """Build a sample from raw coordinates

    Spherical rows that are not unit vectors are rejected unless
    `renormalize` is set, in which case they are scaled to norm 1.

    Raises:
        InputError: On non-finite values, zero rows, or non-unit rows
    """
    arr = np.array(points, dtype=float)
    if kind == SampleKind.SPHERE and renormalize:
        if arr.ndim != 2:
            raise InputError(f"Sample points must form a matrix, got shape {arr.shape}")
        norms = np.linalg.norm(arr, axis=1)
        if np.any(norms == 0.0) or not np.all(np.isfinite(norms)):
            row = int(np.argmax((norms == 0.0) | ~np.isfinite(norms)))
            raise InputError(f"Row {row} cannot be renormalized (norm {norms[row]})")
        logger.debug(f"Renormalizing {arr.shape[0]} rows; max deviation {np.max(np.abs(norms - 1.0)):.3g}")
        arr = arr / norms[:, None]
    return DirectionalSample(arr, kind)


def chord_distance(x: Union[Sequence[float], np.ndarray],
                   y: Union[Sequence[float], np.ndarray]) -> float:
    """Euclidean distance ||x - y|| between two points

    Raises:
        InputError: If the points have different dimensions
    """
    xa = np.asarray(x, dtype=float).ravel()
    ya = np.asarray(y, dtype=float).ravel()
    if xa.shape != ya.shape:
        raise InputError(f"Dimension mismatch: {xa.shape[0]} vs {ya.shape[0]}")
    return float(np.linalg.norm(xa - ya))


def pairwise_distances(sample: DirectionalSample) -> np.ndarray:
    """n x n matrix of chord distances between the rows of `sample`"""
    if sample.n == 1:
        return np.zeros((1, 1))
    return squareform(pdist(sample.points, metric='euclidean'))
