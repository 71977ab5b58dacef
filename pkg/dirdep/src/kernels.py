"""Strongly negative definite kernels and Gram matrices

All kernels are scalar functions of the Euclidean distance, so the Gram
builder only needs the distance matrix. Gram matrices are computed once
per sample and reused across permutations.
"""

import logging
from typing import Union

import numpy as np
from scipy.spatial.distance import cdist

import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from shared.errors import ConfigurationError, InputError
from shared.models import DirectionalSample, GramMatrix, Kernel, KernelType

from .geometry import pairwise_distances


logger = logging.getLogger(__name__)


DEFAULT_KERNEL = Kernel(KernelType.ENERGY, 1.0)


def parse_kernel(spec: str) -> Kernel:
    """Parse `energy:<a>` | `energy` | `ratio` | `log`

    Raises:
        ConfigurationError: If the spec is unknown or a is outside (0, 2)
    """
    if not isinstance(spec, str) or not spec.strip():
        raise ConfigurationError(f"Kernel spec must be a non-empty string, got {spec!r}")

    name, _, arg = spec.strip().partition(':')
    name = name.strip().lower()

    if name == KernelType.ENERGY.value:
        if not arg:
            return DEFAULT_KERNEL
        try:
            a = float(arg)
        except ValueError:
            raise ConfigurationError(f"Invalid energy exponent in kernel spec '{spec}'")
        return Kernel(KernelType.ENERGY, a)

    if name in (KernelType.RATIO.value, KernelType.LOG.value):
        if arg:
            raise ConfigurationError(f"Kernel '{name}' takes no parameter, got '{spec}'")
        return Kernel(KernelType(name), None)

    raise ConfigurationError(
        f"Unknown kernel spec '{spec}'. Valid kernels: energy:<a>, ratio, log"
    )


def kernel_eval(kernel: Kernel, dist: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """Evaluate the kernel on distances (scalar or array)

    Raises:
        InputError: If a distance is negative
    """
    d = np.asarray(dist, dtype=float)
    if np.any(d < 0.0):
        raise InputError("Distances must be nonnegative")

    if kernel.variant == KernelType.ENERGY:
        out = np.power(d, kernel.a)
    elif kernel.variant == KernelType.RATIO:
        out = d / (1.0 + d)
    elif kernel.variant == KernelType.LOG:
        out = np.log1p(d * d)
    else:
        raise ConfigurationError(f"Unsupported kernel: {kernel.variant}")

    if np.ndim(dist) == 0:
        return float(out)
    return out


def gram(kernel: Kernel, sample: DirectionalSample) -> GramMatrix:
    """Gram matrix values[i][j] = K(s_i, s_j)"""
    values = kernel_eval(kernel, pairwise_distances(sample))
    logger.debug(f"Gram matrix built: n={sample.n}, kernel={kernel.spec}")
    return GramMatrix(np.atleast_2d(values), kernel)


def cross_gram(kernel: Kernel, x: DirectionalSample, y: DirectionalSample) -> np.ndarray:
    """n_x x n_y matrix of K(x_i, y_j)

    Raises:
        InputError: If the samples live in different ambient dimensions
    """
    if x.ambient_dim != y.ambient_dim:
        raise InputError(
            f"Dimension mismatch: samples have {x.ambient_dim} and {y.ambient_dim} coordinates"
        )
    return kernel_eval(kernel, cdist(x.points, y.points, metric='euclidean'))


def centered_gram(g: Union[GramMatrix, np.ndarray]) -> np.ndarray:
    """-H G H / 2 with H the centering matrix

    Positive semidefinite whenever the kernel is of negative type.
    """
    values = g.values if isinstance(g, GramMatrix) else np.asarray(g, dtype=float)
    row = values.mean(axis=1, keepdims=True)
    col = values.mean(axis=0, keepdims=True)
    return -0.5 * (values - row - col + values.mean())
