"""Distance covariance, distance correlation and competitor statistics

The empirical distance covariance is the V-statistic

    V(A, B) = 1/n^2 sum_ij A_ij B_ij + 1/n^4 (sum_ij A_ij)(sum_ij B_ij)
              - 2/n^3 sum_ijk A_ij B_ik

evaluated in O(n^2) through row sums r_i = sum_j A_ij, s_i = sum_j B_ij,
since sum_ijk A_ij B_ik = sum_i r_i s_i. Diagonal terms are kept (no
U-statistic correction). The population quantity it estimates is

    dCov_K(X, Y) = E K(X,X')K(Y,Y') + E K(X,X') E K(Y,Y') - 2 E K(X,X')K(Y,Y'')

with dCor_K its self-normalized version; it vanishes iff X and Y are
independent when K is strongly negative definite.
"""

import logging
from typing import Optional, Union

import numpy as np

import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from shared.errors import ConfigurationError, DegenerateMarginalError, InputError
from shared.models import (
    AngleVector,
    DirectionalSample,
    GramMatrix,
    Kernel,
    StatisticName,
    StatisticSpec,
)

from .geometry import AngleLike, as_angles
from .kernels import DEFAULT_KERNEL, cross_gram, gram, parse_kernel


logger = logging.getLogger(__name__)


# Marginal self-covariances at or below this are treated as degenerate
DEGENERATE_EPS = 1e-14

MatrixLike = Union[GramMatrix, np.ndarray]


def _values(m: MatrixLike) -> np.ndarray:
    return m.values if isinstance(m, GramMatrix) else np.asarray(m, dtype=float)


def _check_pair(a: np.ndarray, b: np.ndarray) -> int:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InputError(f"Expected a square matrix, got shape {a.shape}")
    if a.shape != b.shape:
        raise InputError(f"Size mismatch: {a.shape[0]} vs {b.shape[0]}")
    return a.shape[0]


def v_stat_values(a: np.ndarray, b: np.ndarray) -> float:
    """O(n^2) V-statistic on raw matrices (no validation)"""
    n = a.shape[0]
    r = a.sum(axis=1)
    s = b.sum(axis=1)
    return float(
        (a * b).sum() / n**2
        + r.sum() * s.sum() / n**4
        - 2.0 * (r @ s) / n**3
    )


def v_stat(a: MatrixLike, b: MatrixLike) -> float:
    """Empirical distance covariance V_{n,X,Y} from two Gram matrices

    Raises:
        InputError: If the matrices differ in size
    """
    av, bv = _values(a), _values(b)
    _check_pair(av, bv)
    return v_stat_values(av, bv)


def v_stat_naive(a: MatrixLike, b: MatrixLike) -> float:
    """Literal O(n^3) transcription of V_{n,X,Y}; test oracle for n <= 50"""
    av, bv = _values(a), _values(b)
    n = _check_pair(av, bv)

    first = 0.0
    sum_a = 0.0
    sum_b = 0.0
    for i in range(n):
        for j in range(n):
            first += av[i, j] * bv[i, j]
            sum_a += av[i, j]
            sum_b += bv[i, j]

    third = 0.0
    for i in range(n):
        for j in range(n):
            for k in range(n):
                third += av[i, j] * bv[i, k]

    return first / n**2 + sum_a * sum_b / n**4 - 2.0 * third / n**3


def dcov_stat(a: MatrixLike, b: MatrixLike) -> float:
    """Alias of v_stat under its statistic identifier"""
    return v_stat(a, b)


def dcor_stat(a: MatrixLike, b: MatrixLike) -> float:
    """Distance correlation V(A,B) / sqrt(V(A,A) V(B,B))

    Raises:
        DegenerateMarginalError: If either marginal self-covariance <= 1e-14
    """
    av, bv = _values(a), _values(b)
    _check_pair(av, bv)
    vxx = v_stat_values(av, av)
    vyy = v_stat_values(bv, bv)
    if vxx <= DEGENERATE_EPS:
        raise DegenerateMarginalError(f"X marginal is degenerate (V(X,X) = {vxx:.3g})")
    if vyy <= DEGENERATE_EPS:
        raise DegenerateMarginalError(f"Y marginal is degenerate (V(Y,Y) = {vyy:.3g})")
    return v_stat_values(av, bv) / np.sqrt(vxx * vyy)


def nk_distance(kernel: Kernel, x: DirectionalSample, y: DirectionalSample) -> float:
    """Plug-in two-sample kernel distance

    N_K = 2 mean K(X_i, Y_j) - mean K(X_i, X_j) - mean K(Y_i, Y_j), with
    within-sample means over all ordered pairs. N_K^(1/2) is a metric on
    distributions for strongly negative definite K.

    Raises:
        InputError: If the samples live in different ambient dimensions
    """
    between = cross_gram(kernel, x, y)
    within_x = gram(kernel, x).values
    within_y = gram(kernel, y).values
    return float(2.0 * between.mean() - within_x.mean() - within_y.mean())


def mean_direction(theta: AngleVector) -> float:
    """atan2 of the mean sine and cosine

    Raises:
        DegenerateMarginalError: If the resultant vanishes
    """
    s = np.sin(theta.angles).sum()
    c = np.cos(theta.angles).sum()
    if np.hypot(s, c) <= 1e-12 * max(1, theta.n):
        raise DegenerateMarginalError("Mean direction undefined: zero resultant length")
    return float(np.arctan2(s, c))


def centered_sines(theta: AngleVector) -> np.ndarray:
    """sin(theta_i - mean direction)"""
    return np.sin(theta.angles - mean_direction(theta))


def circ_cor(theta: AngleLike, phi: AngleLike) -> float:
    """Circular correlation coefficient

    r = sum sin(t_i - t_bar) sin(p_i - p_bar)
        / sqrt(sum sin^2(t_i - t_bar) sum sin^2(p_i - p_bar))

    Raises:
        InputError: On unequal lengths or n < 2
        DegenerateMarginalError: On zero resultant or zero denominator
    """
    t, p = as_angles(theta), as_angles(phi)
    if t.n != p.n:
        raise InputError(f"Length mismatch: {t.n} vs {p.n}")
    if t.n < 2:
        raise InputError("Circular correlation needs at least two observations")

    st = centered_sines(t)
    sp = centered_sines(p)
    denom = np.sqrt((st @ st) * (sp @ sp))
    if denom <= DEGENERATE_EPS:
        raise DegenerateMarginalError("Circular correlation undefined: zero sine spread")
    return float(np.clip((st @ sp) / denom, -1.0, 1.0))


def trig_kernel(diff: np.ndarray, lam: float) -> np.ndarray:
    """J(theta) = cos(lam sin theta) exp(lam (cos theta - 1))"""
    return np.cos(lam * np.sin(diff)) * np.exp(lam * (np.cos(diff) - 1.0))


def trig_matrix(theta: AngleVector, lam: float) -> np.ndarray:
    """n x n matrix J(theta_j - theta_k)"""
    a = theta.angles
    return trig_kernel(a[:, None] - a[None, :], lam)


def _check_lambda(lam: float) -> float:
    lam = float(lam)
    if not np.isfinite(lam) or lam <= 0.0:
        raise ConfigurationError(f"lambda must be positive, got {lam}")
    return lam


def trig_moment_stat(theta: AngleLike, phi: AngleLike, lam: float = 1.0) -> float:
    """Trigonometric-moment independence statistic T_{n,lambda}

    T = 1/n sum_jk J_jk^t J_jk^p + 1/n^3 (sum J^t)(sum J^p)
        - 2/n^2 sum_jkl J_jk^t J_jl^p

    which is n times the V-statistic of the two J matrices.

    Raises:
        ConfigurationError: If lambda <= 0
        InputError: On unequal lengths
    """
    lam = _check_lambda(lam)
    t, p = as_angles(theta), as_angles(phi)
    if t.n != p.n:
        raise InputError(f"Length mismatch: {t.n} vs {p.n}")
    return t.n * v_stat_values(trig_matrix(t, lam), trig_matrix(p, lam))


def trig_moment_naive(theta: AngleLike, phi: AngleLike, lam: float = 1.0) -> float:
    """Literal O(n^3) transcription of T_{n,lambda}; test oracle"""
    lam = _check_lambda(lam)
    t, p = as_angles(theta).angles, as_angles(phi).angles
    n = len(t)
    if n != len(p):
        raise InputError(f"Length mismatch: {n} vs {len(p)}")

    def j(x):
        return float(np.cos(lam * np.sin(x)) * np.exp(lam * (np.cos(x) - 1.0)))

    first = 0.0
    sum_t = 0.0
    sum_p = 0.0
    for a in range(n):
        for b in range(n):
            jt = j(t[a] - t[b])
            jp = j(p[a] - p[b])
            first += jt * jp
            sum_t += jt
            sum_p += jp

    third = 0.0
    for a in range(n):
        for b in range(n):
            for c in range(n):
                third += j(t[a] - t[b]) * j(p[a] - p[c])

    return first / n + sum_t * sum_p / n**3 - 2.0 * third / n**2


def parse_statistic(spec: str, default_kernel: Optional[Kernel] = None) -> StatisticSpec:
    """Parse a statistic identifier

    Accepted forms: `dcor`, `dcor:<kernel>`, `dcov[:<kernel>]`, `ccor`,
    `trig`, `trig:<lambda>`, `nk[:<kernel>]`, where <kernel> is
    `energy:<a>` | `ratio` | `log`.

    Raises:
        ConfigurationError: If the identifier or its parameter is invalid
    """
    if not isinstance(spec, str) or not spec.strip():
        raise ConfigurationError(f"Statistic identifier must be a non-empty string, got {spec!r}")

    head, _, rest = spec.strip().partition(':')
    try:
        name = StatisticName(head.strip().lower())
    except ValueError:
        valid = ', '.join(s.value for s in StatisticName)
        raise ConfigurationError(f"Unknown statistic '{head}'. Valid statistics: {valid}")

    if name in (StatisticName.DCOR, StatisticName.DCOV, StatisticName.NK):
        kernel = parse_kernel(rest) if rest else (default_kernel or DEFAULT_KERNEL)
        return StatisticSpec(name, kernel=kernel)

    if name == StatisticName.TRIG:
        if not rest:
            return StatisticSpec(name, lam=1.0)
        try:
            lam = float(rest)
        except ValueError:
            raise ConfigurationError(f"Invalid lambda in statistic '{spec}'")
        return StatisticSpec(name, lam=_check_lambda(lam))

    if rest:
        raise ConfigurationError(f"Statistic 'ccor' takes no parameter, got '{spec}'")
    return StatisticSpec(name)
