"""Permutation calibration of bivariate statistics

Kernel matrices are computed once per test. A permutation sigma acts by
relabelling the indices of the Y side only (X*_i = X_i, Y*_i = Y_sigma(i)),
so permuted statistics cost O(n^2) each and never re-evaluate a kernel.

Reproducibility scheme: the master seed keys a Philox counter-based
generator, which draws a B x n matrix whose b-th row is sigma_b
(`Generator.permuted` along axis 1). Workers only consume pre-drawn rows
and every permuted statistic is reduced row by row, so (inputs, seed, B)
fix the result whatever the job count. Replicate streams of the Monte
Carlo harness come from `SeedSequence(seed, spawn_key=(replicate, ...))`.

The p-value is (1 + #{b : T*_b >= T_obs}) / (B + 1); ties count as
exceedances, and sign-valued statistics are compared in absolute value.
"""

import logging
import math
import os
from abc import ABC, abstractmethod
from itertools import permutations
from typing import Optional, Sequence, Union

import numpy as np
from joblib import Parallel, delayed

import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from shared.errors import ConfigurationError, DegenerateMarginalError, InputError
from shared.models import (
    DirectionalSample,
    GramMatrix,
    Kernel,
    StatisticName,
    StatisticSpec,
    TestResult,
)

from . import geometry
from . import kernels
from .statistics import (
    DEGENERATE_EPS,
    centered_sines,
    parse_statistic,
    trig_matrix,
    v_stat_values,
)


logger = logging.getLogger(__name__)


# Upper bound on gathered matrix entries per evaluation chunk
CHUNK_ELEMENTS = 1 << 21

# Relative slack under which a permuted statistic counts as a tie
TIE_RTOL = 1e-12

EXHAUSTIVE_MAX_N = 7


def check_seed(seed: int) -> int:
    """Seeds must be nonnegative integers"""
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or seed < 0:
        raise ConfigurationError(f"Seed must be a nonnegative integer, got {seed!r}")
    return int(seed)


def spawn_seed(seed: int, *key: int) -> int:
    """Derive a 64-bit child seed from (seed, key)"""
    ss = np.random.SeedSequence(check_seed(seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def spawn_rng(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for stream `key` under master `seed`"""
    ss = np.random.SeedSequence(check_seed(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.default_rng(ss)


def draw_permutations(seed: int, B: int, n: int) -> np.ndarray:
    """B x n matrix whose rows are uniform random permutations of range(n)"""
    rng = np.random.Generator(np.random.Philox(check_seed(seed)))
    return rng.permuted(np.tile(np.arange(n), (B, 1)), axis=1)


def count_exceedances(observed: float, permuted: np.ndarray, two_sided: bool = False) -> int:
    """#{b : T*_b >= T_obs}, ties included up to round-off"""
    values = np.asarray(permuted, dtype=float)
    obs = float(observed)
    if two_sided:
        values = np.abs(values)
        obs = abs(obs)
    threshold = obs - TIE_RTOL * max(1.0, abs(obs))
    return int(np.count_nonzero(values >= threshold))


def check_permutation(sigma: Sequence[int], n: int) -> np.ndarray:
    """Validate that sigma is a bijection on {0..n-1}

    Raises:
        InputError: If it is not
    """
    s = np.asarray(sigma)
    if s.shape != (n,) or not np.issubdtype(s.dtype, np.integer):
        raise InputError(f"Permutation must be {n} integers, got shape {s.shape}")
    if not np.array_equal(np.sort(s), np.arange(n)):
        raise InputError("Permutation is not a bijection on 0..n-1")
    return s


def permute_gram(g: GramMatrix, sigma: Sequence[int]) -> GramMatrix:
    """Relabel both rows and columns: out[i][j] = G[sigma(i)][sigma(j)]"""
    s = check_permutation(sigma, g.n)
    return GramMatrix(g.values[np.ix_(s, s)], g.kernel)


def _chunk_rows(n: int) -> int:
    return max(1, CHUNK_ELEMENTS // max(1, n * n))


class PermutationStatistic(ABC):
    """A statistic prepared for repeated evaluation under Y relabelling

    Subclasses cache everything that does not depend on the permutation.
    `evaluate` maps an m x n block of permutations to m statistic values,
    each value depending only on its own row.
    """

    two_sided = False

    def __init__(self, name: str, n: int):
        self.name = name
        self.n = n

    @abstractmethod
    def evaluate(self, perms: np.ndarray) -> np.ndarray:
        """Statistic values for each permutation row"""

    def observed(self) -> float:
        return float(self.evaluate(np.arange(self.n)[None, :])[0])


class MatrixStatistic(PermutationStatistic):
    """scale * V(A, B_sigma) / norm, for dcov, dcor and the trig-moment statistic"""

    def __init__(self, a: np.ndarray, b: np.ndarray, name: str,
                 scale: float = 1.0, normalize: bool = False):
        a = np.ascontiguousarray(a, dtype=float)
        b = np.ascontiguousarray(b, dtype=float)
        if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise InputError(f"Size mismatch: {a.shape} vs {b.shape}")
        super().__init__(name, a.shape[0])
        self._a = a
        self._b = b
        self._row_a = a.sum(axis=1)
        self._row_b = b.sum(axis=1)
        n = self.n
        self._constant = self._row_a.sum() * self._row_b.sum() / n**4
        self._scale = float(scale)
        self._norm = 1.0
        if normalize:
            vxx = v_stat_values(a, a)
            vyy = v_stat_values(b, b)
            if vxx <= DEGENERATE_EPS:
                raise DegenerateMarginalError(f"X marginal is degenerate (V(X,X) = {vxx:.3g})")
            if vyy <= DEGENERATE_EPS:
                raise DegenerateMarginalError(f"Y marginal is degenerate (V(Y,Y) = {vyy:.3g})")
            self._norm = float(np.sqrt(vxx * vyy))

    def evaluate(self, perms: np.ndarray) -> np.ndarray:
        perms = np.atleast_2d(perms)
        m, n = perms.shape
        out = np.empty(m)
        step = _chunk_rows(n)
        flat_a = self._a.reshape(-1)
        for start in range(0, m, step):
            p = perms[start:start + step]
            bp = self._b[p[:, :, None], p[:, None, :]].reshape(p.shape[0], -1)
            cross = (bp * flat_a).sum(axis=1)
            rs = (self._row_b[p] * self._row_a).sum(axis=1)
            out[start:start + step] = cross / n**2 + self._constant - 2.0 * rs / n**3
        return out * self._scale / self._norm


class CircularCorrelationStatistic(PermutationStatistic):
    """Circular correlation; mean directions are permutation invariant"""

    two_sided = True

    def __init__(self, theta, phi, name: str = "ccor"):
        t = geometry.as_angles(theta)
        p = geometry.as_angles(phi)
        if t.n != p.n:
            raise InputError(f"Length mismatch: {t.n} vs {p.n}")
        if t.n < 2:
            raise InputError("Circular correlation needs at least two observations")
        super().__init__(name, t.n)
        self._st = centered_sines(t)
        self._sp = centered_sines(p)
        denom = float(np.sqrt((self._st @ self._st) * (self._sp @ self._sp)))
        if denom <= DEGENERATE_EPS:
            raise DegenerateMarginalError("Circular correlation undefined: zero sine spread")
        self._denom = denom

    def evaluate(self, perms: np.ndarray) -> np.ndarray:
        perms = np.atleast_2d(perms)
        return np.clip((self._sp[perms] * self._st).sum(axis=1) / self._denom, -1.0, 1.0)


class TwoSampleStatistic(PermutationStatistic):
    """N_K between the first n_x and the remaining pooled observations"""

    def __init__(self, pooled: GramMatrix, n_x: int, name: str = "nk"):
        super().__init__(name, pooled.n)
        if not 1 <= n_x < pooled.n:
            raise InputError(f"Both samples need at least one observation, got n_x={n_x} of {pooled.n}")
        self._g = pooled.values
        self._total = float(self._g.sum())
        self.n_x = n_x
        self.n_y = pooled.n - n_x

    def evaluate(self, perms: np.ndarray) -> np.ndarray:
        perms = np.atleast_2d(perms)
        m = perms.shape[0]
        nx, ny = self.n_x, self.n_y
        out = np.empty(m)
        step = _chunk_rows(self.n)
        for start in range(0, m, step):
            p = perms[start:start + step]
            gi, gj = p[:, :nx], p[:, nx:]
            s_xx = self._g[gi[:, :, None], gi[:, None, :]].reshape(p.shape[0], -1).sum(axis=1)
            s_yy = self._g[gj[:, :, None], gj[:, None, :]].reshape(p.shape[0], -1).sum(axis=1)
            s_xy = 0.5 * (self._total - s_xx - s_yy)
            out[start:start + step] = 2.0 * s_xy / (nx * ny) - s_xx / nx**2 - s_yy / ny**2
        return out


def _evaluate_parallel(statistic: PermutationStatistic, perms: np.ndarray, jobs: int) -> np.ndarray:
    if jobs == 1 or perms.shape[0] < 2:
        return statistic.evaluate(perms)
    workers = jobs if jobs > 0 else max(1, (os.cpu_count() or 1) + 1 + jobs)
    blocks = np.array_split(perms, min(workers, perms.shape[0]))
    parts = Parallel(n_jobs=jobs, prefer="threads")(
        delayed(statistic.evaluate)(block) for block in blocks
    )
    return np.concatenate(parts)


def run_permutation_test(statistic: PermutationStatistic, B: int, seed: int,
                         jobs: int = 1) -> TestResult:
    """Calibrate a prepared statistic against B random Y relabellings

    Raises:
        ConfigurationError: If B < 1, the seed is invalid, or jobs == 0
    """
    if isinstance(B, bool) or not isinstance(B, (int, np.integer)) or B < 1:
        raise ConfigurationError(f"Number of permutations B must be at least 1, got {B!r}")
    if jobs == 0:
        raise ConfigurationError("jobs cannot be 0 (use -1 for all CPUs)")
    seed = check_seed(seed)

    observed = statistic.observed()
    perms = draw_permutations(seed, int(B), statistic.n)
    values = _evaluate_parallel(statistic, perms, jobs)
    exceed = count_exceedances(observed, values, statistic.two_sided)

    logger.debug(
        f"{statistic.name}: observed={observed:.6g}, exceed={exceed}/{B}, seed={seed}"
    )
    return TestResult.from_counts(observed, exceed, int(B), statistic.n, seed, statistic.name)


def _as_spec(stat: Union[str, StatisticSpec]) -> StatisticSpec:
    return stat if isinstance(stat, StatisticSpec) else parse_statistic(stat)


def gram_statistic(a: GramMatrix, b: GramMatrix, stat: Union[str, StatisticSpec] = "dcor") -> MatrixStatistic:
    """Prepared dcor/dcov statistic over precomputed Gram matrices"""
    spec = _as_spec(stat)
    if spec.name not in (StatisticName.DCOR, StatisticName.DCOV):
        raise ConfigurationError(
            f"Statistic '{spec.spec}' is not a Gram-matrix statistic; use independence_test"
        )
    return MatrixStatistic(a.values, b.values, spec.spec,
                           normalize=spec.name == StatisticName.DCOR)


def permutation_test(a: GramMatrix, b_gram: GramMatrix, stat: Union[str, StatisticSpec] = "dcor",
                     B: int = 1000, seed: int = 0, jobs: int = 1) -> TestResult:
    """Permutation test of independence from two Gram matrices

    The X Gram is never permuted; the Y Gram is relabelled by each sigma_b
    on rows and columns.

    Raises:
        ConfigurationError: If B < 1 or stat is not dcor/dcov
        InputError: If the Grams differ in size
        DegenerateMarginalError: For dcor on a constant marginal
    """
    if a.n != b_gram.n:
        raise InputError(f"Size mismatch: {a.n} vs {b_gram.n}")
    return run_permutation_test(gram_statistic(a, b_gram, stat), B, seed, jobs)


def build_statistic(x: DirectionalSample, y: DirectionalSample,
                    stat: Union[str, StatisticSpec]) -> PermutationStatistic:
    """Prepare a statistic on paired samples, computing each Gram exactly once

    Raises:
        ConfigurationError: For two-sample statistics
        InputError: If the samples differ in size or angular statistics get non-circular data
    """
    spec = _as_spec(stat)
    if x.n != y.n:
        raise InputError(f"Paired samples must have equal size, got {x.n} and {y.n}")

    if spec.name in (StatisticName.DCOR, StatisticName.DCOV):
        ga = kernels.gram(spec.kernel, x)
        gb = kernels.gram(spec.kernel, y)
        return MatrixStatistic(ga.values, gb.values, spec.spec,
                               normalize=spec.name == StatisticName.DCOR)

    if spec.name == StatisticName.CCOR:
        return CircularCorrelationStatistic(
            geometry.sample_to_angles(x), geometry.sample_to_angles(y), spec.spec
        )

    if spec.name == StatisticName.TRIG:
        jt = trig_matrix(geometry.sample_to_angles(x), spec.lam)
        jp = trig_matrix(geometry.sample_to_angles(y), spec.lam)
        return MatrixStatistic(jt, jp, spec.spec, scale=x.n)

    raise ConfigurationError(
        f"Statistic '{spec.spec}' compares two samples; use two_sample_test"
    )


def independence_test(x: DirectionalSample, y: DirectionalSample,
                      stat: Union[str, StatisticSpec] = "dcor", B: int = 1000,
                      seed: int = 0, jobs: int = 1) -> TestResult:
    """Permutation test of independence between paired samples x and y"""
    return run_permutation_test(build_statistic(x, y, stat), B, seed, jobs)


def two_sample_test(kernel: Kernel, x: DirectionalSample, y: DirectionalSample,
                    B: int = 1000, seed: int = 0, jobs: int = 1) -> TestResult:
    """Permutation two-sample test on N_K (pooled Gram computed once)

    Raises:
        InputError: If the samples live in different spaces
    """
    if x.ambient_dim != y.ambient_dim or x.kind != y.kind:
        raise InputError(
            f"Two-sample test needs samples in the same space, got "
            f"{x.kind.value}/{x.ambient_dim} and {y.kind.value}/{y.ambient_dim}"
        )
    pooled = DirectionalSample(np.vstack((x.points, y.points)), x.kind)
    statistic = TwoSampleStatistic(kernels.gram(kernel, pooled), x.n, f"nk:{kernel.spec}")
    return run_permutation_test(statistic, B, seed, jobs)


def exhaustive_permutation_test(statistic: PermutationStatistic,
                                seed: Optional[int] = 0) -> TestResult:
    """Exact test over all n! relabellings (n <= 7), used as an oracle

    The identity plays the role of the observed draw, so B = n! - 1 and
    p = #{sigma : T_sigma >= T_obs} / n!.
    """
    n = statistic.n
    if n > EXHAUSTIVE_MAX_N:
        raise ConfigurationError(f"Exhaustive enumeration is limited to n <= {EXHAUSTIVE_MAX_N}, got {n}")
    if n < 2:
        raise ConfigurationError("Exhaustive enumeration needs n >= 2")
    perms = np.array(list(permutations(range(n))))[1:]
    observed = statistic.observed()
    exceed = count_exceedances(observed, statistic.evaluate(perms), statistic.two_sided)
    return TestResult.from_counts(observed, exceed, math.factorial(n) - 1, n,
                                  seed or 0, statistic.name)
