"""Data models for dirdep

This module defines the data carriers shared by the library, the
Monte Carlo harness and the CLI. Invariants are checked on construction;
numpy payloads are copied and frozen so instances can be shared freely
between threads and worker processes.
"""

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Optional

import numpy as np

from .errors import ConfigurationError, InputError


TWO_PI = 2.0 * np.pi

# Rows of a spherical sample must have norm 1 within this tolerance
UNIT_NORM_TOL = 1e-9


def _frozen_array(values: Any, name: str) -> np.ndarray:
    """Copy `values` into a read-only float array, rejecting non-finite entries"""
    try:
        arr = np.array(values, dtype=float)
    except (TypeError, ValueError) as e:
        raise InputError(f"{name} must be numeric: {e}")
    if not np.all(np.isfinite(arr)):
        bad = np.argwhere(~np.isfinite(arr))[0]
        raise InputError(f"{name} contains a non-finite value at index {tuple(bad.tolist())}")
    arr.setflags(write=False)
    return arr


class SampleKind(str, Enum):
    """Support of a directional sample"""
    SPHERE = "sphere"
    LINEAR = "linear"


@dataclass(frozen=True, eq=False)
class AngleVector:
    """Angles in radians, normalized to [0, 2*pi) on construction

    Attributes:
        angles: 1-D array of n angles
    """
    angles: np.ndarray

    def __post_init__(self):
        arr = np.array(self.angles, dtype=float, ndmin=1)
        if arr.ndim != 1:
            raise InputError(f"Angles must be a 1-D sequence, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            idx = int(np.argmax(~np.isfinite(arr)))
            raise InputError(f"Angle at index {idx} is not finite")
        arr = np.mod(arr, TWO_PI)
        # mod can round a tiny negative angle up to exactly 2*pi
        arr[arr >= TWO_PI] = 0.0
        arr.setflags(write=False)
        object.__setattr__(self, 'angles', arr)

    def __len__(self) -> int:
        return self.angles.shape[0]

    @property
    def n(self) -> int:
        return self.angles.shape[0]


@dataclass(frozen=True, eq=False)
class DirectionalSample:
    """n observations on S^d (stored as unit vectors in R^(d+1)) or on the line

    Attributes:
        points: n x m matrix of coordinates
        kind: SPHERE (m = d + 1, unit rows) or LINEAR (m = 1)
    """
    points: np.ndarray
    kind: SampleKind = SampleKind.SPHERE

    def __post_init__(self):
        arr = _frozen_array(self.points, "Sample points")
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1) if self.kind == SampleKind.LINEAR else arr.reshape(1, -1)
            arr.setflags(write=False)
        if arr.ndim != 2:
            raise InputError(f"Sample points must form a matrix, got shape {arr.shape}")
        if arr.shape[0] < 1:
            raise InputError("Sample must contain at least one observation")

        kind = SampleKind(self.kind)
        if kind == SampleKind.LINEAR:
            if arr.shape[1] != 1:
                raise InputError(f"Linear sample must have one column, got {arr.shape[1]}")
        else:
            if arr.shape[1] < 2:
                raise InputError("Spherical sample needs at least two coordinates per row")
            norms = np.linalg.norm(arr, axis=1)
            off = np.abs(norms - 1.0) > UNIT_NORM_TOL
            if np.any(off):
                row = int(np.argmax(off))
                raise InputError(
                    f"Row {row} is not a unit vector (norm {norms[row]:.12g})"
                )

        object.__setattr__(self, 'points', arr)
        object.__setattr__(self, 'kind', kind)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def ambient_dim(self) -> int:
        """Number of coordinates per observation (m)"""
        return self.points.shape[1]

    @property
    def dim(self) -> int:
        """Intrinsic dimension d of S^d; 1 for linear samples"""
        if self.kind == SampleKind.LINEAR:
            return 1
        return self.points.shape[1] - 1

    @property
    def is_circular(self) -> bool:
        return self.kind == SampleKind.SPHERE and self.points.shape[1] == 2


class KernelType(str, Enum):
    """Strongly negative definite kernels of Euclidean distance"""
    ENERGY = "energy"
    RATIO = "ratio"
    LOG = "log"


@dataclass(frozen=True)
class Kernel:
    """Kernel choice K(x, y) = k(||x - y||)

    Attributes:
        variant: ENERGY (dist^a), RATIO (dist/(1+dist)) or LOG (log(1+dist^2))
        a: exponent of the energy kernel, strictly inside (0, 2)
    """
    variant: KernelType = KernelType.ENERGY
    a: Optional[float] = 1.0

    def __post_init__(self):
        try:
            variant = KernelType(self.variant)
        except ValueError:
            raise ConfigurationError(
                f"Unknown kernel '{self.variant}'. Valid kernels: energy:<a>, ratio, log"
            )
        object.__setattr__(self, 'variant', variant)
        if variant == KernelType.ENERGY:
            if self.a is None:
                object.__setattr__(self, 'a', 1.0)
            a = float(self.a)
            if not np.isfinite(a) or not 0.0 < a < 2.0:
                raise ConfigurationError(
                    f"Energy kernel exponent must lie strictly inside (0, 2), got {self.a}"
                )
            object.__setattr__(self, 'a', a)
        else:
            object.__setattr__(self, 'a', None)

    @property
    def spec(self) -> str:
        """Canonical spec string (energy:<a> | ratio | log)"""
        if self.variant == KernelType.ENERGY:
            return f"energy:{self.a:g}"
        return self.variant.value

    @property
    def label(self) -> str:
        """Subscript used in table headers: 0.25, k, l"""
        if self.variant == KernelType.ENERGY:
            return f"{self.a:g}"
        return "k" if self.variant == KernelType.RATIO else "l"


@dataclass(frozen=True, eq=False)
class GramMatrix:
    """Symmetric n x n matrix of pairwise kernel values

    Attributes:
        values: the matrix; symmetric, zero diagonal, nonnegative, finite
        kernel: kernel the values were computed with
    """
    values: np.ndarray
    kernel: Optional[Kernel] = None

    def __post_init__(self):
        arr = _frozen_array(self.values, "Gram matrix")
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise InputError(f"Gram matrix must be square, got shape {arr.shape}")
        if not np.array_equal(arr, arr.T):
            raise InputError("Gram matrix must be symmetric")
        if np.any(np.diag(arr) != 0.0):
            raise InputError("Gram matrix must have a zero diagonal")
        if np.any(arr < 0.0):
            raise InputError("Gram matrix entries must be nonnegative")
        object.__setattr__(self, 'values', arr)

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class StatValue:
    """A named statistic evaluated on a sample of size n"""
    value: float
    name: str
    n: int

    def __post_init__(self):
        if not np.isfinite(self.value):
            raise InputError(f"Statistic '{self.name}' is not finite: {self.value}")


class StatisticName(str, Enum):
    """Statistic identifiers understood by the CLI and study files"""
    DCOR = "dcor"
    DCOV = "dcov"
    CCOR = "ccor"
    TRIG = "trig"
    NK = "nk"


@dataclass(frozen=True)
class StatisticSpec:
    """Parsed statistic identifier

    Attributes:
        name: statistic family
        kernel: kernel for dcor, dcov and nk
        lam: lambda of the trigonometric-moment statistic
    """
    name: StatisticName
    kernel: Optional[Kernel] = None
    lam: Optional[float] = None

    @property
    def spec(self) -> str:
        if self.name in (StatisticName.DCOR, StatisticName.DCOV, StatisticName.NK):
            return f"{self.name.value}:{self.kernel.spec}"
        if self.name == StatisticName.TRIG:
            return f"trig:{self.lam:g}"
        return self.name.value

    @property
    def label(self) -> str:
        """Column header as printed in power tables (C, T_1, D_0.25, D_k, ...)"""
        if self.name == StatisticName.DCOR:
            return f"D_{self.kernel.label}"
        if self.name == StatisticName.DCOV:
            return f"V_{self.kernel.label}"
        if self.name == StatisticName.NK:
            return f"N_{self.kernel.label}"
        if self.name == StatisticName.TRIG:
            return f"T_{self.lam:g}"
        return "C"

    @property
    def two_sided(self) -> bool:
        """Sign-valued statistics are compared in absolute value"""
        return self.name == StatisticName.CCOR


@dataclass(frozen=True)
class TestResult:
    """Outcome of a permutation test

    Attributes:
        statistic: observed statistic
        p_value: (1 + exceed_count) / (B + 1)
        B: number of permutations
        n: sample size
        exceed_count: permutations whose statistic reached the observed one
        seed: master seed of the permutation stream
        statistic_name: identifier of the statistic
    """
    __test__ = False

    statistic: float
    p_value: float
    B: int
    n: int
    exceed_count: int
    seed: int
    statistic_name: str

    def __post_init__(self):
        if self.B < 1:
            raise ConfigurationError(f"B must be at least 1, got {self.B}")
        if not 0 <= self.exceed_count <= self.B:
            raise InputError(
                f"exceed_count must lie in [0, {self.B}], got {self.exceed_count}"
            )

    @classmethod
    def from_counts(cls, statistic: float, exceed_count: int, B: int, n: int,
                    seed: int, statistic_name: str) -> 'TestResult':
        return cls(
            statistic=float(statistic),
            p_value=(1 + exceed_count) / (B + 1),
            B=B,
            n=n,
            exceed_count=int(exceed_count),
            seed=int(seed),
            statistic_name=statistic_name
        )

    @property
    def fraction(self) -> str:
        """Exact p-value as an unreduced fraction (1+k)/(B+1)"""
        return f"{1 + self.exceed_count}/{self.B + 1}"

    @property
    def p_fraction(self) -> Fraction:
        return Fraction(1 + self.exceed_count, self.B + 1)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'statistic_name': self.statistic_name,
            'statistic': self.statistic,
            'p_value': self.p_value,
            'p_fraction': self.fraction,
            'exceed_count': self.exceed_count,
            'B': self.B,
            'n': self.n,
            'seed': self.seed
        }


@dataclass(frozen=True, eq=False)
class PairedSample:
    """Paired observations (X_i, Y_i), i = 1..n"""
    x: DirectionalSample
    y: DirectionalSample

    def __post_init__(self):
        if self.x.n != self.y.n:
            raise InputError(
                f"Paired samples must have equal size, got {self.x.n} and {self.y.n}"
            )

    @property
    def n(self) -> int:
        return self.x.n


@dataclass
class ValidationResult:
    """Result of validating a study configuration

    Attributes:
        valid: Whether validation passed
        errors: List of validation error messages
        scenario: Label of the scenario being validated
    """
    valid: bool
    errors: List[str] = field(default_factory=list)
    scenario: Optional[str] = None

    def add_error(self, error: str) -> None:
        """Add a validation error"""
        self.valid = False
        self.errors.append(error)


@dataclass
class RunDefaults:
    """Defaults applied when the CLI flags are not given

    Attributes:
        bootstrap: permutation count B
        seed: master seed
        jobs: worker count
        kernel: kernel spec string
    """
    bootstrap: int = 1000
    seed: int = 20240531
    jobs: int = 1
    kernel: str = "energy:1"


@dataclass
class LoggingConfig:
    """Logging settings

    Attributes:
        level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        format: Record format
        file: Optional log file path
    """
    level: str = "INFO"
    format: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    file: Optional[str] = None


@dataclass
class AppConfig:
    """Application configuration (dirdep.yaml)"""
    defaults: RunDefaults = field(default_factory=RunDefaults)
    logging: LoggingConfig = field(default_factory=LoggingConfig)
