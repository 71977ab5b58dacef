"""Monte Carlo size and power studies

Each replicate r of a scenario draws its sample from the stream
spawn_rng(seed, stream, r, 0) and its permutations from
spawn_seed(seed, stream, r, 1), so the rejection counts depend only on
(scenario, seed, stream) and never on how replicates are distributed over
workers. `run_study` gives scenario i the stream i, so rows of one table
never share sample streams.

Two calibration modes:

full_bootstrap  every replicate runs a B-permutation test per statistic
                and rejects when p <= alpha.
warp_speed      every replicate computes its observed statistic T_r and
                one permuted statistic T*_r; replicate r rejects when
                (1 + #{j : T*_j >= T_r}) / (N + 1) <= alpha, i.e. when T_r
                exceeds the pooled (1 - alpha) quantile of the N permuted
                values under the same tie rule as the permutation p-value.
"""

import io
import logging
import time
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

import sys
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from shared.errors import ConfigurationError, DirdepError, InputError
from shared.models import StatisticName, StatisticSpec

from .inference import (
    build_statistic,
    count_exceedances,
    draw_permutations,
    run_permutation_test,
    spawn_rng,
    spawn_seed,
)
from .model_spec import ModelSpec, parse_model
from .samplers import sample_joint
from .statistics import parse_statistic


logger = logging.getLogger(__name__)


# Replicates handed to a worker at once
REPLICATE_BLOCK = 25


class Mode(str, Enum):
    """Calibration mode of a power study"""
    FULL_BOOTSTRAP = "full_bootstrap"
    WARP_SPEED = "warp_speed"


def check_statistics_for_model(model: ModelSpec, statistics: Sequence[StatisticSpec]) -> List[str]:
    """Reasons why any of `statistics` cannot be computed on draws of `model`"""
    problems = []
    for spec in statistics:
        if spec.name == StatisticName.NK:
            problems.append(f"'{spec.spec}' is a two-sample statistic and has no power-study use")
        elif spec.name in (StatisticName.CCOR, StatisticName.TRIG) and not model.circular_pair:
            problems.append(f"'{spec.spec}' needs circular-circular data, but {model} is not toroidal")
    return problems


@dataclass(frozen=True)
class ScenarioConfig:
    """One row block of a power table

    Attributes:
        label: row label (defaults to the model text)
        model: joint model to sample from
        n: sample size
        statistics: statistics evaluated on every replicate
        alpha: nominal level
        N: Monte Carlo replicates
        B: permutations per test (ignored in warp_speed mode)
        mode: calibration mode
        seed: master seed
        stream: index mixed into every replicate spawn key
    """
    label: str
    model: ModelSpec
    n: int
    statistics: Tuple[StatisticSpec, ...]
    alpha: float = 0.05
    N: int = 2000
    B: int = 1000
    mode: Mode = Mode.FULL_BOOTSTRAP
    seed: int = 20240531
    stream: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'statistics', tuple(self.statistics))
        try:
            object.__setattr__(self, 'mode', Mode(self.mode))
        except ValueError:
            raise ConfigurationError(
                f"Scenario '{self.label}': unknown mode '{self.mode}' "
                f"(expected {', '.join(m.value for m in Mode)})"
            )
        if not self.statistics:
            raise ConfigurationError(f"Scenario '{self.label}': statistic list is empty")
        if not 0.0 < float(self.alpha) < 1.0:
            raise ConfigurationError(f"Scenario '{self.label}': alpha must lie in (0, 1), got {self.alpha}")
        for name in ('n', 'N', 'B', 'seed', 'stream'):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise ConfigurationError(f"Scenario '{self.label}': {name} must be an integer, got {value!r}")
        if self.n < 2:
            raise ConfigurationError(f"Scenario '{self.label}': n must be at least 2, got {self.n}")
        if self.N < 1 or self.B < 1:
            raise ConfigurationError(f"Scenario '{self.label}': N and B must be at least 1")
        if self.seed < 0 or self.stream < 0:
            raise ConfigurationError(f"Scenario '{self.label}': seed and stream must be nonnegative")
        labels = [spec.label for spec in self.statistics]
        duplicates = sorted({label for label in labels if labels.count(label) > 1})
        if duplicates:
            raise ConfigurationError(
                f"Scenario '{self.label}': statistics share the table label(s) {', '.join(duplicates)}"
            )
        problems = check_statistics_for_model(self.model, self.statistics)
        if problems:
            raise ConfigurationError(f"Scenario '{self.label}': " + "; ".join(problems))

    @classmethod
    def from_strings(cls, model: str, statistics: Sequence[str], label: Optional[str] = None,
                     **kwargs) -> 'ScenarioConfig':
        """Build a scenario from a model-spec string and statistic identifiers"""
        return cls(
            label=label or model.strip(),
            model=parse_model(model),
            statistics=tuple(parse_statistic(s) for s in statistics),
            **kwargs
        )

    @property
    def permutations(self) -> int:
        """Permutations drawn per replicate and statistic"""
        return 1 if self.mode == Mode.WARP_SPEED else self.B


@dataclass(frozen=True)
class PowerEntry:
    """Rejection count of one (scenario, statistic) cell"""
    scenario: str
    statistic: str
    rejections: int
    replicates: int

    @property
    def rate(self) -> float:
        return self.rejections / self.replicates

    @property
    def percent(self) -> int:
        """Rate in percent, rounded half-up"""
        exact = Fraction(100 * self.rejections, self.replicates)
        return int(exact + Fraction(1, 2))


@dataclass(frozen=True)
class ScenarioMeta:
    label: str
    model: str
    n: int
    mode: str
    alpha: float
    replicates: int
    permutations: int
    seed: int
    stream: int = 0


@dataclass
class PowerTable:
    """Empirical rejection rates, in scenario order then statistic order

    Attributes:
        name: study name
        entries: one PowerEntry per (scenario, statistic)
        scenarios: per-scenario metadata (mode, seed, replicate counts)
        runtime: wall-clock seconds
    """
    name: str = "study"
    entries: List[PowerEntry] = field(default_factory=list)
    scenarios: List[ScenarioMeta] = field(default_factory=list)
    runtime: float = 0.0

    @property
    def is_empty(self) -> bool:
        return not self.entries

    @property
    def statistic_labels(self) -> List[str]:
        seen: Dict[str, None] = {}
        for e in self.entries:
            seen.setdefault(e.statistic, None)
        return list(seen)

    @property
    def rates(self) -> Dict[Tuple[str, str], float]:
        return {(e.scenario, e.statistic): e.rate for e in self.entries}

    def rate(self, scenario: str, statistic: str) -> float:
        for e in self.entries:
            if e.scenario == scenario and e.statistic == statistic:
                return e.rate
        raise KeyError((scenario, statistic))

    def extend(self, other: 'PowerTable') -> None:
        known = {s.label for s in self.scenarios}
        for meta in other.scenarios:
            if meta.label in known:
                raise ConfigurationError(f"Duplicate scenario label '{meta.label}'")
        self.entries.extend(other.entries)
        self.scenarios.extend(other.scenarios)
        self.runtime += other.runtime


def _replicate_sample(cfg: ScenarioConfig, r: int):
    try:
        return sample_joint(cfg.model, cfg.n, spawn_rng(cfg.seed, cfg.stream, r, 0))
    except DirdepError as e:
        raise type(e)(f"Scenario '{cfg.label}', replicate {r}: {e}") from e


def _full_bootstrap_block(cfg: ScenarioConfig, replicates: range) -> np.ndarray:
    """Rejection indicators, shape (len(replicates), len(statistics))"""
    out = np.zeros((len(replicates), len(cfg.statistics)), dtype=bool)
    for i, r in enumerate(replicates):
        pair = _replicate_sample(cfg, r)
        perm_seed = spawn_seed(cfg.seed, cfg.stream, r, 1)
        for s, spec in enumerate(cfg.statistics):
            try:
                result = run_permutation_test(build_statistic(pair.x, pair.y, spec), cfg.B, perm_seed)
            except DirdepError as e:
                raise type(e)(f"Scenario '{cfg.label}', replicate {r}: {e}") from e
            out[i, s] = result.p_value <= cfg.alpha
        logger.debug(f"{cfg.label}: replicate {r} rejections {out[i].astype(int).tolist()}")
    return out


def _warp_speed_block(cfg: ScenarioConfig, replicates: range) -> np.ndarray:
    """Observed and single permuted statistic, shape (len(replicates), len(statistics), 2)"""
    out = np.empty((len(replicates), len(cfg.statistics), 2))
    for i, r in enumerate(replicates):
        pair = _replicate_sample(cfg, r)
        perm = draw_permutations(spawn_seed(cfg.seed, cfg.stream, r, 1), 1, cfg.n)
        for s, spec in enumerate(cfg.statistics):
            try:
                stat = build_statistic(pair.x, pair.y, spec)
                out[i, s, 0] = stat.observed()
                out[i, s, 1] = stat.evaluate(perm)[0]
            except DirdepError as e:
                raise type(e)(f"Scenario '{cfg.label}', replicate {r}: {e}") from e
    return out


def _blocks(N: int) -> List[range]:
    return [range(start, min(N, start + REPLICATE_BLOCK)) for start in range(0, N, REPLICATE_BLOCK)]


def warp_speed_rejections(observed: np.ndarray, permuted: np.ndarray, alpha: float,
                          two_sided: bool = False) -> int:
    """Replicates whose observed statistic is significant against the pooled permuted values"""
    N = permuted.size
    pooled = np.abs(permuted) if two_sided else permuted
    rejections = 0
    for t in observed:
        exceed = count_exceedances(abs(t) if two_sided else t, pooled)
        if (1 + exceed) / (N + 1) <= alpha:
            rejections += 1
    return rejections


def run_power_study(cfg: ScenarioConfig, jobs: int = 1) -> PowerTable:
    """Estimate rejection rates of every statistic under one scenario

    Raises:
        ConfigurationError: On invalid job counts
        SamplerError: If a replicate's sampler fails (message names the replicate)
    """
    if jobs == 0:
        raise ConfigurationError("jobs cannot be 0 (use -1 for all CPUs)")

    start = time.perf_counter()
    logger.info(
        f"Scenario '{cfg.label}': n={cfg.n}, N={cfg.N}, "
        f"B={cfg.permutations}, mode={cfg.mode.value}, seed={cfg.seed}, stream={cfg.stream}"
    )

    worker = _warp_speed_block if cfg.mode == Mode.WARP_SPEED else _full_bootstrap_block
    parts = Parallel(n_jobs=jobs)(delayed(worker)(cfg, block) for block in _blocks(cfg.N))
    values = np.concatenate(parts, axis=0)

    entries = []
    for s, spec in enumerate(cfg.statistics):
        if cfg.mode == Mode.WARP_SPEED:
            count = warp_speed_rejections(values[:, s, 0], values[:, s, 1], cfg.alpha, spec.two_sided)
        else:
            count = int(values[:, s].sum())
        entries.append(PowerEntry(cfg.label, spec.label, count, cfg.N))

    meta = ScenarioMeta(
        label=cfg.label,
        model=str(cfg.model),
        n=cfg.n,
        mode=cfg.mode.value,
        alpha=cfg.alpha,
        replicates=cfg.N,
        permutations=cfg.permutations,
        seed=cfg.seed,
        stream=cfg.stream
    )
    runtime = time.perf_counter() - start
    logger.info(
        f"Scenario '{cfg.label}' finished in {runtime:.1f}s: "
        + ", ".join(f"{e.statistic}={e.rate:.4f}" for e in entries)
    )
    return PowerTable(name=cfg.label, entries=entries, scenarios=[meta], runtime=runtime)


def run_study(scenarios: Sequence[ScenarioConfig], jobs: int = 1, name: str = "study") -> PowerTable:
    """Run several scenarios in order and collect them into one table"""
    if not scenarios:
        raise ConfigurationError("Study has no scenarios")
    table = PowerTable(name=name)
    for index, cfg in enumerate(scenarios):
        table.extend(run_power_study(replace(cfg, stream=index), jobs=jobs))
    logger.info(f"Study '{name}' finished: {len(scenarios)} scenario(s) in {table.runtime:.1f}s")
    return table


def emit_table(table: PowerTable, fmt: str = "text") -> str:
    """Render a power table as aligned text (percentages) or csv (full precision)

    Raises:
        ConfigurationError: On an empty table or unknown format
    """
    if table.is_empty:
        raise ConfigurationError("Cannot emit an empty power table")
    if fmt == "csv":
        return _emit_csv(table)
    if fmt == "text":
        return _emit_text(table)
    raise ConfigurationError(f"Unknown table format '{fmt}' (expected text or csv)")


def _emit_text(table: PowerTable) -> str:
    columns = table.statistic_labels
    cells = {(e.scenario, e.statistic): str(e.percent) for e in table.entries}
    rows = [[meta.label] + [cells.get((meta.label, c), "-") for c in columns] for meta in table.scenarios]
    header = ["Model"] + columns

    widths = [max(len(r[i]) for r in rows + [header]) for i in range(len(header))]

    def fmt_row(row: List[str]) -> str:
        first = row[0].ljust(widths[0])
        rest = [cell.rjust(widths[i + 1]) for i, cell in enumerate(row[1:])]
        return "  ".join([first] + rest).rstrip()

    lines = [fmt_row(header), "-" * len(fmt_row(header))]
    lines.extend(fmt_row(r) for r in rows)
    lines.append("")
    for meta in table.scenarios:
        lines.append(
            f"# {meta.label}: n={meta.n} alpha={meta.alpha:g} N={meta.replicates} "
            f"B={meta.permutations} mode={meta.mode} seed={meta.seed} stream={meta.stream}"
        )
    return "\n".join(lines) + "\n"


def _emit_csv(table: PowerTable) -> str:
    meta = {m.label: m for m in table.scenarios}
    records = []
    for e in table.entries:
        m = meta[e.scenario]
        records.append({
            'scenario': e.scenario,
            'model': m.model,
            'n': m.n,
            'statistic': e.statistic,
            'rate': e.rate,
            'rejections': e.rejections,
            'replicates': e.replicates,
            'permutations': m.permutations,
            'alpha': m.alpha,
            'mode': m.mode,
            'seed': m.seed,
            'stream': m.stream,
        })
    return pd.DataFrame.from_records(records).to_csv(index=False, lineterminator="\n")


def read_table_csv(source: Union[str, Path]) -> Dict[Tuple[str, str], float]:
    """Rates keyed by (scenario, statistic) from csv text or a csv file

    Raises:
        InputError: If required columns are missing
    """
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source):
        frame = pd.read_csv(source)
    else:
        frame = pd.read_csv(io.StringIO(source))
    missing = {'scenario', 'statistic', 'rate'} - set(frame.columns)
    if missing:
        raise InputError(f"Power table csv is missing columns: {', '.join(sorted(missing))}")
    return {
        (str(row.scenario), str(row.statistic)): float(row.rate)
        for row in frame.itertuples(index=False)
    }
