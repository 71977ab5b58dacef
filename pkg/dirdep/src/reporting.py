"""Report models for CLI output

Pydantic models give the `--json` output a fixed, documented schema; the
plain-text renderers print the same fields for humans.
"""

from typing import List, Optional

from pydantic import BaseModel, Field

import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from shared.models import StatisticSpec, TestResult

from .harness import PowerTable


class PermutationTestReport(BaseModel):
    """Outcome of `dirdep test`"""
    source: str = Field(..., description="Data file path or embedded dataset name")
    statistic_name: str = Field(..., description="Statistic identifier, e.g. dcor:energy:1")
    label: str = Field(..., description="Table label of the statistic, e.g. D_1")
    statistic: float = Field(..., description="Observed statistic")
    p_value: float = Field(..., ge=0.0, le=1.0, description="(1 + exceed_count) / (B + 1)")
    p_fraction: str = Field(..., description="Exact p-value as (1+k)/(B+1)")
    exceed_count: int = Field(..., ge=0, description="Permuted statistics >= observed")
    B: int = Field(..., ge=1, description="Number of permutations")
    n: int = Field(..., ge=1, description="Sample size")
    seed: int = Field(..., ge=0, description="Master seed of the permutation stream")

    @classmethod
    def from_result(cls, result: TestResult, spec: StatisticSpec, source: str) -> 'PermutationTestReport':
        return cls(
            source=source,
            statistic_name=spec.spec,
            label=spec.label,
            statistic=result.statistic,
            p_value=result.p_value,
            p_fraction=result.fraction,
            exceed_count=result.exceed_count,
            B=result.B,
            n=result.n,
            seed=result.seed
        )

    def to_text(self) -> str:
        rows = [
            ("data", self.source),
            ("statistic", f"{self.label} ({self.statistic_name})"),
            ("value", f"{self.statistic:.6g}"),
            ("p-value", f"{self.p_value:.4f} ({self.p_fraction})"),
            ("B", str(self.B)),
            ("n", str(self.n)),
            ("seed", str(self.seed)),
        ]
        width = max(len(k) for k, _ in rows) + 1
        return "\n".join(f"{(k + ':').ljust(width)} {v}" for k, v in rows) + "\n"


class PowerCellReport(BaseModel):
    scenario: str
    statistic: str
    rate: float = Field(..., ge=0.0, le=1.0)
    rejections: int = Field(..., ge=0)
    replicates: int = Field(..., ge=1)


class ScenarioReport(BaseModel):
    label: str
    model: str
    n: int
    mode: str
    alpha: float
    replicates: int
    permutations: int
    seed: int
    stream: int = 0


class PowerReport(BaseModel):
    """Outcome of `dirdep power`"""
    name: str
    runtime_seconds: float
    csv_path: Optional[str] = None
    text_path: Optional[str] = None
    scenarios: List[ScenarioReport]
    cells: List[PowerCellReport]

    @classmethod
    def from_table(cls, table: PowerTable, csv_path: Optional[str] = None,
                   text_path: Optional[str] = None) -> 'PowerReport':
        return cls(
            name=table.name,
            runtime_seconds=round(table.runtime, 3),
            csv_path=csv_path,
            text_path=text_path,
            scenarios=[ScenarioReport(**vars(m)) for m in table.scenarios],
            cells=[
                PowerCellReport(
                    scenario=e.scenario,
                    statistic=e.statistic,
                    rate=e.rate,
                    rejections=e.rejections,
                    replicates=e.replicates
                )
                for e in table.entries
            ]
        )
