"""Study file parser

This module provides the StudyParser class that loads a study file
(JSON, usually with the `.cfg` extension; YAML also accepted), validates
it and turns it into an ordered list of ScenarioConfig objects.

Expected structure:

```json
{
  "study": {
    "name": "table1_desk",
    "n": 20,
    "alpha": 0.05,
    "replicates": 500,
    "bootstrap": 200,
    "mode": "full_bootstrap",
    "seed": 20240531,
    "statistics": ["ccor", "trig:1", "dcor:energy:1", "dcor:ratio"]
  },
  "scenarios": [
    {"model": "VM(0,1) x VM(pi,0.1)"},
    {"model": "BvM(1)", "label": "BvM(1)"},
    {"model": "VMC(2)", "mode": "warp_speed", "statistics": ["dcor:energy:0.25"]}
  ]
}
```
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional

import sys
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from shared.config_loader import ConfigLoader
from shared.errors import ConfigurationError
from shared.models import RunDefaults

from .harness import Mode, ScenarioConfig
from .model_spec import parse_model
from .statistics import parse_statistic
from .validator import StudyValidator


logger = logging.getLogger(__name__)


@dataclass
class StudyConfig:
    """A parsed study: a name and its scenarios in file order"""
    name: str
    scenarios: List[ScenarioConfig]


class StudyParser:
    """Parser for study files

    Study-level values are defaults for every scenario; scenario-level
    `n`, `mode`, `alpha` and `statistics` override them. Missing
    `replicates`, `bootstrap` and `seed` fall back to the run defaults of
    the application config.
    """

    def __init__(self, defaults: Optional[RunDefaults] = None):
        self.defaults = defaults or RunDefaults()
        self.validator = StudyValidator()

    def load_study(self, config_path: str, seed: Optional[int] = None) -> StudyConfig:
        """Load, validate and build a study

        Args:
            config_path: Path to the study file
            seed: Optional override of the study seed

        Returns:
            StudyConfig with one ScenarioConfig per scenario

        Raises:
            ConfigurationError: If the file is missing, unreadable or invalid;
                the message lists every offending field
        """
        data = ConfigLoader.load_file(config_path)
        return self.build_study(data, source=config_path, seed=seed)

    def build_study(self, data: Dict[str, Any], source: str = "<study>",
                    seed: Optional[int] = None) -> StudyConfig:
        result = self.validator.validate_study(data)
        if not result.valid:
            raise ConfigurationError(
                f"Invalid study file {source}:\n  - " + "\n  - ".join(result.errors)
            )

        study = data.get('study', {})
        name = study.get('name', Path(source).stem)
        master_seed = seed if seed is not None else study.get('seed', self.defaults.seed)

        scenarios = []
        for scenario in data['scenarios']:
            text = scenario['model']
            statistics = scenario.get('statistics', study.get('statistics'))
            scenarios.append(ScenarioConfig(
                label=scenario.get('label', text).strip(),
                model=parse_model(text),
                n=scenario.get('n', study.get('n')),
                statistics=tuple(parse_statistic(s) for s in statistics),
                alpha=float(scenario.get('alpha', study.get('alpha', 0.05))),
                N=study.get('replicates', 2000),
                B=study.get('bootstrap', self.defaults.bootstrap),
                mode=Mode(scenario.get('mode', study.get('mode', Mode.FULL_BOOTSTRAP.value))),
                seed=master_seed
            ))

        logger.info(f"Loaded study '{name}' with {len(scenarios)} scenario(s) from {source}")
        return StudyConfig(name=name, scenarios=scenarios)
