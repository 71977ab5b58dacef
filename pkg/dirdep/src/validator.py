"""Study configuration validator

This module provides the StudyValidator class that checks a parsed study
file (study defaults plus scenario list) for completeness and correctness
before any Monte Carlo work starts. Every problem is collected, with the
offending field named, rather than stopping at the first one.
"""

import logging
from typing import Any, Dict, List, Optional, Set

import numpy as np

import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from shared.errors import ConfigurationError
from shared.models import StatisticSpec, ValidationResult

from .harness import Mode, check_statistics_for_model
from .model_spec import ModelSpec, parse_model
from .statistics import parse_statistic


logger = logging.getLogger(__name__)


class StudyValidator:
    """Validator for study files

    Validation rules:
    - `study` must be a mapping with known keys only
    - `scenarios` must be a non-empty list of mappings with a `model` string
    - alpha in (0, 1); n >= 2; replicates, bootstrap >= 1; seed >= 0
    - mode is full_bootstrap or warp_speed
    - statistics parse, are non-empty and fit the model's data type
    - no duplicate scenario labels
    """

    STUDY_KEYS = {'name', 'n', 'alpha', 'replicates', 'bootstrap', 'mode', 'seed', 'statistics', 'description'}
    SCENARIO_KEYS = {'model', 'label', 'n', 'mode', 'statistics', 'alpha'}

    def validate_study(self, data: Dict[str, Any]) -> ValidationResult:
        """Validate a whole study document

        Args:
            data: Parsed study file content

        Returns:
            ValidationResult listing every problem found
        """
        result = ValidationResult(valid=True, scenario=None)

        if not isinstance(data, dict):
            result.add_error("Study file must contain a mapping at the top level")
            return result

        for key in sorted(set(data) - {'study', 'scenarios'}):
            result.add_error(f"Unknown top-level field '{key}'")

        study = data.get('study', {})
        if not isinstance(study, dict):
            result.add_error("'study' must be a mapping")
            study = {}
        self._validate_study_section(study, result)

        scenarios = data.get('scenarios')
        if scenarios is None:
            result.add_error("Missing required field 'scenarios'")
            return result
        if not isinstance(scenarios, list) or not scenarios:
            result.add_error("'scenarios' must be a non-empty list")
            return result

        labels_seen: Set[str] = set()
        for idx, scenario in enumerate(scenarios):
            label = self._validate_scenario(idx, scenario, study, result)
            if label is None:
                continue
            if label in labels_seen:
                result.add_error(f"scenarios[{idx}]: duplicate scenario label '{label}'")
            labels_seen.add(label)

        if not result.valid:
            logger.debug(f"Study validation found {len(result.errors)} problem(s)")
        return result

    def _validate_study_section(self, study: Dict[str, Any], result: ValidationResult) -> None:
        for key in sorted(set(study) - self.STUDY_KEYS):
            result.add_error(f"Unknown field 'study.{key}'")

        if 'name' in study and not isinstance(study['name'], str):
            result.add_error("'study.name' must be a string")
        if 'n' in study:
            self._check_int(study['n'], 'study.n', 2, result)
        if 'replicates' in study:
            self._check_int(study['replicates'], 'study.replicates', 1, result)
        if 'bootstrap' in study:
            self._check_int(study['bootstrap'], 'study.bootstrap', 1, result)
        if 'seed' in study:
            self._check_int(study['seed'], 'study.seed', 0, result)
        if 'alpha' in study:
            self._check_alpha(study['alpha'], 'study.alpha', result)
        if 'mode' in study:
            self._check_mode(study['mode'], 'study.mode', result)
        if 'statistics' in study:
            self._parse_statistics(study['statistics'], 'study.statistics', result)

    def _validate_scenario(self, idx: int, scenario: Any, study: Dict[str, Any],
                           result: ValidationResult) -> Optional[str]:
        where = f"scenarios[{idx}]"
        if not isinstance(scenario, dict):
            result.add_error(f"{where} must be a mapping")
            return None

        for key in sorted(set(scenario) - self.SCENARIO_KEYS):
            result.add_error(f"Unknown field '{where}.{key}'")

        model: Optional[ModelSpec] = None
        text = scenario.get('model')
        if not isinstance(text, str) or not text.strip():
            result.add_error(f"{where}.model is required and must be a non-empty string")
        else:
            try:
                model = parse_model(text)
            except ConfigurationError as e:
                result.add_error(f"{where}.model: {e}")

        label = scenario.get('label', text)
        if 'label' in scenario and (not isinstance(label, str) or not label.strip()):
            result.add_error(f"{where}.label must be a non-empty string")
            label = None

        if 'n' in scenario:
            self._check_int(scenario['n'], f"{where}.n", 2, result)
        elif 'n' not in study:
            result.add_error(f"{where}.n is not set and 'study.n' gives no default")

        if 'mode' in scenario:
            self._check_mode(scenario['mode'], f"{where}.mode", result)
        if 'alpha' in scenario:
            self._check_alpha(scenario['alpha'], f"{where}.alpha", result)

        if 'statistics' in scenario:
            specs = self._parse_statistics(scenario['statistics'], f"{where}.statistics", result)
        elif 'statistics' in study:
            specs = self._parse_statistics(study['statistics'], 'study.statistics', ValidationResult(valid=True))
        else:
            result.add_error(f"{where}.statistics is not set and 'study.statistics' gives no default")
            specs = []

        if model is not None and specs:
            for problem in check_statistics_for_model(model, specs):
                result.add_error(f"{where}.statistics: {problem}")

        return label.strip() if isinstance(label, str) else None

    @staticmethod
    def _check_int(value: Any, field: str, minimum: int, result: ValidationResult) -> None:
        if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
            result.add_error(f"'{field}' must be an integer, got {value!r}")
        elif value < minimum:
            result.add_error(f"'{field}' must be at least {minimum}, got {value}")

    @staticmethod
    def _check_alpha(value: Any, field: str, result: ValidationResult) -> None:
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not 0.0 < value < 1.0:
            result.add_error(f"'{field}' must be a number in (0, 1), got {value!r}")

    @staticmethod
    def _check_mode(value: Any, field: str, result: ValidationResult) -> None:
        valid = [m.value for m in Mode]
        if value not in valid:
            result.add_error(f"'{field}' must be one of {', '.join(valid)}, got {value!r}")

    @staticmethod
    def _parse_statistics(value: Any, field: str, result: ValidationResult) -> List[StatisticSpec]:
        if not isinstance(value, list) or not value:
            result.add_error(f"'{field}' must be a non-empty list of statistic identifiers")
            return []
        specs = []
        for i, item in enumerate(value):
            try:
                specs.append(parse_statistic(item))
            except ConfigurationError as e:
                result.add_error(f"'{field}[{i}]': {e}")
        labels = [s.label for s in specs]
        if len(set(labels)) != len(labels):
            result.add_error(f"'{field}' lists a statistic twice")
        return specs
