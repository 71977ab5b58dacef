"""Configuration loader for dirdep

This module provides functionality to load YAML and JSON configuration
files: the application config (defaults and logging) and the raw content
of Monte Carlo study files, which dirdep's config parser turns into
scenarios.
"""

import json
import os
from pathlib import Path
from typing import Dict, Any, Optional

import yaml
from dotenv import load_dotenv

from .errors import ConfigurationError
from .models import AppConfig, LoggingConfig, RunDefaults


VALID_LOG_LEVELS = {'DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'}

JSON_SUFFIXES = {'.json', '.cfg'}
YAML_SUFFIXES = {'.yaml', '.yml'}


class ConfigLoader:
    """Loads and validates YAML/JSON configuration files"""

    @staticmethod
    def _check_path(file_path: str) -> Path:
        path = Path(file_path)

        if not path.exists():
            raise ConfigurationError(f"Configuration file not found: {file_path}")

        if not path.is_file():
            raise ConfigurationError(f"Configuration path is not a file: {file_path}")

        return path

    @staticmethod
    def load_yaml(file_path: str) -> Dict[str, Any]:
        """Load YAML file and return parsed content

        Args:
            file_path: Path to YAML file

        Returns:
            Parsed YAML content as dictionary

        Raises:
            ConfigurationError: If file cannot be read or parsed
        """
        path = ConfigLoader._check_path(file_path)

        try:
            with open(path, 'r', encoding='utf-8') as f:
                content = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ConfigurationError(
                f"Failed to parse YAML file {file_path}: {str(e)}"
            )
        except OSError as e:
            raise ConfigurationError(
                f"Failed to read configuration file {file_path}: {str(e)}"
            )

        if content is None:
            raise ConfigurationError(f"Configuration file is empty: {file_path}")

        if not isinstance(content, dict):
            raise ConfigurationError(
                f"Configuration file must contain a YAML dictionary: {file_path}"
            )

        return content

    @staticmethod
    def load_json(file_path: str) -> Dict[str, Any]:
        """Load JSON file and return parsed content

        Args:
            file_path: Path to JSON file

        Returns:
            Parsed JSON content as dictionary

        Raises:
            ConfigurationError: If file cannot be read or parsed
        """
        path = ConfigLoader._check_path(file_path)

        try:
            with open(path, 'r', encoding='utf-8') as f:
                text = f.read()
        except OSError as e:
            raise ConfigurationError(
                f"Failed to read configuration file {file_path}: {str(e)}"
            )

        if not text.strip():
            raise ConfigurationError(f"Configuration file is empty: {file_path}")

        try:
            content = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigurationError(
                f"Failed to parse JSON file {file_path}: {str(e)}"
            )

        if not isinstance(content, dict):
            raise ConfigurationError(
                f"Configuration file must contain a JSON object: {file_path}"
            )

        return content

    @staticmethod
    def load_file(file_path: str) -> Dict[str, Any]:
        """Load a configuration file, picking the format from the extension

        `.json` and `.cfg` are JSON; `.yaml` and `.yml` are YAML.

        Raises:
            ConfigurationError: If the format is unsupported or loading fails
        """
        suffix = Path(file_path).suffix.lower()

        if suffix in JSON_SUFFIXES:
            return ConfigLoader.load_json(file_path)
        if suffix in YAML_SUFFIXES:
            return ConfigLoader.load_yaml(file_path)

        raise ConfigurationError(
            f"Unsupported file format: {suffix or '(none)'} for {file_path}. "
            f"Supported formats: .json, .cfg, .yaml, .yml"
        )

    @staticmethod
    def load_app_config(file_path: Optional[str] = None) -> AppConfig:
        """Load the application configuration

        Expected YAML structure:
        ```yaml
        defaults:
          bootstrap: 1000
          seed: 20240531
          jobs: 1
          kernel: "energy:1"
        logging:
          level: "INFO"
          format: "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
          file: null
        ```

        Both sections are optional. `.env` files are honoured: DIRDEP_JOBS
        overrides defaults.jobs and DIRDEP_LOG_LEVEL overrides logging.level.

        Args:
            file_path: Path to the YAML file, or None for built-in defaults

        Returns:
            AppConfig object

        Raises:
            ConfigurationError: If configuration is invalid
        """
        load_dotenv()

        config_data: Dict[str, Any] = {}
        if file_path is not None:
            config_data = ConfigLoader.load_file(file_path)

        defaults_data = config_data.get('defaults', {}) or {}
        logging_data = config_data.get('logging', {}) or {}

        if not isinstance(defaults_data, dict):
            raise ConfigurationError(f"'defaults' section must be a dictionary in {file_path}")
        if not isinstance(logging_data, dict):
            raise ConfigurationError(f"'logging' section must be a dictionary in {file_path}")

        builtin = RunDefaults()
        try:
            defaults = RunDefaults(
                bootstrap=int(defaults_data.get('bootstrap', builtin.bootstrap)),
                seed=int(defaults_data.get('seed', builtin.seed)),
                jobs=int(os.getenv('DIRDEP_JOBS', defaults_data.get('jobs', builtin.jobs))),
                kernel=str(defaults_data.get('kernel', builtin.kernel))
            )
        except (ValueError, TypeError) as e:
            raise ConfigurationError(
                f"Invalid data type in defaults configuration: {str(e)}"
            )

        if defaults.bootstrap < 1:
            raise ConfigurationError(
                f"defaults.bootstrap must be positive, got {defaults.bootstrap}"
            )

        if defaults.seed < 0:
            raise ConfigurationError(
                f"defaults.seed must be nonnegative, got {defaults.seed}"
            )

        if defaults.jobs == 0:
            raise ConfigurationError("defaults.jobs cannot be 0 (use -1 for all CPUs)")

        builtin_logging = LoggingConfig()
        log_config = LoggingConfig(
            level=str(os.getenv('DIRDEP_LOG_LEVEL', logging_data.get('level', builtin_logging.level))).upper(),
            format=str(logging_data.get('format', builtin_logging.format)),
            file=logging_data.get('file')
        )

        if log_config.level not in VALID_LOG_LEVELS:
            raise ConfigurationError(
                f"logging.level must be one of {', '.join(sorted(VALID_LOG_LEVELS))}, "
                f"got {log_config.level}"
            )

        return AppConfig(defaults=defaults, logging=log_config)


# Convenience functions
def load_app_config(file_path: Optional[str] = None) -> AppConfig:
    """Load the application configuration

    Args:
        file_path: Path to dirdep.yaml, or None for built-in defaults

    Returns:
        AppConfig object
    """
    return ConfigLoader.load_app_config(file_path)


def load_config_file(file_path: str) -> Dict[str, Any]:
    """Load a JSON or YAML configuration file into a dictionary"""
    return ConfigLoader.load_file(file_path)
