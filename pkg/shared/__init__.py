"""Shared modules

Data models, error types and the configuration loader used by the
dirdep library, its CLI and its test suites.
"""

__version__ = "0.1.0"

from .errors import (
    DirdepError,
    InputError,
    ConfigurationError,
    DegenerateMarginalError,
    SamplerError
)

from .models import (
    SampleKind,
    AngleVector,
    DirectionalSample,
    KernelType,
    Kernel,
    GramMatrix,
    StatValue,
    StatisticName,
    StatisticSpec,
    TestResult,
    PairedSample,
    ValidationResult,
    RunDefaults,
    LoggingConfig,
    AppConfig
)

from .config_loader import (
    ConfigLoader,
    load_app_config,
    load_config_file
)

__all__ = [
    'DirdepError',
    'InputError',
    'ConfigurationError',
    'DegenerateMarginalError',
    'SamplerError',
    'SampleKind',
    'AngleVector',
    'DirectionalSample',
    'KernelType',
    'Kernel',
    'GramMatrix',
    'StatValue',
    'StatisticName',
    'StatisticSpec',
    'TestResult',
    'PairedSample',
    'ValidationResult',
    'RunDefaults',
    'LoggingConfig',
    'AppConfig',
    'ConfigLoader',
    'load_app_config',
    'load_config_file'
]
