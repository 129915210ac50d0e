"""BQR Configuration Module"""

from bqr.config.config_loader import ConfigLoader
from bqr.config.fit_config import (
    BandwidthRule,
    CalibrationSpec,
    DiagnoseConfig,
    FitConfig,
    KdeSpec,
    KlMode,
    PriorSpec,
    ProbRule,
    RunManifest,
    ScenarioSpec,
)
from bqr.config.settings import BQRSettings, get_settings

__all__ = [
    "BQRSettings",
    "BandwidthRule",
    "CalibrationSpec",
    "ConfigLoader",
    "DiagnoseConfig",
    "FitConfig",
    "KdeSpec",
    "KlMode",
    "PriorSpec",
    "ProbRule",
    "RunManifest",
    "ScenarioSpec",
    "get_settings",
]
