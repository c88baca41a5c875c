"""Core configuration and utilities."""

from src.core.configs import Settings, settings
from src.core.errors import (
    ChartError,
    DegeneracyError,
    DirectSumError,
    InconsistentFamilyError,
    InconsistentStructureError,
    InputError,
    ReconstructionError,
    TwistorError,
    UnknownModelError,
)
from src.core.logging import setup_logging

__all__ = [
    "ChartError",
    "DegeneracyError",
    "DirectSumError",
    "InconsistentFamilyError",
    "InconsistentStructureError",
    "InputError",
    "ReconstructionError",
    "Settings",
    "TwistorError",
    "UnknownModelError",
    "settings",
    "setup_logging",
]
