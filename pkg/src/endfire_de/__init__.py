"""Analytical modeling and differential-evolution design of end-fire dipole arrays."""

from .de import DEConfig, InitializationError, OptimizationTrace, optimize
from .em import ENDFIRE, Direction, ModelParams, mutual_impedance, self_impedance
from .model import ArrayLayout, InfeasibleDesign, PerformanceReport, evaluate
from .workflows import (
    DesignResult,
    SensitivitySpec,
    design_parasitic,
    optimize_active,
    optimize_parasitic,
    pattern_export,
    sensitivity,
    ula_baseline,
)

__version__ = "0.1.0"

__all__ = [
    "ArrayLayout",
    "DEConfig",
    "DesignResult",
    "Direction",
    "ENDFIRE",
    "InfeasibleDesign",
    "InitializationError",
    "ModelParams",
    "OptimizationTrace",
    "PerformanceReport",
    "SensitivitySpec",
    "design_parasitic",
    "evaluate",
    "mutual_impedance",
    "optimize",
    "optimize_active",
    "optimize_parasitic",
    "pattern_export",
    "self_impedance",
    "sensitivity",
    "ula_baseline",
]
