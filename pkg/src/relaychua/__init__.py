"""Event-driven simulation and analysis of the piecewise-continuous
Matsumoto-Chua relay system.

    x1' = -beta * x2
    x2' = x1 - x2 + x3
    x3' = alpha * (x2 - x3 + sgn(x3))
"""

from .core import (
    DomainError,
    Params,
    PhysicalParams,
    SwitchingSurfaceError,
    equilibrium,
    params_from_physical,
    reflect,
    vector_field,
)
from .spectrum import SpectrumReport, spectrum_report, theorem_region
from .surface import SurfaceClassification, SurfaceTag, classify_point
from .flow import IntegratorConfig, Method, Trajectory, affine_flow, integrate
from .poincare import CycleResult, SectionPoint, find_cycle, first_return

__all__ = [
    "DomainError",
    "SwitchingSurfaceError",
    "Params",
    "PhysicalParams",
    "params_from_physical",
    "vector_field",
    "reflect",
    "equilibrium",
    "SpectrumReport",
    "spectrum_report",
    "theorem_region",
    "SurfaceClassification",
    "SurfaceTag",
    "classify_point",
    "IntegratorConfig",
    "Method",
    "Trajectory",
    "affine_flow",
    "integrate",
    "CycleResult",
    "SectionPoint",
    "find_cycle",
    "first_return",
]

__version__ = "0.1.0"
