"""Emergent algebras: scale-indexed dilation families and their limits."""

from . import core, groupoid, limits, models, scale
from .core import (
    CheckReport,
    DilationModel,
    approx_diff,
    approx_inv,
    approx_sum,
    blue_construction,
    bullet,
    op,
)
from .errors import (
    CarrierError,
    CompositionError,
    ConfigError,
    DomainError,
    EmergentError,
    IncompatibleScaleError,
    NetError,
    NonLocalIntermediateError,
)
from .groupoid import Arrow, deformed_dif, dif_arrows, dilate_arrow
from .limits import conical_group_check, estimate_limit, gromov_differential, uniformity_probe
from .models import MODELS, build_model, list_models
from .scale import AbsoluteNet, ScaleElement, ScaleKind, as_scale, default_net

__version__ = "0.1.0"

__all__ = [
    "core", "groupoid", "limits", "models", "scale",
    "CheckReport", "DilationModel", "approx_diff", "approx_inv", "approx_sum",
    "blue_construction", "bullet", "op",
    "CarrierError", "CompositionError", "ConfigError", "DomainError", "EmergentError",
    "IncompatibleScaleError", "NetError", "NonLocalIntermediateError",
    "Arrow", "deformed_dif", "dif_arrows", "dilate_arrow",
    "conical_group_check", "estimate_limit", "gromov_differential", "uniformity_probe",
    "MODELS", "build_model", "list_models",
    "AbsoluteNet", "ScaleElement", "ScaleKind", "as_scale", "default_net",
]
