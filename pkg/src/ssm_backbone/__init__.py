"""Reduced-order forced-response and backbone-curve analysis.

Reduces a forced, damped, nonlinear mechanical system to the
two-dimensional invariant manifold of a chosen vibration mode and evaluates
response amplitudes, phases, stability regions, backbone curves and
harmonic content in closed form, verified against a shooting/continuation
periodic-orbit oracle.
"""

from ._accel import USING_NUMBA
from .forced import ForcedSSM, QuasiPeriodicCorrection, quasiperiodic_correction, resonant_correction
from .manifold import (
    DiagonalizedNonlinearity,
    SlowDynamics,
    SSMCoefficients,
    compute_ssm_general,
    compute_ssm_order3,
    diagonalize_nonlinearity,
    invariance_residual,
    slow_dynamics,
)
from .model import (
    BUILTIN_NAMES,
    FirstOrderSystem,
    ForcingDefinition,
    MechanicalSystem,
    builtin_model,
    evaluate_field,
    first_order_form,
    validate_model,
)
from .model_io import ModelFormatError, model_hash, parse_model, serialize_model
from .oracle import Branch, PeriodicOrbit, continue_branch, find_periodic_orbit, harmonic_amplitudes, integrate
from .pipeline import ReducedModel, build_reduced
from .polyfield import PolynomialField
from .response import (
    BackbonePoint,
    FRFBranch,
    HarmonicSpectrum,
    ResponsePoint,
    StabilityBoundaries,
    backbone_curve,
    coordinate_amplitude,
    frf_sweep,
    max_amplitude,
    modal_amplitude,
    phase_shift,
    physical_harmonics,
    response_amplitudes,
    stability,
    stability_boundaries,
)
from .spectral import (
    ResonanceReport,
    Spectrum,
    check_nonresonance,
    compute_spectrum,
    normalize_for_imaginary_rc,
    spectral_quotient,
)

__version__ = "0.1.0"

__all__ = [
    "USING_NUMBA",
    "__version__",
    "PolynomialField",
    "MechanicalSystem",
    "ForcingDefinition",
    "FirstOrderSystem",
    "first_order_form",
    "validate_model",
    "builtin_model",
    "evaluate_field",
    "BUILTIN_NAMES",
    "Spectrum",
    "ResonanceReport",
    "compute_spectrum",
    "normalize_for_imaginary_rc",
    "spectral_quotient",
    "check_nonresonance",
    "DiagonalizedNonlinearity",
    "SSMCoefficients",
    "SlowDynamics",
    "diagonalize_nonlinearity",
    "compute_ssm_order3",
    "compute_ssm_general",
    "invariance_residual",
    "slow_dynamics",
    "QuasiPeriodicCorrection",
    "ForcedSSM",
    "quasiperiodic_correction",
    "resonant_correction",
    "ResponsePoint",
    "BackbonePoint",
    "FRFBranch",
    "HarmonicSpectrum",
    "StabilityBoundaries",
    "response_amplitudes",
    "phase_shift",
    "stability",
    "backbone_curve",
    "max_amplitude",
    "frf_sweep",
    "stability_boundaries",
    "physical_harmonics",
    "modal_amplitude",
    "coordinate_amplitude",
    "PeriodicOrbit",
    "Branch",
    "integrate",
    "find_periodic_orbit",
    "continue_branch",
    "harmonic_amplitudes",
    "ReducedModel",
    "build_reduced",
    "parse_model",
    "serialize_model",
    "model_hash",
    "ModelFormatError",
]
