"""Exact ellipsoidal solutions of the compressible Euler/Navier-Stokes system.

Thin python surface over the C++ core: profile evaluation, scale-factor
dynamics with blowup classification, residual verification and the
finite-volume cross-check.
"""

from ._core import (
    BoundaryError,
    BreakdownError,
    Classification,
    ConfigError,
    EmdenState,
    FieldSample,
    FvLevelResult,
    FvRunReport,
    InputError,
    ModelParams,
    QuadratureSpec,
    SupportGeometry,
    Termination,
    Trajectory,
    UnsupportedRegimeError,
    classify,
    emden_rhs,
    energies,
    evaluate_field,
    fit_convergence_order,
    fv_run,
    integrate,
    profile_derivative,
    profile_value,
    residual_mass_exact,
    residual_momentum_exact,
    run_classify_sweep,
    run_field,
    run_integrate,
    run_mass_check,
    run_verify_residual,
    s_variable,
    scalar_emden_rhs,
    support_geometry,
    total_mass,
    touchdown_time_quadrature,
)

__all__ = [
    "BoundaryError",
    "BreakdownError",
    "Classification",
    "ConfigError",
    "EmdenState",
    "FieldSample",
    "FvLevelResult",
    "FvRunReport",
    "InputError",
    "ModelParams",
    "QuadratureSpec",
    "SupportGeometry",
    "Termination",
    "Trajectory",
    "UnsupportedRegimeError",
    "classify",
    "emden_rhs",
    "energies",
    "evaluate_field",
    "fit_convergence_order",
    "fv_run",
    "integrate",
    "profile_derivative",
    "profile_value",
    "residual_mass_exact",
    "residual_momentum_exact",
    "run_classify_sweep",
    "run_field",
    "run_integrate",
    "run_mass_check",
    "run_verify_residual",
    "s_variable",
    "scalar_emden_rhs",
    "support_geometry",
    "total_mass",
    "touchdown_time_quadrature",
]
