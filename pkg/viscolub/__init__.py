"""Thin-film limit of viscoelastic (Oldroyd) lubrication flows.

The reduced problem is solved in four layers: the constitutive inverse ``psi``, the closure
``K(h, q, s)``, the generalized Reynolds problem for the pressure gradient, and the
reconstruction of velocity and stress fields, with a validation layer on top.
"""

from __future__ import annotations

from loguru import logger

from viscolub.config import RunConfig, SolverChoice, dump_config, parse_config
from viscolub.constitutive import (
    FluidParams,
    phi,
    phi_prime,
    psi,
    psi_prime,
    sigma12_of_shear,
    sigma12_slope,
    sigma_diag_of_shear,
    stress_antiderivative,
)
from viscolub.errors import ViscolubError
from viscolub.fields import (
    LimitFields,
    ResidualReport,
    build_fields,
    flux_spread,
    reconstruct_stress,
    reconstruct_u1,
    reconstruct_u2,
    rescale_to_epsilon,
    residual_limit_system,
    shear_profile,
)
from viscolub.kappa import KappaQuery, closure_moments, dk_dh, dk_dq, f_eval, gap_flux, kappa_solve
from viscolub.reynolds import (
    GapKind,
    GapProfile,
    PressureSolution,
    SolverMethod,
    assemble_pressure,
    flux_residual,
    solve_q_ode,
    solve_q_pointwise,
    u_eval,
    v_eval,
)
from viscolub.validate import (
    ValidationReport,
    check_brackets,
    check_smallness,
    oracle_couette,
    oracle_newtonian,
    run_all,
    solve_case,
)


__all__ = [
    "FluidParams",
    "GapKind",
    "GapProfile",
    "KappaQuery",
    "LimitFields",
    "PressureSolution",
    "ResidualReport",
    "RunConfig",
    "SolverChoice",
    "SolverMethod",
    "ValidationReport",
    "ViscolubError",
    "assemble_pressure",
    "build_fields",
    "check_brackets",
    "check_smallness",
    "closure_moments",
    "dk_dh",
    "dk_dq",
    "dump_config",
    "f_eval",
    "flux_residual",
    "flux_spread",
    "gap_flux",
    "kappa_solve",
    "logger",
    "oracle_couette",
    "oracle_newtonian",
    "parse_config",
    "phi",
    "phi_prime",
    "psi",
    "psi_prime",
    "reconstruct_stress",
    "reconstruct_u1",
    "reconstruct_u2",
    "rescale_to_epsilon",
    "residual_limit_system",
    "run_all",
    "shear_profile",
    "sigma12_of_shear",
    "sigma12_slope",
    "sigma_diag_of_shear",
    "solve_case",
    "solve_q_ode",
    "solve_q_pointwise",
    "stress_antiderivative",
    "u_eval",
    "v_eval",
]
