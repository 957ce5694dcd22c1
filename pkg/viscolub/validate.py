"""Checks of every a-priori property of the limit solution, collected into one report.

Hard checks decide the verdict. Soft checks (the smallness hypotheses of the convergence result
and the kappa-slope bracket) are reported and logged as warnings only: they certify when the
thin-film limit is a good approximation, not whether the limit solve itself is sound.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Final

import numpy as np
from loguru import logger
from scipy.integrate import simpson

from viscolub.constitutive import phi, phi_prime, psi, psi_prime
from viscolub.errors import InvalidParameters, ViscolubError
from viscolub.fields import (
    LimitFields,
    build_fields,
    flux_spread,
    reconstruct_u1,
    residual_limit_system,
    shear_profile,
)
from viscolub.kappa import KappaQuery, closure_moments, f_eval, gap_flux, kappa_solve
from viscolub.reynolds import (
    GapProfile,
    PressureSolution,
    SolverMethod,
    assemble_pressure,
    default_flux,
    flux_residual,
    solve_q_ode,
    solve_q_pointwise,
)


if TYPE_CHECKING:
    from collections.abc import Callable

    from numpy.typing import NDArray

    from viscolub._arrays import FloatArray
    from viscolub.config import RunConfig
    from viscolub.constitutive import FluidParams
    from viscolub.fields import ResidualReport

__all__ = [
    "BracketBlock",
    "CheckResult",
    "SmallnessBlock",
    "SolveOutcome",
    "ValidationReport",
    "bracket_coefficients",
    "check_brackets",
    "check_smallness",
    "oracle_couette",
    "oracle_deviations",
    "oracle_newtonian",
    "run_all",
    "solve_case",
]

SHEAR_LIMIT: Final = 1 / 12
BRACKET_RTOL: Final = 1e-8
_SLACK: Final = 1e-12
_ROUND_TRIP_SAMPLES: Final = 1000
_SAMPLE_COLUMNS: Final = 9
_SAMPLE_HEIGHTS: Final = (0.25, 0.5, 0.75)
_FIELD_NAMES: Final = ("u1", "u2", "sigma11", "sigma12", "sigma22")


@dataclass(frozen=True)
class CheckResult:
    name: str
    measured: float
    threshold: float
    passed: bool
    reference: str
    hard: bool = True

    @classmethod
    def at_most(cls, name: str, measured: float, threshold: float, reference: str, *, hard: bool = True) -> CheckResult:
        # NaN compares False, so it fails
        measured = float(measured)
        return cls(name, measured, float(threshold), bool(measured <= threshold), reference, hard)


@dataclass(frozen=True)
class SmallnessBlock:
    """The five smallness quantities, their threshold chi and where each maximum sits."""

    chi: float
    quantities: dict[str, float]
    locations: dict[str, tuple[float, float]]
    checks: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)


@dataclass(frozen=True)
class BracketBlock:
    """Extremes of ``-U / h^3`` and ``dK/dq / h`` along a solution against their a-priori brackets."""

    m: float
    big_m: float
    mobility_bracket: tuple[float, float]
    mobility_range: tuple[float, float]
    kappa_slope_bracket: tuple[float, float]
    kappa_slope_range: tuple[float, float]
    checks: tuple[CheckResult, ...]

    @property
    def satisfiable(self) -> bool:
        return self.mobility_bracket[0] > 0


@dataclass(frozen=True, eq=False)
class SolveOutcome:
    params: FluidParams
    gap: GapProfile
    solutions: dict[SolverMethod, PressureSolution]
    fields: LimitFields

    @property
    def primary(self) -> PressureSolution:
        return self.fields.pressure


@dataclass
class ValidationReport:
    checks: list[CheckResult] = field(default_factory=list)
    smallness: SmallnessBlock | None = None
    brackets: BracketBlock | None = None
    residuals: ResidualReport | None = None
    deviations: dict[str, float | None] = field(default_factory=dict)
    error: str | None = None
    error_code: int | None = None

    @classmethod
    def refused(cls, exc: ViscolubError) -> ValidationReport:
        return cls(error=f"{type(exc).__name__}: {exc}", error_code=exc.exit_code)

    @property
    def verdict(self) -> bool:
        return self.error is None and all(check.passed for check in self.checks if check.hard)

    @property
    def warnings(self) -> list[CheckResult]:
        return [check for check in self.checks if not check.hard and not check.passed]

    @property
    def exit_code(self) -> int:
        if self.error_code is not None:
            return self.error_code
        return 0 if self.verdict else 5

    def to_dict(self) -> dict[str, object]:
        return {
            "verdict": self.verdict,
            "error": self.error,
            "checks": [dataclasses.asdict(check) for check in self.checks],
            "smallness": None if self.smallness is None else dataclasses.asdict(self.smallness),
            "brackets": None if self.brackets is None else dataclasses.asdict(self.brackets),
            "residuals": None if self.residuals is None else self.residuals.as_dict(),
            "deviations": self.deviations,
        }


def _argmax_location(values: FloatArray, fields: LimitFields) -> tuple[float, float]:
    row, col = np.unravel_index(int(np.argmax(values)), values.shape)
    return float(fields.x[row]), float(fields.z[row, col])


def _smallness_arrays(fields: LimitFields, lam: float) -> dict[str, FloatArray]:
    # sigma22 = -sigma11 pointwise, so the sum of the two sup-norms is the sup of the sum
    return {
        "shear_rate": lam * np.abs(fields.dzu1),
        "shear_stress": lam * np.abs(fields.sigma12),
        "normal_stress": lam * (np.abs(fields.sigma11) + np.abs(fields.sigma22)),
        "shear_stress_slope": 2 * lam * np.abs(fields.dz_sigma12),
        "normal_stress_slope": lam * np.abs(fields.dz_sigma11),
    }


def check_smallness(fields: LimitFields, params: FluidParams, refined: LimitFields | None = None) -> SmallnessBlock:
    """Sup-norms of the weighted shear and stress quantities against 1/12 and chi.

    Without ``refined`` the sup-norms are grid maxima. With ``refined`` (the same solution on
    columns of 2M nodes, which contain the M-node columns) each maximum gets one Richardson step,
    ``S_2M + (S_2M - S_M) / 3``, and locations come from the finer grid.
    """
    lam, chi = params.lambda_star, params.chi
    arrays = _smallness_arrays(fields, lam)
    quantities = {name: float(np.max(values)) for name, values in arrays.items()}
    located = fields
    if refined is not None:
        arrays = _smallness_arrays(refined, lam)
        fine = {name: float(np.max(values)) for name, values in arrays.items()}
        quantities = {name: fine[name] + max(fine[name] - quantities[name], 0.0) / 3 for name in fine}
        located = refined

    thresholds = dict.fromkeys(arrays, chi) | {"shear_rate": SHEAR_LIMIT}
    references = {
        "shear_rate": "lambda* sup|dz u1| <= 1/12",
        "shear_stress": "lambda* sup|sigma12| <= chi",
        "normal_stress": "lambda* (sup|sigma11| + sup|sigma22|) <= chi",
        "shear_stress_slope": "2 lambda* sup|dz sigma12| <= chi",
        "normal_stress_slope": "lambda* sup|dz sigma11| <= chi",
    }

    checks = tuple(
        CheckResult.at_most(
            f"smallness.{name}",
            quantities[name],
            thresholds[name] + _SLACK * max(1.0, thresholds[name]),
            references[name] + f" (chi = nu/6 sqrt(r(1-r)) = {chi:.6g})",
            hard=False,
        )
        for name in arrays
    )
    block = SmallnessBlock(
        chi=chi,
        quantities=quantities,
        locations={name: _argmax_location(values, located) for name, values in arrays.items()},
        checks=checks,
    )
    for check in checks:
        if not check.passed:
            logger.warning(f"Smallness hypothesis not met: {check.name} = {check.measured:.6g} > {check.threshold:.6g}")
    return block


def bracket_coefficients(params: FluidParams) -> tuple[float, float]:
    """``(m/3 - M/4, M/3 - m/4)``; ``-U / h^3`` lies between them, and the lower one is > 0 iff r < 2/9."""
    m, big_m = params.compliance_bounds
    return m / 3 - big_m / 4, big_m / 3 - m / 4


def check_brackets(ps: PressureSolution, gp: GapProfile, params: FluidParams) -> BracketBlock:
    """Sample U and dK/dq along the solution and compare with their a-priori brackets.

    Never raises on a violated bracket; violations are encoded in the checks.
    """
    m, big_m = params.compliance_bounds
    low, high = bracket_coefficients(params)
    h = np.asarray(gp.h(ps.x), dtype=float)
    moments = closure_moments(KappaQuery(h, ps.q, params.s), params)

    mobility = -moments.mobility / h**3
    slope = moments.dk_dq / h
    slope_bracket = (-big_m / (2 * m), -m / (2 * big_m))
    tol = BRACKET_RTOL * max(abs(low), abs(high))
    orthogonality = np.abs(moments.orthogonality) / np.maximum(1.0, h * moments.i0)

    checks = (
        CheckResult(
            "brackets.mobility_admissible",
            low,
            0.0,
            low > 0,
            "U keeps its sign when m/3 - M/4 > 0, i.e. r < 2/9",
        ),
        CheckResult.at_most(
            "brackets.mobility_negative", float(np.max(moments.mobility)), 0.0, "U(x, q) < 0 for r < 2/9"
        ),
        CheckResult.at_most(
            "brackets.mobility_bracket",
            float(max(low - np.min(mobility), np.max(mobility) - high, 0.0)),
            tol,
            "h^3 (m/3 - M/4) <= -U <= h^3 (M/3 - m/4)",
        ),
        CheckResult.at_most(
            "brackets.orthogonality",
            float(np.max(orthogonality)),
            1e-9,
            "int (t + dK/dq) psi'(q t + K) dt = 0",
        ),
        CheckResult.at_most(
            "brackets.kappa_slope",
            float(max(slope_bracket[0] - np.min(slope), np.max(slope) - slope_bracket[1], 0.0)),
            BRACKET_RTOL * abs(slope_bracket[0]),
            "-M h / (2m) <= dK/dq <= -m h / (2M)",
            hard=False,
        ),
    )
    for check in checks:
        if not check.passed:
            logger.warning(f"Bracket check failed: {check.name} ({check.reference}), measured {check.measured:.6g}")

    return BracketBlock(
        m=m,
        big_m=big_m,
        mobility_bracket=(low, high),
        mobility_range=(float(np.min(mobility)), float(np.max(mobility))),
        kappa_slope_bracket=slope_bracket,
        kappa_slope_range=(float(np.min(slope)), float(np.max(slope))),
        checks=checks,
    )


def oracle_couette(params: FluidParams, h: float, length: float = 1.0, n: int = 128, m: int = 128) -> LimitFields:
    """Closed-form constant-gap fields: linear velocity, constant stresses, zero pressure."""
    params.require_invertible()
    gp = GapProfile.constant(h, length)
    nu, r, lam, s = params.nu, params.r, params.lambda_star, params.s

    x = np.linspace(0.0, length, n + 1)
    z = np.broadcast_to(h * (1 - np.cos(np.pi * np.arange(m + 1) / m)) / 2, (n + 1, m + 1)).copy()
    zeros = np.zeros_like(z)
    sigma12 = -r * nu * s / (h + lam**2 * s**2 / h)
    sigma11 = -r * nu * s**2 * lam / (h**2 + lam**2 * s**2)

    flat = np.zeros(n + 1)
    pressure = PressureSolution(x, flat, flat.copy(), flat.copy(), s * h / 2, SolverMethod.COUETTE)
    return LimitFields(
        x=x,
        h=np.full(n + 1, float(gp.h0)),
        kappa=np.full(n + 1, -nu * (1 - r) * s / h + sigma12),
        dkappa=flat.copy(),
        z=z,
        u1=s * (1 - z / h),
        u2=zeros,
        sigma11=np.full_like(z, sigma11),
        sigma12=np.full_like(z, sigma12),
        sigma22=np.full_like(z, -sigma11),
        dzu1=np.full_like(z, -s / h),
        dzzu1=zeros,
        dxu1=zeros,
        dz_sigma12=zeros,
        dz_sigma11=zeros,
        pressure=pressure,
        s=s,
    )


def oracle_newtonian(
    gp: GapProfile, params: FluidParams, flux: float | None = None, n: int = 128
) -> PressureSolution:
    """Classical Reynolds gradient ``q = 12 nu (s h / 2 - Q) / h^3``, with its exact x-derivative.

    Raises:
        InvalidParameters: the rheology is not Newtonian (lambda* > 0 and r > 0).
    """
    if not params.newtonian:
        raise InvalidParameters(f"Newtonian oracle needs lambda_star = 0 or r = 0, got {params.lambda_star}")
    flux = default_flux(gp, params) if flux is None else float(flux)
    nu, s = params.nu, params.s

    x = np.linspace(0.0, gp.length, n + 1)
    h = np.asarray(gp.h(x), dtype=float)
    dh = np.asarray(gp.dh(x), dtype=float)
    q = 12 * nu * (s * h / 2 - flux) / h**3
    dq = 12 * nu * dh * (3 * flux - s * h) / h**4
    return PressureSolution(x, q, assemble_pressure(q, gp, x), dq, flux, SolverMethod.NEWTONIAN)


def solve_case(config: RunConfig) -> SolveOutcome:
    """Run the configured solver(s) and assemble fields from the primary (pointwise when present) path."""
    params, gp, flux = config.fluid, config.gap, config.flux
    solutions: dict[SolverMethod, PressureSolution] = {}
    if config.solver.runs_pointwise:
        solutions[SolverMethod.POINTWISE] = solve_q_pointwise(gp, params, flux, config.n)
    if config.solver.runs_ode:
        solutions[SolverMethod.ODE] = solve_q_ode(gp, params, flux, config.n)

    primary = solutions.get(SolverMethod.POINTWISE) or solutions[SolverMethod.ODE]
    fields = build_fields(primary, gp, params, config.m)
    return SolveOutcome(params, gp, solutions, fields)


def _relative_deviation(a: FloatArray, b: FloatArray) -> float:
    return float(np.max(np.abs(a - b)) / max(1.0, float(np.max(np.abs(b)))))


def _is_couette(outcome: SolveOutcome) -> bool:
    h = outcome.fields.h
    flux = outcome.primary.flux
    return bool(np.ptp(h) == 0) and math.isclose(flux, outcome.params.s * h[0] / 2, rel_tol=1e-14, abs_tol=1e-14)


def oracle_deviations(outcome: SolveOutcome) -> dict[str, float | None]:
    """Max-norm deviations between solver paths and the closed-form oracles; None when not applicable."""
    params, gp, fields = outcome.params, outcome.gap, outcome.fields
    ode = outcome.solutions.get(SolverMethod.ODE)
    pointwise = outcome.solutions.get(SolverMethod.POINTWISE)
    deviations: dict[str, float | None] = {"ode_vs_pointwise": None, "newtonian": None, "couette": None}

    if ode is not None and pointwise is not None:
        deviations["ode_vs_pointwise"] = _relative_deviation(ode.q, pointwise.q)

    if params.newtonian:
        reference = oracle_newtonian(gp, params, outcome.primary.flux, len(outcome.primary.x) - 1)
        deviations["newtonian"] = _relative_deviation(outcome.primary.q, reference.q)

    if _is_couette(outcome):
        n, m = fields.shape
        couette = oracle_couette(params, float(fields.h[0]), gp.length, n - 1, m - 1)
        deviations["couette"] = max(
            float(np.max(np.abs(getattr(fields, name) - getattr(couette, name))))
            for name in ("u1", "u2", "sigma11", "sigma12", "sigma22", "q")
        ) / max(1.0, abs(params.s))

    return deviations


def _constitutive_checks(params: FluidParams) -> list[CheckResult]:
    grid = np.geomspace(1e-6, 1e6, _ROUND_TRIP_SAMPLES // 2)
    t = np.concatenate([-grid[::-1], grid])
    round_trip = np.abs(np.asarray(psi(phi(t, params), params)) - t) / np.maximum(1.0, np.abs(t))
    slopes = np.asarray(phi_prime(t, params))
    odd_phi = np.abs(np.asarray(phi(-t, params)) + np.asarray(phi(t, params)))
    y = np.asarray(phi(t, params))
    odd_psi = np.abs(np.asarray(psi(-y, params)) + np.asarray(psi(y, params))) / np.maximum(1.0, np.abs(t))
    step = 1e-6 * np.maximum(1.0, np.abs(t))
    central = (np.asarray(phi(t + step, params)) - np.asarray(phi(t - step, params))) / (2 * step)
    compliance = np.asarray(psi_prime(y, params))
    m, big_m = params.compliance_bounds
    return [
        CheckResult.at_most("constitutive.round_trip", float(np.max(round_trip)), 1e-10, "psi(phi(t)) = t"),
        CheckResult.at_most(
            "constitutive.slope_floor",
            params.slope_floor - float(np.min(slopes)),
            1e-12,
            "phi' >= nu (1 - 9r/8)",
        ),
        CheckResult.at_most(
            "constitutive.slope_ceiling", float(np.max(slopes)) - params.nu, 1e-12, "phi' <= nu"
        ),
        CheckResult.at_most(
            "constitutive.odd",
            max(float(np.max(odd_phi / np.maximum(1.0, np.abs(y)))), float(np.max(odd_psi))),
            1e-12,
            "phi and psi are odd",
        ),
        CheckResult.at_most(
            "constitutive.slope_differences",
            float(np.max(np.abs(central - slopes))) / params.nu,
            1e-8,
            "phi' matches central differences of phi",
        ),
        CheckResult.at_most(
            "constitutive.compliance_bounds",
            max(m - float(np.min(compliance)), float(np.max(compliance)) - big_m, 0.0) / big_m,
            1e-12,
            "1/nu <= psi' <= 1/(nu (1 - 9r/8))",
        ),
    ]


def _sample_columns(ps: PressureSolution) -> NDArray[np.intp]:
    return np.unique(np.linspace(0, ps.x.size - 1, _SAMPLE_COLUMNS).round().astype(int))


def _five_point(fun: Callable[[FloatArray], FloatArray], centre: FloatArray, step: FloatArray) -> FloatArray:
    """Fourth-order central difference of ``fun`` at ``centre``."""
    ahead = fun(centre + step) - fun(centre - step)
    far = fun(centre + 2 * step) - fun(centre - 2 * step)
    return (8 * ahead - far) / (12 * step)


def _partial_checks(outcome: SolveOutcome) -> list[CheckResult]:
    """dK/dq, dK/dh and the q-slope of the gap flux against differences, at a few sampled columns.

    Steps are a thousandth of the elastic stress scale ``nu / max(1, lambda*)`` in the argument
    ``q t + kappa``, so the differences stay below the width of any shear transition.
    """
    params, ps = outcome.params, outcome.primary
    columns = _sample_columns(ps)
    h, q, s = outcome.fields.h[columns], ps.q[columns], params.s
    resolution = params.nu / max(1.0, params.lambda_star)
    q_step = 1e-3 * resolution / h
    h_step = 1e-3 * h * resolution / (np.abs(q) * h + params.nu * abs(s) / h + resolution)

    def kappa_at(heights: FloatArray, gradients: FloatArray) -> FloatArray:
        return np.asarray(kappa_solve(KappaQuery(heights, gradients, s), params), dtype=float)

    def flux_at(gradients: FloatArray) -> FloatArray:
        return np.asarray(gap_flux(KappaQuery(h, gradients, s), params), dtype=float)

    moments = closure_moments(KappaQuery(h, q, s), params)
    by_q = _five_point(lambda v: kappa_at(h, v), q, q_step)
    by_h = _five_point(lambda v: kappa_at(v, q), h, h_step)
    flux_slope = _five_point(flux_at, q, q_step)

    def deviation(approx: FloatArray, exact: FloatArray) -> float:
        return float(np.max(np.abs(approx - exact) / np.maximum(1.0, np.abs(exact))))

    return [
        CheckResult.at_most(
            "kappa.dk_dq_differences",
            deviation(by_q, moments.dk_dq),
            1e-6,
            "dK/dq = -int t psi' / int psi' matches differences of K in q",
        ),
        CheckResult.at_most(
            "kappa.dk_dh_differences",
            deviation(by_h, moments.dk_dh),
            1e-6,
            "dK/dh = -psi(q h + K) / int psi' matches differences of K in h",
        ),
        CheckResult.at_most(
            "kappa.flux_monotone",
            float(np.max(flux_slope)),
            0.0,
            "the gap flux decreases in q at fixed (h, s)",
        ),
    ]


def _shear_profile_check(outcome: SolveOutcome) -> CheckResult:
    """``dz u1`` and ``dz^2 u1`` against differences of u1 and of dz u1 at interior heights."""
    params, gap, ps = outcome.params, outcome.gap, outcome.primary
    columns = _sample_columns(ps)
    x = np.repeat(ps.x[columns], len(_SAMPLE_HEIGHTS))
    h = np.asarray(gap.h(x), dtype=float)
    z = h * np.tile(_SAMPLE_HEIGHTS, columns.size)
    step = 1e-4 * h

    shear, curvature = (np.asarray(v, dtype=float) for v in shear_profile(x, z, ps, gap, params))
    u1_slope = _five_point(lambda v: np.asarray(reconstruct_u1(x, v, ps, gap, params), dtype=float), z, step)
    shear_slope = _five_point(lambda v: np.asarray(shear_profile(x, v, ps, gap, params)[0], dtype=float), z, step)
    deviation = max(
        float(np.max(np.abs(u1_slope - shear) / np.maximum(1.0, np.abs(shear)))),
        float(np.max(np.abs(shear_slope - curvature) / np.maximum(1.0, np.abs(curvature)))),
    )
    return CheckResult.at_most(
        "fields.shear_profile",
        deviation,
        1e-6,
        "dz u1 = psi(q z + K) and dz^2 u1 = q psi'(q z + K) match differences of u1",
    )


def _regularity_check(fields: LimitFields, refined: LimitFields) -> CheckResult:
    """Finite fields whose nodal values move by at most O(1/M) when the columns are doubled."""
    m = fields.shape[1] - 1
    finite = all(np.all(np.isfinite(getattr(f, name))) for f in (fields, refined) for name in _FIELD_NAMES)
    change = math.inf
    if finite:
        change = max(
            float(np.max(np.abs(getattr(refined, name)[:, ::2] - getattr(fields, name))))
            / max(1.0, float(np.max(np.abs(getattr(fields, name)))))
            for name in _FIELD_NAMES
        )
    return CheckResult.at_most(
        "fields.regularity",
        change,
        1 / m,
        "fields are finite and change by at most O(1/M) under M -> 2M",
    )


def _closure_checks(outcome: SolveOutcome) -> list[CheckResult]:
    params, ps = outcome.params, outcome.primary
    kq = KappaQuery(outcome.fields.h, ps.q, params.s)
    certificate = np.abs(np.asarray(f_eval(kq, outcome.fields.kappa, params)))
    moments = closure_moments(kq, params)
    return [
        CheckResult.at_most(
            "kappa.root_certificate",
            float(np.max(certificate)),
            1e-10 * max(1.0, abs(params.s)),
            "F(h, q, s, K(h, q, s)) = 0",
        ),
        CheckResult.at_most(
            "kappa.slope_negative", float(np.max(moments.dk_dq)), 0.0, "dK/dq < 0 for h > 0"
        ),
    ]


def _pressure_checks(outcome: SolveOutcome) -> list[CheckResult]:
    params, gp = outcome.params, outcome.gap
    checks = []
    for method, ps in outcome.solutions.items():
        h = np.asarray(gp.h(ps.x), dtype=float)
        checks.append(
            CheckResult.at_most(
                f"reynolds.flux_constancy.{method.value}",
                flux_residual(ps, gp, params),
                1e-8 * max(1.0, abs(ps.flux)),
                "int_0^h u1 dz is independent of x",
            )
        )
        checks.append(
            CheckResult.at_most(
                f"reynolds.zero_mean.{method.value}",
                abs(float(simpson(ps.p * h, x=ps.x))),
                1e-8 * float(simpson(h, x=ps.x)),
                "int p h dx = 0",
            )
        )
    return checks


def _field_checks(outcome: SolveOutcome) -> tuple[list[CheckResult], ResidualReport]:
    fields, params = outcome.fields, outcome.params
    scale = max(1.0, abs(params.s))
    residuals = residual_limit_system(fields, params)
    shear = float(np.max(np.abs(fields.dzu1)))
    stress_scale = max(1.0, params.nu * shear * (1 + params.lambda_star**2 * shear**2))

    checks = [
        CheckResult.at_most(
            "fields.lower_wall_u1", float(np.max(np.abs(fields.u1[:, 0] - params.s))), 1e-8 * scale, "u1(x, 0) = s"
        ),
        CheckResult.at_most(
            "fields.upper_wall_u1", float(np.max(np.abs(fields.u1[:, -1]))), 1e-8 * scale, "u1(x, h) = 0"
        ),
        CheckResult.at_most(
            "fields.lower_wall_u2", float(np.max(np.abs(fields.u2[:, 0]))), 1e-8 * scale, "u2(x, 0) = 0"
        ),
        CheckResult.at_most(
            "fields.upper_wall_u2",
            float(np.max(np.abs(fields.u2[:, -1]))),
            1e-6 * scale,
            "u2(x, h) = 0 because the gap flux is constant",
        ),
        CheckResult.at_most(
            "fields.trace", float(np.max(np.abs(fields.sigma11 + fields.sigma22))), 0.0, "sigma11 + sigma22 = 0"
        ),
        CheckResult.at_most("fields.flux_spread", flux_spread(fields), 1e-6, "column fluxes agree across x"),
        CheckResult.at_most("residual.momentum", residuals.momentum, 1e-6, "(1-r) nu dz^2 u1 - dx p + dz sigma12 = 0"),
        CheckResult.at_most("residual.vertical_pressure", residuals.vertical_pressure, 0.0, "dz p = 0"),
        CheckResult.at_most("residual.divergence", residuals.divergence, 1e-6, "dx u1 + dz u2 = 0"),
        CheckResult.at_most(
            "residual.closures",
            residuals.closures,
            1e-12 * stress_scale,
            "sigma12 (1 + lambda*^2 t^2) = nu r t, sigma22 = -sigma11 = lambda* t sigma12",
        ),
    ]
    return checks, residuals


def _oracle_checks(deviations: dict[str, float | None], outcome: SolveOutcome) -> list[CheckResult]:
    checks = []
    if (value := deviations["ode_vs_pointwise"]) is not None:
        checks.append(CheckResult.at_most("oracle.ode_vs_pointwise", value, 1e-6, "ODE and flux solves agree"))
    if (value := deviations["newtonian"]) is not None:
        threshold = 1e-9 if outcome.primary.method is SolverMethod.POINTWISE else 1e-6
        checks.append(
            CheckResult.at_most("oracle.newtonian", value, threshold, "q = 12 nu (s h/2 - Q) / h^3 when phi is linear")
        )
    if (value := deviations["couette"]) is not None:
        checks.append(CheckResult.at_most("oracle.couette", value, 1e-8, "u1 = s (1 - z/h) in a constant gap"))
    return checks


def run_all(config: RunConfig, *, outcome: SolveOutcome | None = None) -> ValidationReport:
    """Solve (unless ``outcome`` is given) and evaluate every check; solver errors end up in the report."""
    try:
        outcome = solve_case(config) if outcome is None else outcome
        report = ValidationReport()
        report.checks += _constitutive_checks(outcome.params)
        report.checks += _closure_checks(outcome)
        report.checks += _partial_checks(outcome)
        report.checks += _pressure_checks(outcome)
        field_checks, report.residuals = _field_checks(outcome)
        report.checks += field_checks
        refined = build_fields(outcome.primary, outcome.gap, outcome.params, 2 * (outcome.fields.shape[1] - 1))
        report.checks += [_shear_profile_check(outcome), _regularity_check(outcome.fields, refined)]
        report.deviations = oracle_deviations(outcome)
        report.checks += _oracle_checks(report.deviations, outcome)
        report.brackets = check_brackets(outcome.primary, outcome.gap, outcome.params)
        report.checks += report.brackets.checks
        report.smallness = check_smallness(outcome.fields, outcome.params, refined)
        report.checks += report.smallness.checks
    except ViscolubError as exc:
        logger.error(f"Validation refused: {type(exc).__name__}: {exc}")
        return ValidationReport.refused(exc)

    for check in report.checks:
        if check.hard and not check.passed:
            logger.error(f"Check failed: {check.name} = {check.measured:.6g} > {check.threshold:.6g}")
    logger.info(f"Validation verdict: {'pass' if report.verdict else 'FAIL'} ({len(report.warnings)} warnings)")
    return report
