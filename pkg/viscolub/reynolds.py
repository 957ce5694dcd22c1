"""Generalized Reynolds problem for the pressure gradient ``q = p'``.

Incompressibility makes the gap flux independent of x. Differentiating that statement gives
the ODE ``U(x, q) q' = -V(x, q)``; solving the flux equation node by node gives the same q
directly. Both routes are implemented and used as each other's oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import TYPE_CHECKING, Final

import numpy as np
from loguru import logger
from scipy.integrate import cumulative_simpson, simpson, solve_ivp
from scipy.interpolate import CubicSpline, PchipInterpolator

from viscolub._arrays import as_output
from viscolub.errors import FluxUnreachable, InvalidGap, InvalidParameters, InvariantViolation, StepFailure
from viscolub.kappa import ClosureMoments, KappaQuery, closure_moments
from viscolub.rootfind import expand_bracket, safeguarded_newton


if TYPE_CHECKING:
    from numpy.typing import ArrayLike

    from viscolub._arrays import FloatArray, Real
    from viscolub.constitutive import FluidParams

__all__ = [
    "MIN_GRID",
    "GapKind",
    "GapProfile",
    "PressureSolution",
    "SolverMethod",
    "assemble_pressure",
    "default_flux",
    "flux_residual",
    "solve_q_ode",
    "solve_q_pointwise",
    "u_eval",
    "v_eval",
]

MIN_GRID: Final = 16
ODE_RTOL: Final = 1e-9
ODE_ATOL: Final = 1e-12
FLUX_TOLERANCE: Final = 1e-8
_FLUX_FTOL: Final = 1e-12
_BRACKET_BUDGET: Final = 60


class GapKind(str, Enum):
    CONSTANT = "constant"
    LINEAR = "linear"
    COSINE = "cosine"
    TABLE = "table"


class SolverMethod(str, Enum):
    ODE = "ode"
    POINTWISE = "pointwise"
    NEWTONIAN = "newtonian"
    COUETTE = "couette"


@dataclass(frozen=True)
class GapProfile:
    """Gap height h(x) on [0, length], strictly positive and C1.

    Presets: ``constant`` (h0), ``linear`` slider from h1 to h2, ``cosine`` bump
    ``h0 + amplitude (1 - cos(2 pi x / L)) / 2``, or a ``table`` of samples interpolated with a
    monotone cubic (PCHIP), which never overshoots the samples.
    """

    kind: GapKind
    length: float = 1.0
    h0: float = 1.0
    h1: float = 1.0
    h2: float = 1.0
    amplitude: float = 0.0
    table_x: tuple[float, ...] = ()
    table_h: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", GapKind(self.kind))
        if not (math.isfinite(self.length) and self.length > 0):
            raise InvalidParameters(f"gap length must be > 0, got {self.length}")
        if self.kind is GapKind.TABLE:
            self._check_table()
        if not self.min_height > 0:
            raise InvalidGap(f"gap height must stay > 0, minimum is {self.min_height}")

    def _check_table(self) -> None:
        xs, hs = np.asarray(self.table_x, dtype=float), np.asarray(self.table_h, dtype=float)
        if xs.size < 2 or xs.size != hs.size:  # noqa: PLR2004
            raise InvalidParameters(f"gap table needs >= 2 matching samples, got {xs.size} x and {hs.size} h")
        if not np.all(np.diff(xs) > 0):
            raise InvalidParameters("gap table abscissae must be strictly increasing")
        if xs[0] != 0 or xs[-1] != self.length:
            raise InvalidParameters(f"gap table must span [0, {self.length}], got [{xs[0]}, {xs[-1]}]")

    @classmethod
    def constant(cls, h0: float, length: float = 1.0) -> GapProfile:
        return cls(GapKind.CONSTANT, length, h0=h0)

    @classmethod
    def linear_slider(cls, h1: float, h2: float, length: float = 1.0) -> GapProfile:
        return cls(GapKind.LINEAR, length, h1=h1, h2=h2)

    @classmethod
    def cosine_bump(cls, h0: float, amplitude: float, length: float = 1.0) -> GapProfile:
        return cls(GapKind.COSINE, length, h0=h0, amplitude=amplitude)

    @classmethod
    def from_table(cls, xs: ArrayLike, hs: ArrayLike) -> GapProfile:
        xs_t = tuple(float(v) for v in np.asarray(xs, dtype=float).ravel())
        hs_t = tuple(float(v) for v in np.asarray(hs, dtype=float).ravel())
        return cls(GapKind.TABLE, xs_t[-1] if xs_t else 0.0, table_x=xs_t, table_h=hs_t)

    @cached_property
    def _interpolant(self) -> PchipInterpolator:
        return PchipInterpolator(self.table_x, self.table_h)

    @property
    def min_height(self) -> float:
        if self.kind is GapKind.CONSTANT:
            return self.h0
        if self.kind is GapKind.LINEAR:
            return min(self.h1, self.h2)
        if self.kind is GapKind.COSINE:
            return min(self.h0, self.h0 + self.amplitude)
        return min(self.table_h)

    def h(self, x: ArrayLike) -> Real:
        x = np.asarray(x, dtype=float)
        if self.kind is GapKind.CONSTANT:
            values = np.full_like(x, self.h0)
        elif self.kind is GapKind.LINEAR:
            values = self.h1 + (self.h2 - self.h1) * x / self.length
        elif self.kind is GapKind.COSINE:
            values = self.h0 + self.amplitude * (1 - np.cos(2 * np.pi * x / self.length)) / 2
        else:
            values = np.asarray(self._interpolant(x), dtype=float)
        return as_output(values)

    def dh(self, x: ArrayLike) -> Real:
        x = np.asarray(x, dtype=float)
        if self.kind is GapKind.CONSTANT:
            values = np.zeros_like(x)
        elif self.kind is GapKind.LINEAR:
            values = np.full_like(x, (self.h2 - self.h1) / self.length)
        elif self.kind is GapKind.COSINE:
            values = self.amplitude * np.pi / self.length * np.sin(2 * np.pi * x / self.length)
        else:
            values = np.asarray(self._interpolant.derivative()(x), dtype=float)
        return as_output(values)


@dataclass(frozen=True, eq=False)
class PressureSolution:
    """Pressure gradient ``q``, its slope ``dq`` and the zero-mean pressure ``p`` on a uniform grid."""

    x: FloatArray
    q: FloatArray
    p: FloatArray
    dq: FloatArray
    flux: float
    method: SolverMethod

    @cached_property
    def _q_spline(self) -> CubicSpline:
        return CubicSpline(self.x, self.q)

    @cached_property
    def _dq_spline(self) -> CubicSpline:
        return CubicSpline(self.x, self.dq)

    def gradient_at(self, x: ArrayLike) -> Real:
        return as_output(np.asarray(self._q_spline(x), dtype=float))

    def slope_at(self, x: ArrayLike) -> Real:
        return as_output(np.asarray(self._dq_spline(x), dtype=float))


def default_flux(gp: GapProfile, params: FluidParams) -> float:
    """Pure-shear flux ``s h(0) / 2``; reproduces Couette flow in a constant gap."""
    return params.s * float(gp.h(0.0)) / 2


def _moments(x: FloatArray, q: FloatArray, gp: GapProfile, params: FluidParams) -> ClosureMoments:
    return closure_moments(KappaQuery(np.asarray(gp.h(x)), q, params.s), params)


def _terms(
    x: FloatArray, q: FloatArray, gp: GapProfile, params: FluidParams
) -> tuple[FloatArray, FloatArray, ClosureMoments]:
    moments = _moments(x, q, gp, params)
    mobility = moments.mobility
    if not np.all(mobility < 0):
        raise InvariantViolation(f"U must be negative, got max {np.max(mobility)}")
    forcing = np.asarray(gp.dh(x)) * moments.dk_dh * moments.gap_weight
    return mobility, forcing, moments


def _slope(x: FloatArray, q: FloatArray, gp: GapProfile, params: FluidParams) -> FloatArray:
    """``q' = -V / U``, the x-derivative of q along a constant-flux curve."""
    mobility, forcing, _ = _terms(x, q, gp, params)
    return -forcing / mobility


def u_eval(x: ArrayLike, q: ArrayLike, gp: GapProfile, params: FluidParams) -> Real:
    """U(x, q) = -int_0^h t (t + dK/dq) psi'(q t + K) dt, strictly negative for r < 2/9.

    Raises:
        RheologyOutOfRange: r >= 2/9.
        InvariantViolation: U >= 0 was computed.
    """
    params.require_reynolds()
    x, q = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(q, dtype=float))
    return as_output(_terms(x, q, gp, params)[0])


def v_eval(x: ArrayLike, q: ArrayLike, gp: GapProfile, params: FluidParams) -> Real:
    """V(x, q) = h'(x) dK/dh int_0^h (h - t) psi'(q t + K) dt."""
    params.require_reynolds()
    x, q = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(q, dtype=float))
    return as_output(_terms(x, q, gp, params)[1])


def _check_grid(n: int) -> None:
    if n < MIN_GRID:
        raise InvalidParameters(f"grid size N must be >= {MIN_GRID}, got {n}")


def _solve_flux(h: FloatArray, flux: float, params: FluidParams) -> FloatArray:
    """Pressure gradient reproducing ``flux`` at every height in ``h``.

    The gap flux decreases in q with slope U, so ``flux - gap_flux(q)`` is increasing and
    Newton gets the exact slope ``-U`` for free.
    """

    def mismatch(q: FloatArray) -> tuple[FloatArray, FloatArray]:
        moments = closure_moments(KappaQuery(h, q, params.s), params)
        return flux - moments.gap_flux, -moments.mobility

    start = 12 * params.nu * (params.s * h / 2 - flux) / h**3
    radius = 0.5 * np.abs(start) + 12 * params.nu * 1e-6 / h**3
    bracket = expand_bracket(lambda q: mismatch(q)[0], start, radius, max_doublings=_BRACKET_BUDGET)
    if bracket is None:
        raise FluxUnreachable(f"no pressure gradient reproduces flux {flux} (bracket budget exhausted)")

    lower, upper = bracket
    return safeguarded_newton(
        mismatch,
        start,
        lower,
        upper,
        ftol=_FLUX_FTOL * max(1.0, abs(flux)),
        what="pressure gradient",
    )


def flux_residual(ps: PressureSolution, gp: GapProfile, params: FluidParams) -> float:
    """Largest deviation of the gap flux from the prescribed constant over the grid."""
    moments = _moments(ps.x, ps.q, gp, params)
    return float(np.max(np.abs(moments.gap_flux - ps.flux)))


def _finish(ps: PressureSolution, gp: GapProfile, params: FluidParams) -> PressureSolution:
    residual = flux_residual(ps, gp, params)
    if not residual <= FLUX_TOLERANCE * max(1.0, abs(ps.flux)):
        raise InvariantViolation(
            f"{ps.method.value} solve: gap flux deviates from {ps.flux} by {residual:.3e} "
            f"(tolerance {FLUX_TOLERANCE:g} relative)"
        )
    logger.debug(f"{ps.method.value} solve: flux residual {residual:.3e}")
    return ps


def solve_q_pointwise(
    gp: GapProfile, params: FluidParams, flux: float | None = None, n: int = 128
) -> PressureSolution:
    """Solve ``gap_flux(h(x), q(x), s) = Q`` independently at each of the N+1 nodes.

    Raises:
        RheologyOutOfRange: r >= 2/9.
        FluxUnreachable: no gradient brackets the flux at some node.
        InvariantViolation: the solution does not hold the gap flux constant to 1e-8.
    """
    params.require_reynolds()
    _check_grid(n)
    flux = default_flux(gp, params) if flux is None else float(flux)

    x = np.linspace(0.0, gp.length, n + 1)
    q = _solve_flux(np.asarray(gp.h(x)), flux, params)
    p = assemble_pressure(q, gp, x)
    return _finish(PressureSolution(x, q, p, _slope(x, q, gp, params), flux, SolverMethod.POINTWISE), gp, params)


def solve_q_ode(gp: GapProfile, params: FluidParams, flux: float | None = None, n: int = 128) -> PressureSolution:
    """Integrate ``q' = -V(x, q) / U(x, q)`` from the flux-consistent gradient at x = 0.

    Raises:
        RheologyOutOfRange: r >= 2/9.
        FluxUnreachable: no gradient reproduces the flux at x = 0.
        StepFailure: the Runge-Kutta error controller gave up.
        InvariantViolation: the integrated gradient drifted off the prescribed flux.
    """
    params.require_reynolds()
    _check_grid(n)
    flux = default_flux(gp, params) if flux is None else float(flux)

    x = np.linspace(0.0, gp.length, n + 1)
    q0 = _solve_flux(np.atleast_1d(np.asarray(gp.h(0.0), dtype=float)), flux, params)

    def rhs(xi: float, q: FloatArray) -> FloatArray:
        return _slope(np.atleast_1d(xi), q, gp, params)

    result = solve_ivp(rhs, (0.0, gp.length), q0, method="RK45", rtol=ODE_RTOL, atol=ODE_ATOL, t_eval=x)
    if not result.success:
        raise StepFailure(f"Reynolds ODE integration failed: {result.message}")
    logger.debug(f"Reynolds ODE: {result.nfev} right-hand side evaluations")

    q = np.asarray(result.y[0], dtype=float)
    p = assemble_pressure(q, gp, x)
    return _finish(PressureSolution(x, q, p, _slope(x, q, gp, params), flux, SolverMethod.ODE), gp, params)


def assemble_pressure(q: ArrayLike, gp: GapProfile, x: ArrayLike | None = None) -> FloatArray:
    """Integrate q by composite Simpson and shift so that ``int p h dx = 0``.

    The weight h makes the mean over the two-dimensional gap vanish, p being z-independent.
    """
    q = np.asarray(q, dtype=float)
    x = np.linspace(0.0, gp.length, q.size) if x is None else np.asarray(x, dtype=float)
    p = cumulative_simpson(q, x=x, initial=0.0)
    h = np.asarray(gp.h(x), dtype=float)
    return p - simpson(p * h, x=x) / simpson(h, x=x)
