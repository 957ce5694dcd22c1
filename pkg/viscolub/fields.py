"""Limit fields on a tensor grid over the physical gap.

Each x-node of a :class:`~viscolub.reynolds.PressureSolution` carries a column of M+1
Chebyshev-Lobatto heights ``z_j = h (1 - cos(pi j / M)) / 2``, clustered at both walls where the
shear is largest. Velocities come from quadrature of the shear rate, accumulated between
neighbouring heights one column at a time; stresses come from the algebraic Oldroyd closures.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import TYPE_CHECKING, Final, Literal

import numpy as np
from loguru import logger

from viscolub._arrays import as_output
from viscolub.constitutive import psi, psi_with_prime, sigma12_of_shear, sigma12_slope, sigma_diag_of_shear
from viscolub.errors import InvalidEpsilon, InvalidParameters, OutOfGap
from viscolub.kappa import KappaQuery, closure_moments
from viscolub.quadrature import integrate


if TYPE_CHECKING:
    from numpy.typing import ArrayLike

    from viscolub._arrays import FloatArray, Real
    from viscolub.constitutive import FluidParams
    from viscolub.kappa import ClosureMoments
    from viscolub.reynolds import GapProfile, PressureSolution

__all__ = [
    "MIN_COLUMN",
    "Differentiation",
    "LimitFields",
    "ResidualReport",
    "build_fields",
    "column_fluxes",
    "flux_spread",
    "reconstruct_stress",
    "reconstruct_u1",
    "reconstruct_u2",
    "rescale_to_epsilon",
    "residual_limit_system",
    "shear_profile",
]

MIN_COLUMN: Final = 8

Differentiation = Literal["spectral", "fd"]


@dataclass(frozen=True, eq=False)
class LimitFields:
    """Samples of the limit solution; arrays are shaped ``(N + 1, M + 1)`` unless noted.

    ``x``, ``h``, ``kappa`` and its x-derivative ``dkappa`` are per column, shaped ``(N + 1,)``.
    After :func:`rescale_to_epsilon` the ``z`` array holds the physical height ``y = epsilon z``
    and every z-derivative is taken with respect to y.
    """

    x: FloatArray
    h: FloatArray
    kappa: FloatArray
    dkappa: FloatArray
    z: FloatArray
    u1: FloatArray
    u2: FloatArray
    sigma11: FloatArray
    sigma12: FloatArray
    sigma22: FloatArray
    dzu1: FloatArray
    dzzu1: FloatArray
    dxu1: FloatArray
    dz_sigma12: FloatArray
    dz_sigma11: FloatArray
    pressure: PressureSolution
    s: float
    epsilon: float = 1.0

    @property
    def shape(self) -> tuple[int, int]:
        rows, cols = self.u1.shape
        return rows, cols

    @property
    def p(self) -> FloatArray:
        """Pressure broadcast over the grid; it does not depend on z."""
        return np.broadcast_to(self.pressure.p[:, None], self.u1.shape)

    @property
    def q(self) -> FloatArray:
        return np.broadcast_to(self.pressure.q[:, None], self.u1.shape)

    @property
    def x_grid(self) -> FloatArray:
        return np.broadcast_to(self.x[:, None], self.u1.shape)


@dataclass(frozen=True)
class ResidualReport:
    """Max-norm residuals of the six limit equations."""

    momentum: float
    vertical_pressure: float
    divergence: float
    sigma12_closure: float
    sigma11_closure: float
    sigma22_closure: float
    differentiation: Differentiation = "spectral"

    @property
    def closures(self) -> float:
        return max(self.sigma12_closure, self.sigma11_closure, self.sigma22_closure)

    def as_dict(self) -> dict[str, float | str]:
        return dataclasses.asdict(self)


def _column_heights(h: FloatArray, m: int) -> FloatArray:
    unit = (1 - np.cos(np.pi * np.arange(m + 1) / m)) / 2
    return h[:, None] * unit


@dataclass(frozen=True, eq=False)
class _ColumnState:
    h: FloatArray
    dh: FloatArray
    q: FloatArray
    dq: FloatArray
    moments: ClosureMoments

    @property
    def kappa(self) -> FloatArray:
        return self.moments.kappa

    @property
    def dkappa(self) -> FloatArray:
        """Derivative of kappa(x) = K(h(x), q(x), s) along x."""
        return self.moments.dk_dh * self.dh + self.moments.dk_dq * self.dq


def _column_state(x: FloatArray, ps: PressureSolution, gp: GapProfile, params: FluidParams) -> _ColumnState:
    h = np.asarray(gp.h(x), dtype=float)
    q = np.asarray(ps.gradient_at(x), dtype=float)
    dq = np.asarray(ps.slope_at(x), dtype=float)
    moments = closure_moments(KappaQuery(h, q, params.s), params)
    return _ColumnState(h, np.asarray(gp.dh(x), dtype=float), q, dq, moments)


def _check_in_gap(z: FloatArray, h: FloatArray) -> None:
    outside = (z < 0) | (z > h)
    if np.any(outside):
        raise OutOfGap(f"z must lie in [0, h(x)], got z={z[outside].ravel()[0]} with h={h[outside].ravel()[0]}")


def _point_state(
    x: ArrayLike, z: ArrayLike, ps: PressureSolution, gp: GapProfile, params: FluidParams
) -> tuple[FloatArray, _ColumnState]:
    x, z = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(z, dtype=float))
    state = _column_state(x, ps, gp, params)
    _check_in_gap(z, state.h)
    return z, state


def reconstruct_u1(x: ArrayLike, z: ArrayLike, ps: PressureSolution, gp: GapProfile, params: FluidParams) -> Real:
    """``u1(x, z) = s + int_0^z psi(q(x) t + kappa(x)) dt``.

    Raises:
        OutOfGap: z outside [0, h(x)].
    """
    z, state = _point_state(x, z, ps, gp, params)
    q, kappa = state.q[..., None], state.kappa[..., None]
    integral = integrate(lambda t: np.asarray(psi(q * t + kappa, params)), 0.0, z)
    return as_output(params.s + integral)


def shear_profile(
    x: ArrayLike, z: ArrayLike, ps: PressureSolution, gp: GapProfile, params: FluidParams
) -> tuple[Real, Real]:
    """``(dz u1, dz^2 u1) = (psi(q z + kappa), q psi'(q z + kappa))``."""
    z, state = _point_state(x, z, ps, gp, params)
    shear, compliance = psi_with_prime(state.q * z + state.kappa, params)
    return as_output(shear), as_output(state.q * compliance)


def reconstruct_u2(x: ArrayLike, z: ArrayLike, ps: PressureSolution, gp: GapProfile, params: FluidParams) -> Real:
    """``u2 = -int_0^z dx u1``, written as the single integral ``-int_0^z (z - t) g(t) dt``.

    ``g(t) = psi'(q t + kappa) (q' t + kappa')`` is the x-derivative of the shear rate.
    """
    z, state = _point_state(x, z, ps, gp, params)
    q, kappa = state.q[..., None], state.kappa[..., None]
    dq, dkappa, zz = state.dq[..., None], state.dkappa[..., None], z[..., None]

    def integrand(t: FloatArray) -> FloatArray:
        _, compliance = psi_with_prime(q * t + kappa, params)
        return (zz - t) * compliance * (dq * t + dkappa)

    return as_output(-integrate(integrand, 0.0, z))


def reconstruct_stress(
    x: ArrayLike, z: ArrayLike, ps: PressureSolution, gp: GapProfile, params: FluidParams
) -> tuple[Real, Real, Real]:
    """``(sigma11, sigma12, sigma22)`` from the shear rate at (x, z)."""
    shear, _ = shear_profile(x, z, ps, gp, params)
    sigma11, sigma22 = sigma_diag_of_shear(shear, params)
    return sigma11, sigma12_of_shear(shear, params), sigma22


def _column_integrals(
    q: float, kappa: float, dq: float, dkappa: float, z: FloatArray, params: FluidParams
) -> FloatArray:
    """Integrals of ``psi``, ``g`` and ``t g`` from 0 to every height of one column, shaped ``(3, M + 1)``.

    Each piece between neighbouring heights is its own adaptive quadrature, so a sharp shear
    transition only refines the pieces that contain it.
    """

    def integrand(t: FloatArray) -> FloatArray:
        shear, compliance = psi_with_prime(q * t + kappa, params)
        along_x = compliance * (dq * t + dkappa)
        return np.stack([shear, along_x, t * along_x])

    pieces = integrate(integrand, z[:-1], z[1:])
    return np.concatenate([np.zeros((3, 1)), np.cumsum(pieces, axis=-1)], axis=-1)


def build_fields(ps: PressureSolution, gp: GapProfile, params: FluidParams, m: int = 128) -> LimitFields:
    """Assemble every field on the ``(N + 1) x (M + 1)`` grid, column by column.

    ``u2 = -int_0^z (z - t) g dt`` is formed as ``-(z G - H)`` from the running integrals
    ``G = int g`` (which is also ``dx u1``) and ``H = int t g``.

    Raises:
        InvalidParameters: M below :data:`MIN_COLUMN`.
    """
    if m < MIN_COLUMN:
        raise InvalidParameters(f"column size M must be >= {MIN_COLUMN}, got {m}")

    state = _column_state(ps.x, ps, gp, params)
    z = _column_heights(state.h, m)
    q, kappa = state.q[:, None], state.kappa[:, None]

    columns = [
        _column_integrals(*column, heights, params)
        for *column, heights in zip(state.q, state.kappa, state.dq, state.dkappa, z)
    ]
    velocity, dxu1, moment = np.stack(columns, axis=1)

    dzu1, compliance = psi_with_prime(q * z + kappa, params)
    dzzu1 = q * compliance
    sigma12 = np.asarray(sigma12_of_shear(dzu1, params))
    sigma11, sigma22 = (np.asarray(v) for v in sigma_diag_of_shear(dzu1, params))
    slope = np.asarray(sigma12_slope(dzu1, params))
    lam = params.lambda_star

    fields = LimitFields(
        x=ps.x,
        h=state.h,
        kappa=state.kappa,
        dkappa=state.dkappa,
        z=z,
        u1=params.s + velocity,
        u2=moment - z * dxu1,
        sigma11=sigma11,
        sigma12=sigma12,
        sigma22=sigma22,
        dzu1=dzu1,
        dzzu1=dzzu1,
        dxu1=dxu1,
        dz_sigma12=slope * dzzu1,
        dz_sigma11=-lam * (sigma12 + dzu1 * slope) * dzzu1,
        pressure=ps,
        s=params.s,
    )
    logger.debug(f"Assembled limit fields on a {fields.shape[0]} x {fields.shape[1]} grid")
    return fields


@lru_cache(maxsize=8)
def _chebyshev_matrix(m: int) -> FloatArray:
    """Differentiation matrix on the ascending Lobatto nodes ``-cos(pi j / m)`` of [-1, 1]."""
    cheb = np.polynomial.chebyshev
    nodes = -np.cos(np.pi * np.arange(m + 1) / m)
    vander = cheb.chebvander(nodes, m)
    dvander = np.column_stack([cheb.chebval(nodes, cheb.chebder(np.eye(m + 1)[k])) for k in range(m + 1)])
    return np.linalg.solve(vander.T, dvander.T).T


def _dz(values: FloatArray, fields: LimitFields, how: Differentiation) -> FloatArray:
    if how == "spectral":
        matrix = _chebyshev_matrix(values.shape[1] - 1)
        return (values @ matrix.T) * (2 / fields.h)[:, None]
    if how == "fd":
        return np.stack([np.gradient(row, col, edge_order=2) for row, col in zip(values, fields.z)])
    raise InvalidParameters(f"unknown differentiation {how!r}, expected 'spectral' or 'fd'")


def _stiff_columns(fields: LimitFields, params: FluidParams) -> FloatArray:
    """Columns whose stress range ``|q| h`` exceeds the elastic stress scale ``nu / lambda*``.

    There the shear rate turns over within a layer of width ``nu / (lambda* |q|)``, which a
    polynomial through M + 1 nodes does not resolve.
    """
    q = fields.pressure.q
    return np.abs(q) * fields.h * params.lambda_star > params.nu


def _divergence(fields: LimitFields, params: FluidParams, how: Differentiation) -> FloatArray:
    """``dx u1 + dz u2`` on every node.

    On smooth columns dz u2 is differentiated from the samples. On stiff columns dz u2 is the
    running integral ``-G`` of the construction, and dx u1 is rebuilt by parts from u1 and the
    shear rate alone:

        dx u1 = (kappa' (dz u1 - dz u1|_0) + q' (z dz u1 - (u1 - s))) / q.
    """
    sampled = fields.dxu1 + _dz(fields.u2, fields, how)
    stiff = _stiff_columns(fields, params)
    if not np.any(stiff):
        return sampled

    q = np.where(stiff, fields.pressure.q, 1.0)[:, None]
    dq, dkappa = fields.pressure.dq[:, None], fields.dkappa[:, None]
    wall_shear = fields.dzu1[:, :1]
    by_parts = (dkappa * (fields.dzu1 - wall_shear) + dq * (fields.z * fields.dzu1 - (fields.u1 - fields.s))) / q
    return np.where(stiff[:, None], by_parts - fields.dxu1, sampled)


def residual_limit_system(
    fields: LimitFields, params: FluidParams, differentiation: Differentiation = "spectral"
) -> ResidualReport:
    """Residuals of the limit equations on the assembled grid.

    The momentum balance ``(1 - r) nu dz^2 u1 - dx p + dz sigma12`` uses z-derivatives of the
    sampled arrays; ``dx p`` is the stored q and ``dz p`` is zero by construction. The
    divergence ``dx u1 + dz u2`` is taken on interior nodes only, see :func:`_divergence`.

    Raises:
        InvalidEpsilon: the fields were rescaled; residuals live on limit fields.
    """
    if fields.epsilon != 1.0:
        raise InvalidEpsilon(f"residuals need limit fields, got fields rescaled to epsilon={fields.epsilon}")

    momentum = (1 - params.r) * params.nu * _dz(fields.dzu1, fields, differentiation)
    momentum += _dz(fields.sigma12, fields, differentiation) - fields.q
    divergence = _divergence(fields, params, differentiation)

    t, lam = fields.dzu1, params.lambda_star
    closure12 = fields.sigma12 * (1 + lam**2 * t * t) - params.nu * params.r * t
    closure22 = fields.sigma22 - lam * t * fields.sigma12
    closure11 = fields.sigma11 + lam * t * fields.sigma12

    return ResidualReport(
        momentum=float(np.max(np.abs(momentum))),
        vertical_pressure=0.0,
        divergence=float(np.max(np.abs(divergence[:, 1:-1]))),
        sigma12_closure=float(np.max(np.abs(closure12))),
        sigma11_closure=float(np.max(np.abs(closure11))),
        sigma22_closure=float(np.max(np.abs(closure22))),
        differentiation=differentiation,
    )


def rescale_to_epsilon(fields: LimitFields, epsilon: float) -> LimitFields:
    """Map limit fields to a gap of physical height ``epsilon h``.

    ``y = epsilon z``; u2 scales by epsilon, stresses by 1/epsilon, pressure (with q and q') by
    1/epsilon^2 and the flux by epsilon. u1 is unchanged at leading order. kappa is the total
    shear stress on the lower wall and scales with the stresses. Applies once only.

    Raises:
        InvalidEpsilon: epsilon outside (0, 1], or fields already rescaled.
    """
    if not (math.isfinite(epsilon) and 0 < epsilon <= 1):
        raise InvalidEpsilon(f"epsilon must be in (0, 1], got {epsilon}")
    if fields.epsilon != 1.0:
        raise InvalidEpsilon(f"fields were already rescaled to epsilon={fields.epsilon}")

    ps = fields.pressure
    pressure = dataclasses.replace(
        ps,
        q=ps.q / epsilon**2,
        p=ps.p / epsilon**2,
        dq=ps.dq / epsilon**2,
        flux=ps.flux * epsilon,
    )
    return dataclasses.replace(
        fields,
        h=fields.h * epsilon,
        kappa=fields.kappa / epsilon,
        dkappa=fields.dkappa / epsilon,
        z=fields.z * epsilon,
        u2=fields.u2 * epsilon,
        sigma11=fields.sigma11 / epsilon,
        sigma12=fields.sigma12 / epsilon,
        sigma22=fields.sigma22 / epsilon,
        dzu1=fields.dzu1 / epsilon,
        dzzu1=fields.dzzu1 / epsilon**2,
        dz_sigma12=fields.dz_sigma12 / epsilon**2,
        dz_sigma11=fields.dz_sigma11 / epsilon**2,
        pressure=pressure,
        epsilon=epsilon,
    )


def column_fluxes(fields: LimitFields) -> FloatArray:
    """Integral of u1 over each column from the samples of u1 and of its first two z-derivatives.

    Corrected trapezoid between neighbouring nodes,
    ``d/2 (f0 + f1) + d^2/10 (f0' - f1') + d^3/120 (f0'' + f1'')``, exact for quintics.
    """
    width = np.diff(fields.z, axis=1)
    u, du, ddu = fields.u1, fields.dzu1, fields.dzzu1
    pieces = (
        width / 2 * (u[:, :-1] + u[:, 1:])
        + width**2 / 10 * (du[:, :-1] - du[:, 1:])
        + width**3 / 120 * (ddu[:, :-1] + ddu[:, 1:])
    )
    return np.sum(pieces, axis=1)


def flux_spread(fields: LimitFields) -> float:
    """Spread of the column fluxes across x, relative to ``max(1, |Q|)``."""
    fluxes = column_fluxes(fields)
    return float((np.max(fluxes) - np.min(fluxes)) / max(1.0, abs(fields.pressure.flux)))
