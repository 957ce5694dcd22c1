"""The integration constant of the shear-stress profile.

Across the gap the total shear stress is linear, ``phi(dz u1) = q z + kappa``. The constant
``kappa = K(h, q, s)`` is the unique root of

    F(h, q, s, kappa) = int_0^h psi(q t + kappa) dt + s,

which is what makes the velocity vanish on the upper wall. F is increasing in kappa with slope
``int_0^h psi'`` in [m h, M h], which gives an exact starting bracket for Newton.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Final

import numpy as np

from viscolub._arrays import as_output
from viscolub.constitutive import phi, psi, psi_with_prime
from viscolub.errors import InvalidGap, InvariantViolation
from viscolub.quadrature import integrate
from viscolub.rootfind import safeguarded_newton


if TYPE_CHECKING:
    from numpy.typing import ArrayLike

    from viscolub._arrays import FloatArray, Real
    from viscolub.constitutive import FluidParams

__all__ = [
    "ClosureMoments",
    "KappaQuery",
    "closure_moments",
    "dk_dh",
    "dk_dq",
    "f_eval",
    "gap_flux",
    "kappa_solve",
]

# Internal target; the documented guarantee is 1e-10 * max(1, |s|).
_KAPPA_FTOL: Final = 1e-12


@dataclass(frozen=True, eq=False)
class KappaQuery:
    """Arguments ``(h, q, s)`` of the closure; scalars or broadcastable arrays."""

    h: ArrayLike
    q: ArrayLike
    s: ArrayLike

    def __post_init__(self) -> None:
        h = np.asarray(self.h, dtype=float)
        if not np.all(h > 0):
            raise InvalidGap(f"gap height must be > 0, got min {np.min(h)}")

    def arrays(self) -> tuple[FloatArray, FloatArray, FloatArray]:
        h, q, s = np.broadcast_arrays(
            np.asarray(self.h, dtype=float), np.asarray(self.q, dtype=float), np.asarray(self.s, dtype=float)
        )
        return h, q, s


@dataclass(frozen=True, eq=False)
class ClosureMoments:
    """kappa together with the psi'-weighted moments of the gap, from one quadrature pass.

    ``i0, i1, i2`` are the integrals of ``t^k psi'(q t + kappa)`` over [0, h];
    ``flux_part`` is the integral of ``(h - t) psi(q t + kappa)``; ``top_shear`` is
    ``psi(q h + kappa)``, the shear rate on the upper wall.
    """

    h: FloatArray
    q: FloatArray
    s: FloatArray
    kappa: FloatArray
    i0: FloatArray
    i1: FloatArray
    i2: FloatArray
    flux_part: FloatArray
    top_shear: FloatArray

    @property
    def dk_dq(self) -> FloatArray:
        return -self.i1 / self.i0

    @property
    def dk_dh(self) -> FloatArray:
        return -self.top_shear / self.i0

    @property
    def gap_flux(self) -> FloatArray:
        return self.h * self.s + self.flux_part

    @property
    def gap_weight(self) -> FloatArray:
        """Integral of ``(h - t) psi'``."""
        return self.h * self.i0 - self.i1

    @property
    def mobility(self) -> FloatArray:
        """U = -int t (t + dK/dq) psi'; also the derivative of the gap flux with respect to q."""
        return -(self.i2 + self.dk_dq * self.i1)

    @property
    def orthogonality(self) -> FloatArray:
        """``int (t + dK/dq) psi'``, zero by construction of dK/dq."""
        return self.i1 + self.dk_dq * self.i0


def _shear_argument(q: FloatArray, kappa: FloatArray, t: FloatArray) -> FloatArray:
    return q[..., None] * t + kappa[..., None]


def _solve(h: FloatArray, q: FloatArray, s: FloatArray, params: FluidParams) -> FloatArray:
    params.require_invertible()
    m, big_m = params.compliance_bounds

    def residual_and_slope(kappa: FloatArray) -> tuple[FloatArray, FloatArray]:
        def integrand(t: FloatArray) -> FloatArray:
            shear, compliance = psi_with_prime(_shear_argument(q, kappa, t), params)
            return np.stack([shear, compliance])

        value, slope = integrate(integrand, 0.0, h)
        return value + s, slope

    # Exact in both the q = 0 and the s = 0 limits.
    start = np.asarray(phi(-s / h, params), dtype=float) - q * h / 2
    f0, _ = residual_and_slope(start)
    far, near = f0 / (m * h), f0 / (big_m * h)
    pad = 1e-3 * np.abs(far) + 1e-12 * np.maximum(1.0, np.abs(start))
    lower = start - np.maximum(far, near) - pad
    upper = start - np.minimum(far, near) + pad

    return safeguarded_newton(
        residual_and_slope,
        start,
        lower,
        upper,
        ftol=_KAPPA_FTOL * np.maximum(1.0, np.abs(s)),
        what="kappa",
    )


def f_eval(kq: KappaQuery, kappa: ArrayLike, params: FluidParams) -> Real:
    """``F(h, q, s, kappa)``: the upper-wall velocity for a trial kappa."""
    h, q, s = kq.arrays()
    kappa = np.broadcast_to(np.asarray(kappa, dtype=float), h.shape)
    integral = integrate(lambda t: np.asarray(psi(_shear_argument(q, kappa, t), params)), 0.0, h)
    return as_output(integral + s)


def kappa_solve(kq: KappaQuery, params: FluidParams) -> Real:
    """``K(h, q, s)``, the root of :func:`f_eval`.

    Raises:
        InvalidGap: h <= 0.
        NoConvergence: the Newton budget was exhausted.
    """
    return as_output(_solve(*kq.arrays(), params))


def closure_moments(kq: KappaQuery, params: FluidParams) -> ClosureMoments:
    h, q, s = kq.arrays()
    kappa = _solve(h, q, s, params)
    hh = h[..., None]

    def integrand(t: FloatArray) -> FloatArray:
        shear, compliance = psi_with_prime(_shear_argument(q, kappa, t), params)
        return np.stack([compliance, t * compliance, t * t * compliance, (hh - t) * shear])

    i0, i1, i2, flux_part = integrate(integrand, 0.0, h)
    top_shear = np.asarray(psi(q * h + kappa, params), dtype=float)
    return ClosureMoments(h, q, s, kappa, i0, i1, i2, flux_part, top_shear)


def dk_dq(kq: KappaQuery, params: FluidParams) -> Real:
    """``dK/dq = -int t psi' / int psi'``; strictly negative for h > 0.

    Raises:
        InvariantViolation: a non-negative value came out.
    """
    value = closure_moments(kq, params).dk_dq
    if not np.all(value < 0):
        raise InvariantViolation(f"dK/dq must be negative, got max {np.max(value)}")
    return as_output(value)


def dk_dh(kq: KappaQuery, params: FluidParams) -> Real:
    """``dK/dh = -psi(q h + kappa) / int psi'``, by implicit differentiation of F = 0."""
    return as_output(closure_moments(kq, params).dk_dh)


def gap_flux(kq: KappaQuery, params: FluidParams) -> Real:
    """Volume flux ``int_0^h u1 dz = h s + int_0^h (h - t) psi(q t + kappa) dt``."""
    return as_output(closure_moments(kq, params).gap_flux)
