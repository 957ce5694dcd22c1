"""Scalar constitutive relations of the thin-film Oldroyd fluid.

At leading order the total shear stress is a function of the shear rate alone,

    phi(t) = nu (1 - r) t + nu r t / (1 + lambda*^2 t^2),

made of a viscous part and the elastic shear stress ``sigma12``. For r < 8/9 the slope of
``phi`` stays within [nu (1 - 9r/8), nu], so ``phi`` has a smooth increasing inverse ``psi``.
All functions are vectorised over numpy arrays and return floats for scalar input.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Final

import numpy as np

from viscolub._arrays import as_output
from viscolub.errors import InvalidParameters, MonotonicityViolated, NoConvergence, RheologyOutOfRange
from viscolub.rootfind import expand_bracket, safeguarded_newton


if TYPE_CHECKING:
    from numpy.typing import ArrayLike

    from viscolub._arrays import FloatArray, Real

__all__ = [
    "INVERTIBILITY_LIMIT",
    "REYNOLDS_LIMIT",
    "FluidParams",
    "phi",
    "phi_prime",
    "psi",
    "psi_prime",
    "psi_with_prime",
    "sigma12_of_shear",
    "sigma12_slope",
    "sigma_diag_of_shear",
    "stress_antiderivative",
]

INVERTIBILITY_LIMIT: Final = 8 / 9
REYNOLDS_LIMIT: Final = 2 / 9

# Internal target; the documented guarantee is 1e-12 * max(1, |y|).
_PSI_FTOL: Final = 1e-14


@dataclass(frozen=True)
class FluidParams:
    """Rheological and kinematic constants of the limit problem.

    ``rho`` is carried for rescaling/reporting only; the limit system does not use it.
    """

    nu: float
    r: float
    lambda_star: float
    s: float = 0.0
    rho: float = 1.0

    def __post_init__(self) -> None:
        problems = [
            f"{field.name} must be finite, got {getattr(self, field.name)}"
            for field in dataclasses.fields(self)
            if not math.isfinite(getattr(self, field.name))
        ]
        if not self.nu > 0:
            problems.append(f"nu must be > 0, got {self.nu}")
        if not 0 <= self.r < 1:
            problems.append(f"r must be in [0, 1), got {self.r}")
        if not self.lambda_star >= 0:
            problems.append(f"lambda_star must be >= 0, got {self.lambda_star}")
        if not self.rho > 0:
            problems.append(f"rho must be > 0, got {self.rho}")
        if problems:
            raise InvalidParameters("; ".join(problems))

    def replace(self, **changes: float) -> FluidParams:
        return dataclasses.replace(self, **changes)

    @property
    def invertible(self) -> bool:
        return self.r < INVERTIBILITY_LIMIT

    @property
    def reynolds_admissible(self) -> bool:
        return self.r < REYNOLDS_LIMIT

    @property
    def newtonian(self) -> bool:
        return self.lambda_star == 0 or self.r == 0

    @property
    def slope_floor(self) -> float:
        """Lower bound nu (1 - 9r/8) of phi'."""
        return self.nu * (1 - 9 * self.r / 8)

    @property
    def compliance_bounds(self) -> tuple[float, float]:
        """``(m, M) = (1/nu, 1/(nu (1 - 9r/8)))``, the bounds of psi'."""
        floor = self.slope_floor
        return 1 / self.nu, (1 / floor if floor > 0 else math.inf)

    @property
    def chi(self) -> float:
        return self.nu / 6 * math.sqrt(self.r * (1 - self.r))

    def require_invertible(self) -> None:
        if not self.invertible:
            raise MonotonicityViolated(f"phi is not monotone for r={self.r} (needs r < 8/9)")

    def require_reynolds(self) -> None:
        if not self.reynolds_admissible:
            raise RheologyOutOfRange(f"U may change sign for r={self.r} (needs r < 2/9)")


def _sigma12(t: FloatArray, params: FluidParams) -> FloatArray:
    lam2 = params.lambda_star**2
    return params.nu * params.r * t / (1 + lam2 * t * t)


def _sigma12_slope(t: FloatArray, params: FluidParams) -> FloatArray:
    lam2t2 = params.lambda_star**2 * t * t
    return params.nu * params.r * (1 - lam2t2) / (1 + lam2t2) ** 2


def _phi(t: FloatArray, params: FluidParams) -> FloatArray:
    return params.nu * (1 - params.r) * t + _sigma12(t, params)


def _phi_prime(t: FloatArray, params: FluidParams) -> FloatArray:
    return params.nu * (1 - params.r) + _sigma12_slope(t, params)


def _psi(y: FloatArray, params: FluidParams) -> FloatArray:
    params.require_invertible()
    center = y / params.nu
    if params.newtonian:
        return center

    def residual(t: FloatArray) -> FloatArray:
        return _phi(t, params) - y

    m, big_m = params.compliance_bounds
    radius = 1.01 * np.abs(y) * (big_m - m) + 1e-12 * np.maximum(1.0, np.abs(center))
    bracket = expand_bracket(residual, center, radius)
    if bracket is None:
        raise NoConvergence("psi: no sign change found while expanding the bracket")

    lower, upper = bracket
    return safeguarded_newton(
        lambda t: (residual(t), _phi_prime(t, params)),
        center,
        lower,
        upper,
        ftol=_PSI_FTOL * np.maximum(1.0, np.abs(y)),
        what="psi",
    )


def phi(t: ArrayLike, params: FluidParams) -> Real:
    """Total shear stress for shear rate ``t``."""
    return as_output(_phi(np.asarray(t, dtype=float), params))


def phi_prime(t: ArrayLike, params: FluidParams) -> Real:
    return as_output(_phi_prime(np.asarray(t, dtype=float), params))


def psi(y: ArrayLike, params: FluidParams) -> Real:
    """Shear rate producing total shear stress ``y``; the inverse of :func:`phi`.

    Safeguarded Newton on ``phi(t) = y`` starting from the viscous guess ``y / nu``, inside a
    bracket grown geometrically around it. Exact ``y / nu`` for Newtonian parameters.

    Raises:
        MonotonicityViolated: r >= 8/9.
        NoConvergence: the iteration budget was exhausted.
    """
    return as_output(_psi(np.asarray(y, dtype=float), params))


def psi_with_prime(y: ArrayLike, params: FluidParams) -> tuple[FloatArray, FloatArray]:
    """``(psi(y), psi'(y))`` as arrays, with ``psi' = 1 / phi'(psi)``."""
    shear = _psi(np.asarray(y, dtype=float), params)
    return shear, 1 / _phi_prime(shear, params)


def psi_prime(y: ArrayLike, params: FluidParams) -> Real:
    return as_output(psi_with_prime(y, params)[1])


def sigma12_of_shear(dzu1: ArrayLike, params: FluidParams) -> Real:
    """Elastic shear stress ``nu r t / (1 + lambda*^2 t^2)``."""
    return as_output(_sigma12(np.asarray(dzu1, dtype=float), params))


def sigma12_slope(dzu1: ArrayLike, params: FluidParams) -> Real:
    """Derivative of :func:`sigma12_of_shear` with respect to the shear rate."""
    return as_output(_sigma12_slope(np.asarray(dzu1, dtype=float), params))


def sigma_diag_of_shear(dzu1: ArrayLike, params: FluidParams) -> tuple[Real, Real]:
    """Normal stresses ``(sigma11, sigma22)`` with ``sigma22 = -sigma11 = lambda* t sigma12``."""
    t = np.asarray(dzu1, dtype=float)
    sigma22 = params.lambda_star * t * _sigma12(t, params)
    return as_output(-sigma22), as_output(sigma22)


def stress_antiderivative(t: ArrayLike, params: FluidParams) -> Real:
    """Antiderivative of phi vanishing at 0.

    Integrals of psi follow by Legendre transform: the integral of psi over [a, b] is
    ``[y psi(y) - Phi(psi(y))]`` evaluated between a and b.
    """
    t = np.asarray(t, dtype=float)
    viscous = params.nu * (1 - params.r) * t * t / 2
    if params.lambda_star == 0:
        return as_output(viscous + params.nu * params.r * t * t / 2)
    lam2 = params.lambda_star**2
    return as_output(viscous + params.nu * params.r / (2 * lam2) * np.log1p(lam2 * t * t))
