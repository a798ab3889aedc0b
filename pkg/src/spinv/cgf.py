"""Cumulant generating function interface, tilting, and the standardized tilted CF.

Exponentially tilting X by tau in the interior of Omega gives a variable
X(tau) with CGF K(t + tau) - K(tau). Standardizing the tilted variable so
that it has mean zero and unit variance at t = 0 yields the characteristic
function the inversion integral consumes:

    cf(s) = exp( -K(tau) - i*s*x0/sqrt(K''(tau)) + K(tau + i*s/sqrt(K''(tau))) )

Models implement K directly over complex arguments; the inversion contour
runs vertically through the tilt point, where the real part of the CGF
argument stays fixed at tau.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InversionError


@dataclass(frozen=True)
class DomainInterval:
    """Open interval of CGF convergence; must contain 0."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (self.lo < 0.0 < self.hi):
            raise DomainError(
                f"CGF domain ({self.lo}, {self.hi}) must contain 0 in its interior"
            )

    def contains(self, t) -> bool:
        return self.lo < t < self.hi


class CgfModel(ABC):
    """A distribution known through its cumulant generating function.

    Implementations provide K and its first two derivatives over the real
    domain, plus K over complex arguments whose real part lies inside the
    domain. All evaluation methods are vectorized over their argument.
    """

    @abstractmethod
    def k(self, t):
        """K(t) for real t inside the domain."""

    @abstractmethod
    def k_complex(self, z):
        """K(z) for complex z with re(z) inside the domain."""

    @abstractmethod
    def k1(self, t):
        """K'(t)."""

    @abstractmethod
    def k2(self, t):
        """K''(t), strictly positive on the domain."""

    @abstractmethod
    def domain(self) -> DomainInterval:
        """Open interval on which K is finite."""

    def mean(self) -> float:
        return float(self.k1(0.0))

    def variance(self) -> float:
        return float(self.k2(0.0))


class TiltedModel(CgfModel):
    """Exponential tilt of a base model: K_tilt(t) = K(t + tau) - K(tau)."""

    def __init__(self, base: CgfModel, tau: float):
        tau = float(tau)
        if not base.domain().contains(tau):
            raise DomainError(f"tilt {tau} outside CGF domain {base.domain()}")
        self.base = base
        self.tau = tau
        self._k_tau = float(base.k(tau))

    def k(self, t):
        return self.base.k(t + self.tau) - self._k_tau

    def k_complex(self, z):
        return self.base.k_complex(z + self.tau) - self._k_tau

    def k1(self, t):
        return self.base.k1(t + self.tau)

    def k2(self, t):
        return self.base.k2(t + self.tau)

    def domain(self) -> DomainInterval:
        d = self.base.domain()
        return DomainInterval(d.lo - self.tau, d.hi - self.tau)


def char_fn(model: CgfModel, s):
    """Characteristic function phi(s) = exp(K(i s)), vectorized over s."""
    val = np.exp(model.k_complex(1j * np.asarray(s, dtype=float)))
    if not np.all(np.isfinite(val.real)) or not np.all(np.isfinite(val.imag)):
        bad = np.atleast_1d(s)[np.flatnonzero(~np.isfinite(np.atleast_1d(val)))[0]]
        raise InversionError(f"characteristic function not finite at s = {bad}")
    return val


def tilt(model: CgfModel, tau: float) -> TiltedModel:
    """Exponentially tilted model; tau must lie inside the base domain."""
    return TiltedModel(model, tau)


def standardized_tilted_cf(model: CgfModel, tau_hat: float, x0: float, s):
    """CF of the standardized tilted variable, evaluated at real s.

    With tau_hat solving K'(tau_hat) = x0, this is the CF of
    (X(tau_hat) - x0) / sqrt(K''(tau_hat)); its value at s = 0 is 1.
    """
    k2 = float(model.k2(tau_hat))
    if not k2 > 0.0:
        raise DomainError(f"K'' must be positive at the tilt, got {k2}")
    rk2 = np.sqrt(k2)
    s = np.asarray(s, dtype=float)
    val = np.exp(
        -model.k(tau_hat) - 1j * s * x0 / rk2 + model.k_complex(tau_hat + 1j * s / rk2)
    )
    if not np.all(np.isfinite(np.atleast_1d(val.real))):
        raise InversionError("standardized tilted CF not finite")
    return val
