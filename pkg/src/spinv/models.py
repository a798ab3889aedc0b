"""Built-in models: Gaussian, normal inverse Gaussian, Merton jump diffusion.

The NIG uses the variance-mixture parametrization

    X = mu + gamma*W + sqrt(W)*Z,   W ~ IG with E(W) = sqrt(chi/psi),

whose CGF is K(t) = t*mu + sqrt(chi)*(sqrt(psi) - sqrt(psi - t^2 - 2*t*gamma)).
That difference of square roots cancels catastrophically when psi is large
(the near-Gaussian regime), so it is evaluated as

    sqrt(chi) * u / (sqrt(psi) + sqrt(psi - u)),   u = t^2 + 2*t*gamma,

which is exact and stable for all psi. Along the vertical contours used by
the inversion integral, re(psi - u) = D(re z) + im(z)^2 > 0, so the
principal square root is the correct analytic continuation.

The MJD transition is the conditional law of the log price X_t given
X_0 = x0 over a step dt, a Gaussian increment plus a compound Poisson sum
of Gaussian jumps; its CGF is entire.
"""

import math
from dataclasses import dataclass

import numpy as np

from .bessel import bessel_k1_scaled
from .cgf import CgfModel, DomainInterval
from .errors import DomainError, ValidationError

_LOG_WEIGHT_FLOOR = math.log(1e-14)


@dataclass(frozen=True)
class GaussianParams:
    mu: float
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0.0:
            raise ValidationError(f"sigma must be positive, got {self.sigma}")


@dataclass(frozen=True)
class NigParams:
    chi: float
    psi: float
    mu: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        if not (self.chi > 0.0 and self.psi > 0.0):
            raise ValidationError(
                f"chi and psi must be positive, got chi={self.chi}, psi={self.psi}"
            )


@dataclass(frozen=True)
class MjdParams:
    r: float
    sigma: float
    lam: float
    mu_j: float
    nu: float

    def __post_init__(self):
        if not self.sigma > 0.0:
            raise ValidationError(f"sigma must be positive, got {self.sigma}")
        if self.lam < 0.0:
            raise ValidationError(f"lambda must be nonnegative, got {self.lam}")
        if not self.nu > 0.0:
            raise ValidationError(f"nu must be positive, got {self.nu}")

    @property
    def jump_compensator(self) -> float:
        """k = E(Y) - 1 for log-normal jump sizes Y."""
        return math.exp(self.mu_j + 0.5 * self.nu**2) - 1.0


class Gaussian(CgfModel):
    """N(mu, sigma^2); K(t) = mu*t + sigma^2 t^2 / 2 on all of R."""

    def __init__(self, params: GaussianParams):
        self.params = params
        self._var = params.sigma**2

    def k(self, t):
        return self.params.mu * t + 0.5 * self._var * t * t

    def k_complex(self, z):
        z = np.asarray(z, dtype=complex)
        return self.params.mu * z + 0.5 * self._var * z * z

    def k1(self, t):
        return self.params.mu + self._var * t

    def k2(self, t):
        return self._var + 0.0 * t

    def domain(self) -> DomainInterval:
        return DomainInterval(-np.inf, np.inf)


class Nig(CgfModel):
    """Normal inverse Gaussian under the (chi, psi, mu, gamma) parametrization."""

    def __init__(self, params: NigParams):
        self.params = params
        p = params
        self._half_width = math.sqrt(p.gamma**2 + p.psi)
        self._sqrt_chi = math.sqrt(p.chi)
        self._sqrt_psi = math.sqrt(p.psi)

    def _d(self, t):
        # D(t) = psi - t^2 - 2 t gamma, positive exactly on the domain
        p = self.params
        d = p.psi - t * t - 2.0 * t * p.gamma
        if np.any(np.asarray(d) <= 0.0):
            raise DomainError(f"argument outside NIG CGF domain {self.domain()}")
        return d

    def k(self, t):
        t = np.asarray(t, dtype=float)
        u = t * t + 2.0 * t * self.params.gamma
        val = t * self.params.mu + self._sqrt_chi * u / (
            self._sqrt_psi + np.sqrt(self._d(t))
        )
        return val if val.ndim else float(val)

    def k_complex(self, z):
        z = np.asarray(z, dtype=complex)
        u = z * z + 2.0 * z * self.params.gamma
        return z * self.params.mu + self._sqrt_chi * u / (
            self._sqrt_psi + np.sqrt(self.params.psi - u)
        )

    def k1(self, t):
        t = np.asarray(t, dtype=float)
        val = self.params.mu + self._sqrt_chi * (t + self.params.gamma) / np.sqrt(
            self._d(t)
        )
        return val if val.ndim else float(val)

    def k2(self, t):
        t = np.asarray(t, dtype=float)
        val = self._sqrt_chi * (self.params.psi + self.params.gamma**2) * self._d(t) ** -1.5
        return val if val.ndim else float(val)

    def domain(self) -> DomainInterval:
        g = self.params.gamma
        return DomainInterval(-g - self._half_width, -g + self._half_width)


class MjdTransition(CgfModel):
    """Conditional CGF of the MJD log price after one step of length dt."""

    def __init__(self, params: MjdParams, x0: float = 0.0, dt: float = 1.0 / 252.0):
        if not dt > 0.0:
            raise ValidationError(f"dt must be positive, got {dt}")
        self.params = params
        self.x0 = float(x0)
        self.dt = float(dt)
        p = params
        # deterministic part of the increment
        self._base = self.x0 + self.dt * (p.r - p.lam * p.jump_compensator - 0.5 * p.sigma**2)
        self._var_diff = p.sigma**2 * self.dt
        self._lam_dt = p.lam * self.dt

    def _jump_exponent(self, z):
        p = self.params
        return z * p.mu_j + 0.5 * p.nu**2 * z * z

    def k(self, t):
        t = np.asarray(t, dtype=float)
        val = (
            t * self._base
            + 0.5 * self._var_diff * t * t
            + self._lam_dt * (np.exp(self._jump_exponent(t)) - 1.0)
        )
        return val if val.ndim else float(val)

    def k_complex(self, z):
        z = np.asarray(z, dtype=complex)
        return (
            z * self._base
            + 0.5 * self._var_diff * z * z
            + self._lam_dt * (np.exp(self._jump_exponent(z)) - 1.0)
        )

    def k1(self, t):
        t = np.asarray(t, dtype=float)
        p = self.params
        val = (
            self._base
            + self._var_diff * t
            + self._lam_dt * (p.mu_j + p.nu**2 * t) * np.exp(self._jump_exponent(t))
        )
        return val if val.ndim else float(val)

    def k2(self, t):
        t = np.asarray(t, dtype=float)
        p = self.params
        val = self._var_diff + self._lam_dt * (
            (p.mu_j + p.nu**2 * t) ** 2 + p.nu**2
        ) * np.exp(self._jump_exponent(t))
        return val if val.ndim else float(val)

    def domain(self) -> DomainInterval:
        return DomainInterval(-np.inf, np.inf)


def gaussian_log_density(p: GaussianParams, x):
    x = np.asarray(x, dtype=float)
    val = -0.5 * np.log(2.0 * np.pi * p.sigma**2) - (x - p.mu) ** 2 / (2.0 * p.sigma**2)
    return val if val.ndim else float(val)


def nig_exact_log_density(p: NigParams, x):
    """Exact NIG log-density through the modified Bessel function K1.

    p(x) = sqrt(chi*(psi+gamma^2)) * K1(sqrt((chi+(x-mu)^2)*(psi+gamma^2)))
           / (pi * sqrt(chi+(x-mu)^2)) * exp(sqrt(chi*psi) + (x-mu)*gamma)

    computed in log space with the scaled Bessel function so the e^-z
    factor never underflows.
    """
    x = np.asarray(x, dtype=float)
    a2 = p.psi + p.gamma**2
    q = p.chi + (x - p.mu) ** 2
    z = np.sqrt(q * a2)
    val = (
        0.5 * np.log(p.chi * a2)
        + np.log(bessel_k1_scaled(z))
        - z
        - np.log(np.pi)
        - 0.5 * np.log(q)
        + math.sqrt(p.chi * p.psi)
        + (x - p.mu) * p.gamma
    )
    return val if val.ndim else float(val)


def mjd_truncated_log_density(m: MjdTransition, x, max_jumps: int = 20):
    """Poisson-Gaussian mixture density of the MJD transition, truncated.

    Components are accumulated from zero jumps upward; the sum stops at
    max_jumps, or earlier once the Poisson weight has fallen below 1e-14
    past the mode of the jump-count distribution. Accumulation is in log
    space so deep-tail evaluations stay finite.
    """
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    p = m.params
    base = m.x0 + m.dt * (p.r - p.lam * p.jump_compensator - 0.5 * p.sigma**2)
    lam_dt = p.lam * m.dt
    if lam_dt == 0.0:
        out = gaussian_log_density(
            GaussianParams(mu=base, sigma=p.sigma * math.sqrt(m.dt)), x
        )
        return float(out[0]) if scalar else out
    rows = []
    log_w = -lam_dt
    i = 0
    while True:
        v = p.sigma**2 * m.dt + i * p.nu**2
        rows.append(log_w - 0.5 * np.log(2.0 * np.pi * v) - (x - base - i * p.mu_j) ** 2 / (2.0 * v))
        if i >= max_jumps:
            break
        log_w = log_w + math.log(lam_dt) - math.log(i + 1.0)
        if log_w < _LOG_WEIGHT_FLOOR and i + 1 > lam_dt:
            break
        i += 1
    stacked = np.vstack(rows)
    top = stacked.max(axis=0)
    out = top + np.log(np.exp(stacked - top).sum(axis=0))
    return float(out[0]) if scalar else out


def nig_moments(p: NigParams):
    """(mean, variance) from the CGF: K'(0) and K''(0) in closed form."""
    ratio = math.sqrt(p.chi / p.psi)
    mean = p.mu + p.gamma * ratio
    variance = ratio * (1.0 + p.gamma**2 / p.psi)
    return mean, variance


def simulate_nig(p: NigParams, n: int, seed: int):
    """n i.i.d. NIG draws via the mixture representation.

    Draws W from the inverse Gaussian with mean sqrt(chi/psi) and shape chi
    (numpy's wald sampler), then X = mu + gamma*W + sqrt(W)*Z. Draw order
    is fixed (all W first, then all Z) so output is seed-deterministic.
    """
    if n < 1:
        raise ValidationError("n must be at least 1")
    rng = np.random.default_rng(seed)
    w = rng.wald(math.sqrt(p.chi / p.psi), p.chi, size=n)
    z = rng.standard_normal(n)
    return p.mu + p.gamma * w + np.sqrt(w) * z


def simulate_mjd_path(p: MjdParams, x0: float, dt: float, n_steps: int, seed: int):
    """Log-price path of length n_steps + 1 starting at x0.

    Each increment is dt*(r - lam*k - sigma^2/2) + sigma*sqrt(dt)*Z plus a
    compound Poisson jump sum, drawn as N ~ Poisson(lam*dt) and the jump
    aggregate N*mu_j + nu*sqrt(N)*Z'. Draw order: diffusion normals, jump
    counts, jump normals.
    """
    if n_steps < 1:
        raise ValidationError("n_steps must be at least 1")
    if not dt > 0.0:
        raise ValidationError(f"dt must be positive, got {dt}")
    rng = np.random.default_rng(seed)
    z_diff = rng.standard_normal(n_steps)
    counts = rng.poisson(p.lam * dt, size=n_steps)
    z_jump = rng.standard_normal(n_steps)
    drift = dt * (p.r - p.lam * p.jump_compensator - 0.5 * p.sigma**2)
    increments = (
        drift
        + p.sigma * math.sqrt(dt) * z_diff
        + p.mu_j * counts
        + p.nu * np.sqrt(counts) * z_jump
    )
    path = np.empty(n_steps + 1)
    path[0] = x0
    path[1:] = x0 + np.cumsum(increments)
    return path
