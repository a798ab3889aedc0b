"""Scaled modified Bessel function of the second kind, order one.

The NIG density needs K1 evaluated at arguments up to sqrt(chi*psi) plus a
term growing linearly in |x|, which underflows e^-z long before the density
itself is zero. Everything here therefore works with the scaled form

    k1e(x) = exp(x) * K1(x),

combining the ascending series (A&S 9.6.11) for small arguments with
Gauss-Legendre quadrature of the integral representation

    exp(x) * K1(x) = int_0^inf exp(-x*(cosh t - 1)) * cosh t dt

for large ones. The split point is x = 2. The integral tail beyond
x*(cosh T - 1) = 45 is below exp(-45) relative, so a fixed truncation
depth covers the whole range; the integrand is analytic and of
essentially fixed shape under this scaling, so one 80-node rule holds
the relative error near 1e-13 for arbitrarily large x.
"""

import numpy as np

from .errors import DomainError

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(80)

# exp(-45) relative truncation of the cosh integral
_TAIL_DEPTH = 45.0


def _k1e_series(x):
    """Ascending series for x <= 2, scaled by exp(x).

    K1(x) = 1/x + log(x/2) I1(x)
            - (x/4) sum_k [psi(k+1) + psi(k+2)] (x^2/4)^k / (k! (k+1)!)
    """
    q = 0.25 * x * x
    term = np.ones_like(x)
    i1_sum = np.zeros_like(x)
    k1_sum = np.zeros_like(x)
    psi_a = -np.euler_gamma
    psi_b = 1.0 - np.euler_gamma
    # q <= 1 here, terms fall like 1/(k!(k+1)!); 36 terms is far past double precision
    for k in range(36):
        i1_sum += term
        k1_sum += (psi_a + psi_b) * term
        term *= q / ((k + 1.0) * (k + 2.0))
        psi_a += 1.0 / (k + 1.0)
        psi_b += 1.0 / (k + 2.0)
    i1 = 0.5 * x * i1_sum
    k1 = 1.0 / x + np.log(0.5 * x) * i1 - 0.25 * x * k1_sum
    return np.exp(x) * k1


def _k1e_integral(x):
    """Gauss-Legendre on [0, T] with x*(cosh T - 1) = tail depth."""
    t_max = np.arccosh(1.0 + _TAIL_DEPTH / x)
    # map nodes from (-1, 1) onto (0, t_max), one column per x
    t = 0.5 * np.outer(t_max, _GL_NODES + 1.0)
    ch = np.cosh(t)
    vals = np.exp(-x[:, None] * (ch - 1.0)) * ch
    return 0.5 * t_max * (vals @ _GL_WEIGHTS)


def bessel_k1_scaled(x):
    """exp(x)*K1(x) for x > 0, elementwise on arrays.

    Relative error is below 1e-10 over at least [1e-6, 700]; the integral
    branch has no upper range limit.
    """
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if arr.size and (np.any(arr <= 0.0) or np.any(~np.isfinite(arr))):
        raise DomainError("bessel_k1_scaled requires x > 0")
    out = np.empty_like(arr)
    small = arr <= 2.0
    if np.any(small):
        out[small] = _k1e_series(arr[small])
    if np.any(~small):
        out[~small] = _k1e_integral(arr[~small])
    return float(out[0]) if scalar else out
