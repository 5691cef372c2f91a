"""Standard normal CDF helpers and the Gaussian-DP privacy curve.

Every function broadcasts over numpy arrays and returns a Python float for
scalar input.
"""

import math

import numpy as np
from scipy import special

__all__ = [
    "DELTA_FLOOR",
    "normal_cdf",
    "normal_logcdf",
    "normal_quantile",
    "mills_bounds",
    "delta_mu",
    "log_delta_mu",
    "delta_mu_tilde",
    "log_delta_mu_tilde",
]

# Values of delta_mu below this are reported as 0.0; log_delta_mu stays exact.
DELTA_FLOOR = 1e-300

# Relative closeness of the two terms of delta_mu that triggers the log path.
_CLOSE_TERMS = 1e-6
# Above this, Phi(a) == 1 in double precision and erfcx(-a/sqrt(2)) nears overflow.
_ERFCX_LIMIT = 20.0
_SQRT2 = math.sqrt(2.0)


def _out(x):
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


def normal_cdf(t):
    """Standard normal CDF."""
    return _out(special.ndtr(np.asarray(t, dtype=float)))


def normal_logcdf(t):
    """Natural log of the standard normal CDF.

    Evaluated through the complementary error function, so the left tail
    keeps full relative precision far past the point where ``Phi`` underflows.
    """
    return _out(special.log_ndtr(np.asarray(t, dtype=float)))


def normal_quantile(p):
    """Inverse of :func:`normal_cdf` on the open interval (0, 1)."""
    p = np.asarray(p, dtype=float)
    if np.any(~((p > 0) & (p < 1))):
        raise ValueError("normal_quantile requires 0 < p < 1")
    return _out(special.ndtri(p))


def mills_bounds(t):
    """Bounds on ``sqrt(pi/2) * exp(t**2/2) * Phi(t)`` for ``t < 0``.

    Returns ``(lower, upper)`` with ``lower = 1/(-t + sqrt(t^2 + 4))`` and
    ``upper = 1/(-t + sqrt(t^2 + 8/pi))``.
    """
    t = np.asarray(t, dtype=float)
    if np.any(~(t < 0)):
        raise ValueError("mills_bounds requires t < 0")
    lower = 1.0 / (-t + np.sqrt(t * t + 4.0))
    upper = 1.0 / (-t + np.sqrt(t * t + 8.0 / np.pi))
    return _out(lower), _out(upper)


def _check_mu_eps(mu, eps):
    mu = np.asarray(mu, dtype=float)
    eps = np.asarray(eps, dtype=float)
    if np.any(~(mu > 0)):
        raise ValueError("mu must be > 0")
    if np.any(~(eps >= 0)):
        raise ValueError("eps must be >= 0")
    return np.broadcast_arrays(mu, eps)


def _log_ratio(mu, eps, a, b):
    # r = log(e^eps * Phi(b) / Phi(a)) <= 0. With log Phi(x) = -x^2/2 + log(erfcx(-x/sqrt2)/2)
    # the Gaussian exponents cancel exactly (b^2 - a^2 = 2 eps), leaving a ratio of erfcx values.
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        r_erfcx = np.log(special.erfcx(-b / _SQRT2)) - np.log(special.erfcx(-a / _SQRT2))
        r_plain = eps + special.log_ndtr(b) - special.log_ndtr(a)
    r = np.where(a < _ERFCX_LIMIT, r_erfcx, r_plain)
    return np.minimum(r, 0.0)


def _log_delta_mu(mu, eps):
    # No validation; mu > 0 and eps >= 0 assumed, arrays broadcast.
    a = mu / 2.0 - eps / mu
    b = a - mu
    r = _log_ratio(mu, eps, a, b)
    with np.errstate(divide="ignore"):
        return special.log_ndtr(a) + np.log(-np.expm1(r))


def _delta_mu(mu, eps):
    """delta_mu without validation; ``mu == 0`` maps to 0."""
    mu, eps = np.broadcast_arrays(np.asarray(mu, dtype=float), np.asarray(eps, dtype=float))
    shape = mu.shape
    mu, eps = mu.ravel(), eps.ravel()
    zero_mu = mu <= 0
    safe_mu = np.where(zero_mu, 1.0, mu)
    a = safe_mu / 2.0 - eps / safe_mu
    b = a - safe_mu
    first = special.ndtr(a)
    with np.errstate(over="ignore"):
        second = np.exp(eps + special.log_ndtr(b))
    close = (second > first * (1.0 - _CLOSE_TERMS)) | (first < 1e-290)
    out = first - second
    if np.any(close):
        # Only the cancelling entries take the log path.
        r = _log_ratio(safe_mu[close], eps[close], a[close], b[close])
        out[close] = np.exp(special.log_ndtr(a[close])) * -np.expm1(r)
    out = np.clip(out, 0.0, 1.0)
    out[(out < DELTA_FLOOR) | zero_mu] = 0.0
    return out.reshape(shape)


def delta_mu(mu, eps):
    """Privacy profile of mu-GDP: ``Phi(-eps/mu + mu/2) - e^eps Phi(-eps/mu - mu/2)``.

    The subtraction never cancels catastrophically: when the two terms agree
    to six digits, the value is rebuilt as ``Phi(a) * (1 - exp(r))`` with the
    log-ratio ``r`` formed from scaled complementary error functions. Results
    below ``DELTA_FLOOR`` are returned as exact zeros; use
    :func:`log_delta_mu` to see them.
    """
    mu, eps = _check_mu_eps(mu, eps)
    return _out(_delta_mu(mu, eps))


def log_delta_mu(mu, eps):
    """Natural log of :func:`delta_mu`, finite far into the tail."""
    mu, eps = _check_mu_eps(mu, eps)
    return _out(_log_delta_mu(mu, eps))


def _tilde_a(mu, eps):
    mu = np.asarray(mu, dtype=float)
    eps = np.asarray(eps, dtype=float)
    if np.any(~(mu > 0)):
        raise ValueError("mu must be > 0")
    a = -eps / mu + mu / 2.0
    if np.any(a == 0):
        raise ValueError("delta_mu_tilde is singular at eps = mu**2 / 2")
    return mu, a


def log_delta_mu_tilde(mu, eps):
    """Log of the large-eps surrogate ``mu exp(-a^2/2) / (sqrt(2 pi) a^2)``."""
    mu, a = _tilde_a(mu, eps)
    return _out(np.log(mu) - 0.5 * a * a - 0.5 * np.log(2 * np.pi) - 2.0 * np.log(np.abs(a)))


def delta_mu_tilde(mu, eps):
    """Asymptotic surrogate of :func:`delta_mu`; their ratio tends to 1 as eps grows."""
    mu, a = _tilde_a(mu, eps)
    return _out(mu * np.exp(-0.5 * a * a) / (math.sqrt(2 * math.pi) * a * a))
