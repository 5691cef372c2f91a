"""Privacy profiles and the exact implication order on (eps, delta)-DP.

A privacy profile maps eps >= 0 to the smallest delta for which a mechanism
is (eps, delta)-DP. Profiles here are vectorized callables: they accept a
scalar or a numpy array of eps values.
"""

import csv
import itertools
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

import numpy as np
from scipy import optimize, special

from . import specfun

__all__ = [
    "PrivacyPoint",
    "PrivacyProfile",
    "TradeoffEquation",
    "ProfileFormatError",
    "RefinementWarning",
    "implied_delta",
    "implies",
    "worst_case_mechanism_delta",
    "builtin_profile",
    "eval_profile",
    "laplace_profile",
    "sgd_profile",
    "icea_profile",
    "pure_dp_profile",
    "gaussian_profile",
    "tabulated_profile",
    "load_profile_csv",
    "refine",
    "min_noise_for_target",
]

_CHECK_GRID = np.concatenate([[0.0], np.geomspace(1e-3, 1e3, 31)])


class ProfileFormatError(ValueError):
    """A tabulated profile file is malformed; ``line`` is 1-based."""

    def __init__(self, message, line=None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


class RefinementWarning(UserWarning):
    pass


@dataclass(frozen=True)
class PrivacyPoint:
    eps: float
    delta: float

    def __post_init__(self):
        if not self.eps >= 0:
            raise ValueError(f"eps must be >= 0, got {self.eps}")
        if not 0 <= self.delta <= 1:
            raise ValueError(f"delta must lie in [0, 1], got {self.delta}")


def implied_delta(eps0, delta0, eps):
    """Smallest delta such that (eps0, delta0)-DP implies (eps, delta)-DP.

    Equals ``delta0 + (1 - delta0) (e^eps0 - e^eps)^+ / (1 + e^eps0)``,
    written in a form that does not overflow for large eps0.
    """
    eps0 = np.asarray(eps0, dtype=float)
    delta0 = np.asarray(delta0, dtype=float)
    eps = np.asarray(eps, dtype=float)
    frac = np.where(eps < eps0, -np.expm1(np.minimum(eps - eps0, 0.0)) / (1.0 + np.exp(-eps0)), 0.0)
    return specfun._out(delta0 + (1.0 - delta0) * frac)


def implies(source: PrivacyPoint, target: PrivacyPoint) -> bool:
    """Whether (source.eps, source.delta)-DP implies (target.eps, target.delta)-DP."""
    if source.delta >= 1:
        raise ValueError("source.delta must be < 1")
    return bool(target.delta >= implied_delta(source.eps, source.delta, target.eps))


def worst_case_mechanism_delta(eps0, delta0, eps):
    """Exact profile, at ``eps``, of the four-outcome (eps0, delta0)-DP mechanism.

    Enumerates every event over the four outcomes in both dataset orders and
    returns ``max(P_s(E) - e^eps P_{1-s}(E))``. Serves as a brute-force check
    on :func:`implied_delta`.
    """
    # both outcome weights computed directly; 1 - alpha would cancel for large eps0
    alpha, beta = float(special.expit(eps0)), float(special.expit(-eps0))
    p0 = (delta0, 0.0, (1 - delta0) * alpha, (1 - delta0) * beta)
    p1 = (0.0, delta0, (1 - delta0) * beta, (1 - delta0) * alpha)
    scale = math.exp(eps)
    best = 0.0
    for mask in itertools.product((0, 1), repeat=4):
        for p, q in ((p0, p1), (p1, p0)):
            pe = sum(m * x for m, x in zip(mask, p))
            qe = sum(m * x for m, x in zip(mask, q))
            best = max(best, pe - scale * qe)
    return best


def _finite_difference(fn, eps):
    # Five-point central stencil with relative step; one-sided near eps = 0.
    eps = np.asarray(eps, dtype=float)
    h = 1e-5 * np.maximum(eps, 1.0)
    central = (-fn(eps + 2 * h) + 8 * fn(eps + h) - 8 * fn(np.maximum(eps - h, 0)) + fn(np.maximum(eps - 2 * h, 0))) / (12 * h)
    forward = (-3 * fn(eps) + 4 * fn(eps + h) - fn(eps + 2 * h)) / (2 * h)
    return np.where(eps >= 2 * h, central, forward)


@dataclass(frozen=True)
class PrivacyProfile:
    """A non-increasing map eps -> delta on [0, inf).

    ``delta_fn`` must be vectorized. ``log_delta_fn`` and ``derivative_fn``
    are optional analytic companions; ``tail_limit`` holds the analytic value
    of ``sqrt(lim eps^2 / (-2 log delta(eps)))`` when the family has one.
    """

    delta_fn: Callable[[np.ndarray], np.ndarray]
    family: str = "custom"
    params: Mapping[str, float] = field(default_factory=dict)
    log_delta_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    derivative_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    tail_limit: Optional[float] = None
    refined: bool = False

    def __post_init__(self):
        vals = np.asarray(self.delta_fn(_CHECK_GRID), dtype=float)
        if np.any(vals < 0) or np.any(vals > 1) or np.any(np.isnan(vals)):
            raise ValueError(f"{self.family} profile leaves [0, 1]")
        if np.any(np.diff(vals) > 1e-12):
            raise ValueError(f"{self.family} profile is not non-increasing")

    def __call__(self, eps):
        eps = np.asarray(eps, dtype=float)
        if np.any(eps < 0):
            raise ValueError("profiles are defined for eps >= 0")
        return specfun._out(np.clip(self.delta_fn(eps), 0.0, 1.0))

    def log_delta(self, eps):
        eps = np.asarray(eps, dtype=float)
        if self.log_delta_fn is not None:
            return specfun._out(np.minimum(self.log_delta_fn(eps), 0.0))
        with np.errstate(divide="ignore"):
            return specfun._out(np.log(np.clip(self.delta_fn(eps), 0.0, 1.0)))

    def derivative(self, eps):
        eps = np.asarray(eps, dtype=float)
        if self.derivative_fn is not None:
            return specfun._out(self.derivative_fn(eps))
        return specfun._out(_finite_difference(self.delta_fn, eps))

    @property
    def label(self):
        args = ", ".join(f"{k}={v:g}" for k, v in self.params.items())
        return f"{self.family}({args})" + (" refined" if self.refined else "")


def eval_profile(p: PrivacyProfile, eps):
    return p(eps)


@dataclass(frozen=True)
class TradeoffEquation:
    """A published privacy-utility trade-off ``sigma = g(eps, delta)``.

    Families and the parameters they read:

    * ``laplace``: sensitivity, scale (``b = sensitivity / eps``)
    * ``sgd_like``: A, B, sigma (``sigma = A sqrt(log(B/delta)) / eps``)
    * ``icea``: m, n (``m > 10 log(n / (eps delta))``)
    * ``pure_dp``: eps0
    * ``log_ratio``: C (``sigma = -C log(delta) / eps``)
    """

    family: str
    sensitivity: float = 1.0
    scale: Optional[float] = None
    A: Optional[float] = None
    B: Optional[float] = None
    sigma: Optional[float] = None
    m: Optional[int] = None
    n: Optional[int] = None
    eps0: Optional[float] = None
    C: Optional[float] = None

    def __post_init__(self):
        required = {
            "laplace": ("sensitivity", "scale"),
            "sgd_like": ("A", "B", "sigma"),
            "icea": ("m", "n"),
            "pure_dp": ("eps0",),
            "log_ratio": ("C",),
        }
        if self.family not in required:
            raise ValueError(f"unknown trade-off family {self.family!r}")
        for name in required[self.family]:
            value = getattr(self, name)
            if value is None or not value > 0:
                raise ValueError(f"{self.family}: parameter {name} must be > 0, got {value}")
        if self.family == "icea" and (int(self.m) != self.m or int(self.n) != self.n):
            raise ValueError("icea: m and n must be integers")

    def noise(self, eps, delta):
        """Noise level needed for (eps, delta)-DP under this trade-off."""
        eps = np.asarray(eps, dtype=float)
        delta = np.asarray(delta, dtype=float)
        if self.family == "laplace":
            out = self.sensitivity / eps
        elif self.family == "sgd_like":
            out = self.A * np.sqrt(np.log(self.B / delta)) / eps
        elif self.family == "icea":
            out = 10.0 * np.log(self.n / (eps * delta))
        elif self.family == "log_ratio":
            out = -self.C * np.log(delta) / eps
        else:
            raise ValueError("pure_dp has no noise trade-off")
        return specfun._out(out)


def laplace_profile(eps_pure=None, *, sensitivity=1.0, scale=None) -> PrivacyProfile:
    """Exact profile of the Laplace mechanism: ``max(1 - exp(eps/2 - r/2), 0)``, r = sensitivity/scale.

    Give either ``eps_pure`` (= sensitivity/scale) or ``scale``.
    """
    if (eps_pure is None) == (scale is None):
        raise ValueError("give exactly one of eps_pure and scale")
    if scale is not None:
        if not (scale > 0 and sensitivity > 0):
            raise ValueError("sensitivity and scale must be > 0")
        r = sensitivity / scale
    else:
        if not eps_pure > 0:
            raise ValueError("eps_pure must be > 0")
        r = float(eps_pure)
        scale = sensitivity / r

    def delta_fn(eps):
        return 0.0 - np.expm1(0.5 * np.minimum(eps - r, 0.0))

    def derivative_fn(eps):
        return np.where(eps < r, -0.5 * np.exp(0.5 * (eps - r)), 0.0)

    return PrivacyProfile(
        delta_fn,
        family="laplace",
        params={"sensitivity": float(sensitivity), "scale": float(scale)},
        derivative_fn=derivative_fn,
        tail_limit=0.0,
    )


def sgd_profile(A=2.0, B=1.0, sigma=2.0) -> PrivacyProfile:
    """Naive profile ``min(1, B exp(-(sigma eps / A)^2))`` from inverting the SGD-type trade-off."""
    TradeoffEquation("sgd_like", A=A, B=B, sigma=sigma)
    k = (sigma / A) ** 2
    log_b = math.log(B)

    def log_delta_fn(eps):
        return np.minimum(log_b - k * eps * eps, 0.0)

    def delta_fn(eps):
        return np.exp(log_delta_fn(eps))

    def derivative_fn(eps):
        inside = log_b - k * eps * eps < 0
        return np.where(inside, -2.0 * k * eps * np.exp(log_delta_fn(eps)), 0.0)

    return PrivacyProfile(
        delta_fn,
        family="sgd_like",
        params={"A": float(A), "B": float(B), "sigma": float(sigma)},
        log_delta_fn=log_delta_fn,
        derivative_fn=derivative_fn,
        tail_limit=math.sqrt(A * A / (2.0 * sigma * sigma)),
    )


def icea_profile(m=20, n=4) -> PrivacyProfile:
    """Naive ICEA profile ``min(1, (n/eps) e^{-m/10})``; clipped to 1 at eps = 0."""
    TradeoffEquation("icea", m=m, n=n)
    log_k = math.log(n) - m / 10.0
    k = math.exp(log_k)

    def log_delta_fn(eps):
        with np.errstate(divide="ignore"):
            return np.minimum(log_k - np.log(eps), 0.0)

    def delta_fn(eps):
        return np.exp(log_delta_fn(eps))

    def derivative_fn(eps):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(eps > k, -k / (eps * eps), 0.0)

    return PrivacyProfile(
        delta_fn,
        family="icea",
        params={"m": float(m), "n": float(n)},
        log_delta_fn=log_delta_fn,
        derivative_fn=derivative_fn,
        tail_limit=math.inf,
    )


def pure_dp_profile(eps0) -> PrivacyProfile:
    """Worst-case profile of an eps0-DP mechanism: ``(e^eps0 - e^eps)^+ / (1 + e^eps0)``."""
    if not eps0 > 0:
        raise ValueError("eps0 must be > 0")

    def delta_fn(eps):
        return implied_delta(eps0, 0.0, eps) * np.ones_like(eps)

    def derivative_fn(eps):
        return np.where(eps < eps0, -np.exp(eps - eps0) / (1.0 + np.exp(-eps0)), 0.0)

    return PrivacyProfile(
        delta_fn,
        family="pure_dp",
        params={"eps0": float(eps0)},
        derivative_fn=derivative_fn,
        tail_limit=0.0,
    )


def gaussian_profile(mu) -> PrivacyProfile:
    """The mu-GDP curve itself."""
    if not mu > 0:
        raise ValueError("mu must be > 0")

    def delta_fn(eps):
        return specfun._delta_mu(mu, eps)

    def log_delta_fn(eps):
        return specfun._log_delta_mu(mu, np.asarray(eps, dtype=float))

    def derivative_fn(eps):
        return -np.exp(eps + specfun.normal_logcdf(-eps / mu - mu / 2.0))

    return PrivacyProfile(
        delta_fn,
        family="gaussian",
        params={"mu": float(mu)},
        log_delta_fn=log_delta_fn,
        derivative_fn=derivative_fn,
        tail_limit=float(mu),
    )


def builtin_profile(spec: TradeoffEquation) -> PrivacyProfile:
    """Naive profile obtained by inverting a trade-off equation."""
    if spec.family == "laplace":
        return laplace_profile(sensitivity=spec.sensitivity, scale=spec.scale)
    if spec.family == "sgd_like":
        return sgd_profile(spec.A, spec.B, spec.sigma)
    if spec.family == "icea":
        return icea_profile(int(spec.m), int(spec.n))
    if spec.family == "pure_dp":
        return pure_dp_profile(spec.eps0)
    raise ValueError(f"no built-in profile for family {spec.family!r}")


def tabulated_profile(eps, delta) -> PrivacyProfile:
    """Profile known exactly at knots ``(eps[i], delta[i])``.

    Off the knots the value is the tightest delta implied by any knot: the
    left knot's delta, or the implication curve of a knot further right.
    Every such value is a valid guarantee, so downstream measurements stay sound.
    """
    knots_eps = np.asarray(eps, dtype=float)
    knots_delta = np.asarray(delta, dtype=float)
    if knots_eps.ndim != 1 or knots_eps.shape != knots_delta.shape or knots_eps.size == 0:
        raise ProfileFormatError("eps and delta must be equal-length non-empty 1-d sequences")
    if np.any(knots_eps < 0) or np.any(np.diff(knots_eps) <= 0):
        raise ProfileFormatError("eps must be non-negative and strictly increasing")
    if np.any((knots_delta < 0) | (knots_delta > 1)) or np.any(np.diff(knots_delta) > 0):
        raise ProfileFormatError("delta must lie in [0, 1] and be non-increasing")

    def delta_fn(x):
        x = np.asarray(x, dtype=float)
        implied = implied_delta(knots_eps, knots_delta, x[..., None])
        return np.min(np.atleast_1d(implied), axis=-1).reshape(x.shape)

    return PrivacyProfile(
        delta_fn,
        family="tabulated",
        params={"knots": float(knots_eps.size)},
        tail_limit=0.0 if knots_delta[-1] == 0 else math.inf,
    )


def load_profile_csv(path) -> PrivacyProfile:
    """Read a ``eps,delta`` CSV into a :func:`tabulated_profile`."""
    eps, delta = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["eps", "delta"]:
            raise ProfileFormatError("header must be 'eps,delta'", line=1)
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise ProfileFormatError(f"expected 2 columns, got {len(row)}", line=line)
            try:
                e, d = float(row[0]), float(row[1])
            except ValueError:
                raise ProfileFormatError(f"non-numeric value in {row!r}", line=line) from None
            if not (math.isfinite(e) and e >= 0):
                raise ProfileFormatError(f"eps must be finite and >= 0, got {e}", line=line)
            if not 0 <= d <= 1:
                raise ProfileFormatError(f"delta must lie in [0, 1], got {d}", line=line)
            if eps and e <= eps[-1]:
                raise ProfileFormatError("eps must be strictly increasing", line=line)
            if delta and d > delta[-1]:
                raise ProfileFormatError("delta must be non-increasing", line=line)
            eps.append(e)
            delta.append(d)
    if not eps:
        raise ProfileFormatError("no data rows", line=2)
    return tabulated_profile(eps, delta)


def _crossover(p: PrivacyProfile, upper=200.0, xtol=1e-9):
    """First eps0 where h(eps0) = d' + e^eps0 (1 - d + d') turns positive, or None."""

    def h(x):
        x = np.asarray(x, dtype=float)
        d = np.asarray(p(x))
        dp = np.asarray(p.derivative(x))
        return (dp + np.exp(x) * (1.0 - d + dp)) * np.exp(-x)

    def positive(x):
        # h is scaled by e^-x; tolerance absorbs round-off where h vanishes identically.
        return h(x) > 1e-9

    grid = np.concatenate([[0.0], np.geomspace(1e-6, upper, 4000)])
    pos = positive(grid)
    if not np.any(pos):
        return None
    j = int(np.argmax(pos))
    if j == 0:
        return 0.0
    lo, hi = grid[j - 1], grid[j]
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        if positive(mid):
            hi = mid
        else:
            lo = mid
    return hi


def refine(p: PrivacyProfile) -> PrivacyProfile:
    """Tighten a naive (inverted trade-off) profile with the implication order.

    The refined value is ``inf_{eps0 >= eps} g(eps, eps0)`` where
    ``g(eps, eps0)`` is the delta implied at eps by ``(eps0, p(eps0))``. The
    minimiser is the crossover eps_i where ``dg/deps0`` changes sign, so the
    refined profile equals ``p`` past eps_i and follows the implication curve
    of ``(eps_i, p(eps_i))`` before it. If no crossover is found in
    [0, 200] a :class:`RefinementWarning` is issued and ``p`` is returned.
    """
    ei = _crossover(p)
    if ei is None:
        warnings.warn(f"no crossover found for {p.label}; profile left unrefined", RefinementWarning)
        return p
    di = float(p(ei))
    base = p

    def delta_fn(eps):
        eps = np.asarray(eps, dtype=float)
        naive = np.asarray(base(eps))
        implied = np.asarray(implied_delta(ei, di, eps))
        return np.where(eps < ei, np.minimum(naive, implied), naive)

    def derivative_fn(eps):
        eps = np.asarray(eps, dtype=float)
        slope = -(1.0 - di) * np.exp(eps - ei) / (1.0 + np.exp(-ei))
        return np.where(eps < ei, slope, np.asarray(base.derivative(eps)))

    log_fn = None
    if base.log_delta_fn is not None:

        def log_fn(eps):
            eps = np.asarray(eps, dtype=float)
            with np.errstate(divide="ignore"):
                return np.where(eps < ei, np.log(delta_fn(eps)), base.log_delta(eps))

    return PrivacyProfile(
        delta_fn,
        family=base.family,
        params={**base.params, "crossover": float(ei)},
        log_delta_fn=log_fn,
        derivative_fn=derivative_fn,
        tail_limit=base.tail_limit,
        refined=True,
    )


def min_noise_for_target(g: TradeoffEquation, target: PrivacyPoint, *, span=20.0, points=4001):
    """Smallest noise among guarantees (eps, delta) that imply ``target``.

    Searches eps in ``[target.eps, target.eps + span]`` with delta pinned to
    the implication boundary, then polishes the best grid cell with a bounded
    scalar minimiser. Returns ``(sigma, PrivacyPoint)``.
    """
    t_eps, t_delta = target.eps, target.delta

    def boundary_delta(eps):
        c = np.asarray(implied_delta(eps, 0.0, t_eps))
        return (t_delta - c) / (1.0 - c)

    def sigma(eps):
        d = boundary_delta(eps)
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.asarray(g.noise(eps, np.where(d >= 0, d, np.nan)), dtype=float)
        return np.where(np.isfinite(s) & (d >= 0), s, np.inf)

    grid = np.linspace(t_eps, t_eps + span, points)
    if t_eps == 0:
        grid = grid[1:]
    values = sigma(grid)
    j = int(np.argmin(values))
    best_eps, best_sigma = float(grid[j]), float(values[j])
    if not math.isfinite(best_sigma):
        raise ValueError("no finite noise level implies the target in the search window")
    lo, hi = grid[max(j - 1, 0)], grid[min(j + 1, grid.size - 1)]
    if hi > lo:
        res = optimize.minimize_scalar(lambda e: float(sigma(e)), bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
        if res.fun < best_sigma:
            best_eps, best_sigma = float(res.x), float(res.fun)
    return best_sigma, PrivacyPoint(best_eps, float(boundary_delta(best_eps)))
