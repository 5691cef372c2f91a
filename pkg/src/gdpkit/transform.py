"""Profile transformations: pure-DP to GDP, clip-and-rectify, Poisson subsampling."""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import special

from .profiles import PrivacyProfile, implied_delta

__all__ = ["pure_to_gdp", "ClipRectifySpec", "clip_rectify", "SubsampleSpec", "poisson_subsample"]


def pure_to_gdp(eps):
    """Exact GDP parameter of the worst eps-DP mechanism: ``-2 Phi^{-1}(1 / (1 + e^eps))``.

    Never exceeds ``sqrt(pi/2) * eps`` and approaches it as eps -> 0.
    """
    eps = np.asarray(eps, dtype=float)
    if np.any(~(eps >= 0)):
        raise ValueError("eps must be >= 0")
    mu = -2.0 * special.ndtri(special.expit(-eps)) + 0.0
    return float(mu) if mu.ndim == 0 else mu


@dataclass(frozen=True)
class ClipRectifySpec:
    """Clip the output to ``[y_lo, y_hi]``, then add Laplace noise of scale ``(y_hi - y_lo) / eps_h``.

    The clip bounds only set the noise scale; the resulting privacy profile
    depends on ``eps_h`` alone.
    """

    eps_h: float
    y_lo: float = 0.0
    y_hi: float = 1.0
    laplace_scale: float = field(init=False)

    def __post_init__(self):
        if not self.eps_h > 0:
            raise ValueError("eps_h must be > 0")
        if not self.y_hi > self.y_lo:
            raise ValueError("need y_hi > y_lo")
        object.__setattr__(self, "laplace_scale", (self.y_hi - self.y_lo) / self.eps_h)

    def apply(self, y, rng: Optional[np.random.Generator] = None):
        """Run the post-processing on mechanism outputs ``y``."""
        rng = rng if rng is not None else np.random.default_rng()
        y = np.clip(np.asarray(y, dtype=float), self.y_lo, self.y_hi)
        return y + rng.laplace(0.0, self.laplace_scale, size=y.shape)


def clip_rectify(p: PrivacyProfile, spec: ClipRectifySpec) -> PrivacyProfile:
    """Profile after clip-and-rectify: ``min(p, worst eps_h-DP profile)``.

    Zero for ``eps >= eps_h``, so the tail limit is 0 and the result is GDP
    with the head's mu whenever ``p`` is head-GDP on ``[0, eps_h]``.
    """
    eps_h = float(spec.eps_h)

    def delta_fn(eps):
        eps = np.asarray(eps, dtype=float)
        return np.minimum(np.asarray(p(eps)), implied_delta(eps_h, 0.0, eps))

    def derivative_fn(eps):
        eps = np.asarray(eps, dtype=float)
        cap = implied_delta(eps_h, 0.0, eps)
        cap_slope = np.where(eps < eps_h, -np.exp(eps - eps_h) / (1.0 + np.exp(-eps_h)), 0.0)
        return np.where(np.asarray(p(eps)) <= cap, np.asarray(p.derivative(eps)), cap_slope)

    return PrivacyProfile(
        delta_fn,
        family=p.family,
        params={**p.params, "clip_eps_h": eps_h},
        derivative_fn=derivative_fn,
        tail_limit=0.0,
        refined=p.refined,
    )


@dataclass(frozen=True)
class SubsampleSpec:
    gamma: float

    def __post_init__(self):
        if not 0 < self.gamma <= 1:
            raise ValueError("gamma must lie in (0, 1]")


def poisson_subsample(p: PrivacyProfile, spec: SubsampleSpec) -> PrivacyProfile:
    """Profile of the mechanism run on a Poisson subsample with rate ``gamma``.

    ``delta'(eps') = gamma * delta(log(1 + (e^eps' - 1) / gamma))``.
    """
    g = float(spec.gamma)
    if g == 1.0:
        return p
    log_g = math.log(g)

    def inner(eps):
        # log(1 + (e^x - 1)/g), rearranged so large x neither overflows nor cancels
        eps = np.asarray(eps, dtype=float)
        return np.maximum(eps - log_g + np.log1p((g - 1.0) * np.exp(-eps)), 0.0)

    def delta_fn(eps):
        return g * np.asarray(p(inner(eps)))

    def derivative_fn(eps):
        eps = np.asarray(eps, dtype=float)
        chain = 1.0 / (1.0 + (g - 1.0) * np.exp(-eps))
        return g * np.asarray(p.derivative(inner(eps))) * chain

    log_fn = None
    if p.log_delta_fn is not None:

        def log_fn(eps):
            return log_g + np.asarray(p.log_delta(inner(eps)))

    return PrivacyProfile(
        delta_fn,
        family=p.family,
        params={**p.params, "gamma": g},
        log_delta_fn=log_fn,
        derivative_fn=derivative_fn,
        tail_limit=p.tail_limit,
        refined=p.refined,
    )
