"""Gaussian differential privacy transformation (GDPT) and head measurement.

``mu_gdp(eps, delta)`` is the mu whose GDP curve passes through
``(eps, delta)``; the GDPT of a profile is ``eps -> mu_gdp(eps, delta(eps))``
and its supremum is the optimal GDP parameter. Because
``d mu_gdp / d eps <= sqrt(2) pi / 2``, the supremum over ``[0, eps_h]`` is
pinned down by two staircase functions on a uniform grid.
"""

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .profiles import PrivacyProfile
from .specfun import _delta_mu

__all__ = [
    "CeilingExceeded",
    "GdpInterval",
    "MeasurementConfig",
    "MeasurementResult",
    "Staircase",
    "grid_size",
    "mu_gdp_bounds",
    "mu_gdp",
    "gdpt_eval",
    "gdpt_curve",
    "staircase_bounds",
    "head_measure",
]

DEFAULT_MU_MAX = 10.0
RNG_NAME = "numpy.PCG64"


class CeilingExceeded(ArithmeticError):
    """The GDP parameter at some point exceeds the search ceiling ``mu_max``."""

    def __init__(self, eps, delta, mu_max):
        self.eps, self.delta, self.mu_max = float(eps), float(delta), float(mu_max)
        super().__init__(f"not {mu_max:g}-GDP: delta={delta:.6g} at eps={eps:.6g} lies above the mu_max curve")


@dataclass(frozen=True)
class GdpInterval:
    """Certified bracket ``mu_lo <= mu <= mu_hi``."""

    mu_lo: float
    mu_hi: float
    margin: float

    def __contains__(self, mu):
        return self.mu_lo <= mu <= self.mu_hi

    @property
    def width(self):
        return self.mu_hi - self.mu_lo

    @property
    def mid(self):
        return 0.5 * (self.mu_lo + self.mu_hi)


def _bisection_steps(margin, mu_max):
    steps, width = 0, float(mu_max)
    while width > margin:
        width *= 0.5
        steps += 1
    return steps


def _bisect(eps, delta, margin, mu_max):
    """Vectorized binary search for mu_gdp; returns (lo, hi, steps).

    Keeps ``delta_lo(eps) <= delta <= delta_hi(eps)``. Entries with
    ``delta <= 0`` come back as ``[0, 0]``. The caller checks the ceiling.
    """
    eps, delta = np.broadcast_arrays(np.asarray(eps, dtype=float), np.asarray(delta, dtype=float))
    lo = np.zeros(eps.shape)
    hi = np.full(eps.shape, float(mu_max))
    steps = _bisection_steps(margin, mu_max)
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        above = _delta_mu(mid, eps) > delta
        hi = np.where(above, mid, hi)
        lo = np.where(above, lo, mid)
    zero = delta <= 0
    lo[zero] = 0.0
    hi[zero] = 0.0
    return lo, hi, steps


def _check_ceiling(eps, delta, mu_max):
    eps, delta = np.broadcast_arrays(np.asarray(eps, dtype=float), np.asarray(delta, dtype=float))
    bad = (delta > 0) & (_delta_mu(mu_max, eps) < delta)
    if np.any(bad):
        j = int(np.argmax(bad.ravel()))
        raise CeilingExceeded(eps.ravel()[j], delta.ravel()[j], mu_max)


def mu_gdp_bounds(eps, delta, margin, mu_max=DEFAULT_MU_MAX) -> GdpInterval:
    """Binary search for the mu with ``delta_mu(eps) = delta``.

    Halves ``[0, mu_max]`` until the width is at most ``margin``, which takes
    ``ceil(log2(mu_max / margin))`` steps. ``delta = 0`` gives ``[0, 0]``.

    Raises:
      CeilingExceeded: if ``delta_{mu_max}(eps) < delta``.
    """
    if not eps >= 0:
        raise ValueError("eps must be >= 0")
    if not 0 <= delta <= 1:
        raise ValueError("delta must lie in [0, 1]")
    if not (margin > 0 and mu_max > 0):
        raise ValueError("margin and mu_max must be > 0")
    _check_ceiling(eps, delta, mu_max)
    lo, hi, _ = _bisect(eps, delta, margin, mu_max)
    return GdpInterval(float(lo), float(hi), float(margin))


def mu_gdp(eps, delta, *, tol=1e-12, mu_max=DEFAULT_MU_MAX):
    """mu_gdp to within ``tol``; vectorized, returns the bracket midpoint."""
    _check_ceiling(eps, delta, mu_max)
    lo, hi, _ = _bisect(eps, delta, tol, mu_max)
    mid = 0.5 * (lo + hi)
    return float(mid) if mid.ndim == 0 else mid


def gdpt_eval(p: PrivacyProfile, eps, margin=1e-6, mu_max=DEFAULT_MU_MAX) -> GdpInterval:
    """Bracket around the GDPT of ``p`` at ``eps``."""
    return mu_gdp_bounds(eps, float(p(eps)), margin, mu_max)


def gdpt_curve(p: PrivacyProfile, eps, margin=1e-6, mu_max=DEFAULT_MU_MAX):
    """Vectorized GDPT; returns ``(lo, hi)`` arrays over ``eps``."""
    eps = np.asarray(eps, dtype=float)
    delta = np.asarray(p(eps))
    _check_ceiling(eps, delta, mu_max)
    lo, hi, _ = _bisect(eps, delta, margin, mu_max)
    return lo, hi


@dataclass(frozen=True)
class Staircase:
    """Right-open step function: ``values[i]`` on ``[x[i], x[i+1])``."""

    x: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.x.size != self.values.size + 1 or np.any(np.diff(self.x) <= 0):
            raise ValueError("x must be sorted with one more entry than values")

    @property
    def knots(self):
        return list(zip(self.x[:-1].tolist(), self.values.tolist()))

    def max(self):
        return float(np.max(self.values))

    def __call__(self, eps):
        eps = np.asarray(eps, dtype=float)
        if np.any((eps < self.x[0]) | (eps >= self.x[-1])):
            raise ValueError("eps outside the staircase support")
        idx = np.searchsorted(self.x, eps, side="right") - 1
        out = self.values[idx]
        return float(out) if out.ndim == 0 else out


def grid_size(c, eps_h):
    """Grid count that keeps the staircase gap below ``1/(2c)``."""
    return int(math.ceil(math.sqrt(8.0) * c * math.pi * eps_h)) + 1


def _grid(p, start, eps_h, n):
    d = eps_h / n
    x = start + d * np.arange(n + 3)
    return x, np.asarray(p(x)), d


def staircase_bounds(p: PrivacyProfile, eps_h, n, *, margin=1e-4, mu_max=DEFAULT_MU_MAX, start=0.0):
    """Lower and upper staircases around the GDPT of ``p`` on ``[start, start + eps_h]``.

    With ``d = eps_h / n`` and ``x_i = start + i d``, lower step ``i`` (for
    ``i = 0..n``) holds a certified lower bound of
    ``mu_gdp(x_i, delta(x_{i+1}))`` and upper step ``i`` (``i = 0..n+1``) a
    certified upper bound of ``mu_gdp(x_{i+1}, delta(x_i))``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    x, dx, _ = _grid(p, start, eps_h, n)
    _check_ceiling(x[1:], dx[:-1], mu_max)
    lo, _, _ = _bisect(x[: n + 1], dx[1 : n + 2], margin, mu_max)
    _, hi, _ = _bisect(x[1 : n + 3], dx[: n + 2], margin, mu_max)
    return Staircase(x[: n + 2], lo), Staircase(x[: n + 3], hi)


@dataclass(frozen=True)
class MeasurementConfig:
    """Settings for :func:`head_measure`.

    ``search_margin`` defaults to ``1/(4c)`` so that the staircase gap
    (below ``1/(2c)``) plus one search error at each end stays within ``1/c``.
    """

    eps_h: float = 10.0
    c: float = 1000.0
    mu_max: float = DEFAULT_MU_MAX
    seed: int = 0
    strategy: str = "shuffled"
    search_margin: Optional[float] = None

    def __post_init__(self):
        if not (self.eps_h > 0 and self.c > 0 and self.mu_max > 0):
            raise ValueError("eps_h, c and mu_max must be > 0")
        if self.strategy not in ("naive", "shuffled"):
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.search_margin is not None and not self.search_margin > 0:
            raise ValueError("search_margin must be > 0")

    @property
    def margin(self):
        return self.search_margin if self.search_margin is not None else 1.0 / (4.0 * self.c)


@dataclass(frozen=True)
class MeasurementResult:
    bracket: GdpInterval
    grid_n: int
    grid_d: float
    binary_search_count: int
    config: MeasurementConfig = field(repr=False)

    @property
    def mu_lo(self):
        return self.bracket.mu_lo

    @property
    def mu_hi(self):
        return self.bracket.mu_hi

    def to_dict(self):
        cfg = self.config
        return {
            "mu_lo": self.mu_lo,
            "mu_hi": self.mu_hi,
            "c": cfg.c,
            "eps_h": cfg.eps_h,
            "n": self.grid_n,
            "d": self.grid_d,
            "strategy": cfg.strategy,
            "seed": cfg.seed,
            "rng": RNG_NAME,
            "binary_search_count": self.binary_search_count,
        }

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)


def _naive(x, dx, n, margin, mu_max):
    lo_eps, lo_delta = x[: n + 1], dx[1 : n + 2]
    hi_eps, hi_delta = x[1 : n + 3], dx[: n + 2]
    lo, _, _ = _bisect(lo_eps, lo_delta, margin, mu_max)
    _, hi, _ = _bisect(hi_eps, hi_delta, margin, mu_max)
    count = int(np.count_nonzero(lo_delta > 0) + np.count_nonzero(hi_delta > 0))
    return float(lo.max()), float(hi.max()), count


def _shuffled(x, dx, n, margin, mu_max, seed):
    # Candidate i: upper from (x_{i+1}, delta(x_i)), lower from (x_i, delta(x_{i+1})) for i <= n.
    up_eps, up_delta = x[1 : n + 3], dx[: n + 2]
    lo_eps, lo_delta = x[: n + 1], dx[1 : n + 2]
    # Fixed-step bisection lands on multiples of w, so a lower step whose value
    # is below mu_lo + w cannot raise mu_lo and needs no search.
    w = mu_max / 2.0 ** _bisection_steps(margin, mu_max)
    mu_hi = mu_lo = 0.0
    curve_hi = np.zeros(n + 2)
    curve_lo = np.zeros(n + 1)
    count = 0
    order = np.random.Generator(np.random.PCG64(seed)).permutation(n + 2)
    for i in order.tolist():
        if curve_hi[i] < up_delta[i]:
            _, hi, _ = _bisect(up_eps[i], up_delta[i], margin, mu_max)
            count += 1
            mu_hi = float(hi)
            curve_hi = _delta_mu(mu_hi, up_eps)
        if i <= n and curve_lo[i] < lo_delta[i]:
            lo, _, _ = _bisect(lo_eps[i], lo_delta[i], margin, mu_max)
            count += 1
            if float(lo) >= mu_lo:
                mu_lo = float(lo)
                curve_lo = _delta_mu(mu_lo + w, lo_eps)
    return mu_lo, mu_hi, count


def head_measure(p: PrivacyProfile, cfg: MeasurementConfig = MeasurementConfig()) -> MeasurementResult:
    """Bracket ``sup_{eps in [0, eps_h]} GDPT_p(eps)`` to width at most ``1/c``.

    Uses ``n = ceil(sqrt(8) c pi eps_h) + 1`` grid cells of width
    ``d = eps_h / n``. The ``naive`` strategy binary-searches every step of
    both staircases. The ``shuffled`` strategy visits steps in a seeded
    random order and searches only when the running bound is beaten. That
    needs O(log n) searches in expectation and returns a bracket inside the
    naive one.

    Raises:
      CeilingExceeded: if the profile is not ``mu_max``-GDP on the head.
    """
    n = grid_size(cfg.c, cfg.eps_h)
    x, dx, d = _grid(p, 0.0, cfg.eps_h, n)
    _check_ceiling(x[1:], dx[:-1], cfg.mu_max)
    if cfg.strategy == "naive":
        mu_lo, mu_hi, count = _naive(x, dx, n, cfg.margin, cfg.mu_max)
    else:
        mu_lo, mu_hi, count = _shuffled(x, dx, n, cfg.margin, cfg.mu_max, cfg.seed)
    return MeasurementResult(GdpInterval(mu_lo, mu_hi, 1.0 / cfg.c), n, d, count, cfg)
