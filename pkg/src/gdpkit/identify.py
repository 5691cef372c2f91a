"""Deciding whether a profile is GDP at all, and checking head/tail conditions.

The tail ratio ``eps^2 / (-2 log delta(eps))`` decides membership: its limit
``mu_t`` is finite exactly for GDP mechanisms and is a lower bound on any
valid mu. The actual optimal mu comes from :func:`gdpkit.gdpt.head_measure`.
"""

import json
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .gdpt import DEFAULT_MU_MAX, CeilingExceeded, MeasurementConfig, _bisect, _grid, grid_size, head_measure
from .profiles import PrivacyProfile
from .specfun import _delta_mu

__all__ = [
    "NotGdpError",
    "TrendThresholds",
    "TailEstimate",
    "Classification",
    "HeadTailQuery",
    "tail_limit",
    "classify",
    "check_condition",
]


class NotGdpError(ValueError):
    """Raised by callers that need a GDP profile and got a diverging tail."""


@dataclass(frozen=True)
class TrendThresholds:
    """Stopping rule for the numeric tail estimate.

    The ratio is sampled at ``eps = 2**k`` for ``k`` in ``k_min..k_max``.
    ``converge_rel`` bounds the relative change across the last three
    samples; ``diverge_growth`` is the minimum growth per doubling that
    counts as divergence.
    """

    k_min: int = 3
    k_max: int = 14
    converge_rel: float = 0.01
    diverge_growth: float = 0.10

    def __post_init__(self):
        if self.k_max - self.k_min < 2:
            raise ValueError("need at least three samples")
        if not (self.converge_rel > 0 and self.diverge_growth > 0):
            raise ValueError("thresholds must be > 0")


@dataclass(frozen=True)
class TailEstimate:
    kind: str  # "analytic" or "numeric"
    mu_t: float
    samples: Tuple[Tuple[float, float], ...]
    trend: str  # "converging", "diverging" or "inconclusive"

    @property
    def finite(self):
        return self.trend == "converging" and math.isfinite(self.mu_t)

    def to_dict(self):
        return {
            "kind": self.kind,
            "mu_t": _json_float(self.mu_t),
            "trend": self.trend,
            "samples": [[e, _json_float(r)] for e, r in self.samples],
        }


@dataclass(frozen=True)
class Classification:
    verdict: str  # "gdp", "not_gdp" or "inconclusive"
    mu_lower_bound: float
    evidence: TailEstimate

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "mu_lower_bound": _json_float(self.mu_lower_bound),
            "evidence": self.evidence.to_dict(),
        }

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)


@dataclass(frozen=True)
class HeadTailQuery:
    """Does the mu-GDP inequality hold on ``[0, boundary_eps]`` (head) or past it (tail)?"""

    boundary_eps: float
    mu: float
    side: str = "head"

    def __post_init__(self):
        if not self.boundary_eps >= 0:
            raise ValueError("boundary_eps must be >= 0")
        if not self.mu > 0:
            raise ValueError("mu must be > 0")
        if self.side not in ("head", "tail"):
            raise ValueError("side must be 'head' or 'tail'")
        if self.side == "head" and self.boundary_eps == 0:
            raise ValueError("head queries need boundary_eps > 0")


def _json_float(x):
    # JSON has no infinity; keep the sentinel readable.
    return x if math.isfinite(x) else ("inf" if x > 0 else "nan")


def _ratios(p, eps):
    log_delta = np.asarray(p.log_delta(eps), dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(log_delta < 0, eps * eps / (-2.0 * log_delta), math.inf)


def _trend(r, th):
    r1, r2, r3 = r[-3:]
    if np.all(np.isinf(r[-3:])):
        return "diverging"
    if not np.all(np.isfinite(r[-3:])):
        return "inconclusive"
    if r3 == 0 and r2 == 0:
        return "converging"
    g = 1.0 + th.diverge_growth
    if r2 > g * r1 and r3 > g * r2:
        return "diverging"
    scale = max(abs(r2), abs(r3))
    if abs(r3 - r2) <= th.converge_rel * scale and abs(r2 - r1) <= th.converge_rel * max(abs(r1), abs(r2)):
        return "converging"
    return "inconclusive"


def tail_limit(p: PrivacyProfile, thresholds: TrendThresholds = TrendThresholds(), *, numeric=False) -> TailEstimate:
    """Estimate ``mu_t = sqrt(lim eps^2 / (-2 log delta(eps)))``.

    Families with a known limit report it exactly (``kind="analytic"``);
    otherwise, or with ``numeric=True``, the ratio is sampled at powers of
    two and its trend decides. The sample trace is returned either way.
    """
    eps = 2.0 ** np.arange(thresholds.k_min, thresholds.k_max + 1)
    r = _ratios(p, eps)
    samples = tuple(zip(eps.tolist(), r.tolist()))
    if p.tail_limit is not None and not numeric:
        mu_t = float(p.tail_limit)
        return TailEstimate("analytic", mu_t, samples, "converging" if math.isfinite(mu_t) else "diverging")
    trend = _trend(r, thresholds)
    mu_t = math.inf if trend == "diverging" else math.sqrt(r[-1])
    return TailEstimate("numeric", mu_t, samples, trend)


def classify(p: PrivacyProfile, thresholds: TrendThresholds = TrendThresholds()) -> Classification:
    """GDP verdict from the tail. ``mu_lower_bound`` is ``mu_t``, never the optimal mu."""
    est = tail_limit(p, thresholds)
    if est.finite:
        verdict = "gdp"
    elif est.trend == "diverging":
        verdict = "not_gdp"
    else:
        verdict = "inconclusive"
    return Classification(verdict, est.mu_t, est)


def _tail_window(p, eps_t, eps_max, c, mu_max):
    # Staircase brackets of sup GDPT over [eps_t, eps_max]; the sup is <= upper, >= lower.
    n = grid_size(c, eps_max - eps_t)
    x, dx, _ = _grid(p, eps_t, eps_max - eps_t, n)
    up_eps, up_delta = x[1 : n + 3], dx[: n + 2]
    lo_eps, lo_delta = x[: n + 1], dx[1 : n + 2]
    margin = 1.0 / (4.0 * c)
    over = (up_delta > 0) & (_delta_mu(mu_max, up_eps) < up_delta)
    upper = math.inf if np.any(over) else float(np.max(_bisect(up_eps, up_delta, margin, mu_max)[1]))
    lo_ok = ~((lo_delta > 0) & (_delta_mu(mu_max, lo_eps) < lo_delta))
    lower = float(np.max(_bisect(lo_eps[lo_ok], lo_delta[lo_ok], margin, mu_max)[0], initial=0.0))
    if not np.all(lo_ok):
        lower = max(lower, mu_max)
    return lower, upper


def check_condition(p: PrivacyProfile, q: HeadTailQuery, c: float = 1000.0, *, mu_max=DEFAULT_MU_MAX, seed=0,
                    thresholds: TrendThresholds = TrendThresholds()) -> str:
    """Return ``"holds"``, ``"fails"`` or ``"inconclusive"`` for the query.

    Head: measure sup GDPT on ``[0, boundary_eps]`` to within ``1/c`` and
    compare. Tail: bracket sup GDPT on ``[eps_t, max(2 eps_t, 100)]`` and rely
    on the tail estimate beyond; it holds only if both pass.
    """
    if not c > 0:
        raise ValueError("c must be > 0")
    if q.side == "head":
        if q.mu >= mu_max:
            mu_max = 2.0 * q.mu
        try:
            r = head_measure(p, MeasurementConfig(eps_h=q.boundary_eps, c=c, mu_max=mu_max, seed=seed))
        except CeilingExceeded:
            return "fails"
        if q.mu >= r.mu_hi:
            return "holds"
        return "fails" if q.mu < r.mu_lo else "inconclusive"
    eps_t = q.boundary_eps
    eps_max = max(2.0 * eps_t, 100.0)
    lower, upper = _tail_window(p, eps_t, eps_max, c, max(mu_max, 2.0 * q.mu))
    if lower > q.mu:
        return "fails"
    est = tail_limit(p, thresholds)
    if upper <= q.mu and est.finite and est.mu_t <= q.mu:
        return "holds"
    return "inconclusive"
