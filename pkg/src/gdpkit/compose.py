"""k-fold composition of pure eps-DP mechanisms under several accountants.

All rows answer the same question: the smallest eps' such that ``k`` runs of
an eps-DP mechanism are (eps', delta)-DP, for each target delta.
"""

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Tuple

import numpy as np
from scipy import optimize, special

from .gdpt import DEFAULT_MU_MAX, GdpInterval, MeasurementConfig, head_measure
from .identify import NotGdpError, tail_limit
from .profiles import PrivacyProfile, laplace_profile, tabulated_profile
from .specfun import _delta_mu, _log_delta_mu
from .transform import pure_to_gdp

__all__ = [
    "METHODS",
    "CompositionScenario",
    "CompositionReport",
    "gdp_compose",
    "basic_compose_eps",
    "advanced_compose_eps",
    "rdp_compose_eps",
    "optimal_profile_pure",
    "eps_for_gdp",
    "eps_for_profile",
    "gdp_summarize",
    "build_report",
]

METHODS = ("basic", "advanced", "rdp", "gdp", "gdp_lap", "optimal", "gdp_summary")
_MAX_TOTAL_EPS = 300.0


@dataclass(frozen=True)
class CompositionScenario:
    eps: float
    k: int
    delta_targets: Tuple[float, ...] = (1e-1, 1e-2, 1e-3, 1e-4)

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be > 0")
        if int(self.k) != self.k or self.k < 1:
            raise ValueError("k must be a positive integer")
        if not self.delta_targets or any(not 0 < d < 1 for d in self.delta_targets):
            raise ValueError("delta targets must lie in (0, 1)")
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "delta_targets", tuple(float(d) for d in self.delta_targets))


def gdp_compose(mus) -> float:
    """Composition of GDP guarantees: ``sqrt(sum mu_i^2)``."""
    mus = np.asarray(list(mus), dtype=float)
    if np.any(~(mus >= 0)):
        raise ValueError("mu values must be >= 0")
    return float(math.sqrt(math.fsum(mus * mus)))


def basic_compose_eps(s: CompositionScenario, delta: float) -> float:
    """Best eps' implied by the (k eps, 0)-DP guarantee of basic composition."""
    total = s.k * s.eps
    # log(e^T - delta (1 + e^T)) = T + log(1 - delta (1 + e^-T))
    inner = 1.0 - delta * (1.0 + math.exp(-total))
    if inner <= 0:
        return 0.0
    return max(min(total + math.log(inner), total), 0.0)


def advanced_compose_eps(s: CompositionScenario, delta_prime: float) -> float:
    """``sqrt(2 k log(1/delta')) eps + k eps (e^eps - 1)``."""
    if not 0 < delta_prime < 1:
        raise ValueError("delta_prime must lie in (0, 1)")
    return math.sqrt(2.0 * s.k * math.log(1.0 / delta_prime)) * s.eps + s.k * s.eps * math.expm1(s.eps)


def rdp_compose_eps(s: CompositionScenario, delta: float) -> float:
    """Renyi accounting: per-step ``2 alpha eps^2``, summed over k, then converted.

    ``eps' = min_{alpha > 1} k 2 alpha eps^2 + log(1/delta) / (alpha - 1)``,
    minimised over ``log(alpha - 1)`` in ``[-10, 10]``.
    """
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    log_inv = math.log(1.0 / delta)

    def bound(t):
        am1 = math.exp(t)
        return s.k * 2.0 * (1.0 + am1) * s.eps**2 + log_inv / am1

    res = optimize.minimize_scalar(bound, bounds=(-10.0, 10.0), method="bounded", options={"xatol": 1e-10})
    return float(res.fun)


def _optimal_log_terms(eps, k):
    ell = np.arange(k + 1)
    log_binom = special.gammaln(k + 1) - special.gammaln(ell + 1) - special.gammaln(k - ell + 1)
    log_w = log_binom + (k - ell) * eps - k * np.logaddexp(0.0, eps)
    return log_w, (k - 2 * ell) * eps


def optimal_profile_pure(eps, k, *, extension="exact") -> PrivacyProfile:
    """Exact profile of k-fold composition of the worst eps-DP mechanism.

    ``delta(x) = sum_l C(k,l) (e^{(k-l) eps} - e^{x + l eps})^+ / (1 + e^eps)^k``,
    summed in log space so no large exponentials are subtracted. With
    ``extension="implication"`` only the knots ``x = (k - 2i) eps`` are
    evaluated exactly and the profile in between is the tightest value any
    knot implies.
    """
    if not eps > 0 or int(k) != k or k < 1:
        raise ValueError("need eps > 0 and integer k >= 1")
    k = int(k)
    if k * eps > _MAX_TOTAL_EPS:
        raise OverflowError(f"k * eps = {k * eps:g} exceeds {_MAX_TOTAL_EPS:g}")
    log_w, loss = _optimal_log_terms(eps, k)

    def delta_fn(x):
        x = np.asarray(x, dtype=float)
        gap = np.minimum(x[..., None] - loss, 0.0)
        with np.errstate(divide="ignore"):
            terms = log_w + np.log(-np.expm1(gap))
        out = np.exp(special.logsumexp(terms, axis=-1))
        return np.where(x >= k * eps, 0.0, out)

    params = {"eps": float(eps), "k": float(k)}
    if extension == "implication":
        knots = np.sort(np.unique(np.abs(loss)))
        return replace(tabulated_profile(knots, delta_fn(knots)), family="optimal_pure", params=params)
    if extension != "exact":
        raise ValueError("extension must be 'exact' or 'implication'")
    return PrivacyProfile(delta_fn, family="optimal_pure", params=params, tail_limit=0.0)


def eps_for_gdp(mu, delta, upper=50.0):
    """Smallest eps with ``delta_mu(eps) <= delta``."""
    if not mu > 0:
        raise ValueError("mu must be > 0")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if _delta_mu(mu, 0.0) <= delta:
        return 0.0
    target = math.log(delta)
    while _log_delta_mu(mu, upper) > target:
        upper *= 2.0
    return float(optimize.brentq(lambda e: _log_delta_mu(mu, e) - target, 0.0, upper, xtol=1e-13, rtol=1e-15))


def eps_for_profile(p: PrivacyProfile, delta, upper=None, tol=1e-12):
    """Smallest eps with ``p(eps) <= delta`` by bisection (p need not be continuous)."""
    if p(0.0) <= delta:
        return 0.0
    hi = 1.0 if upper is None else float(upper)
    while p(hi) > delta:
        hi *= 2.0
        if hi > 1e6:
            raise ValueError("profile never drops to delta")
    lo = 0.0
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if p(mid) <= delta:
            hi = mid
        else:
            lo = mid
    return hi


def gdp_summarize(p: PrivacyProfile, eps_h, c, *, seed=0, mu_max=DEFAULT_MU_MAX) -> GdpInterval:
    """Certified bracket of the optimal mu for ``p``; refuses profiles with an infinite tail limit."""
    est = tail_limit(p)
    if est.trend == "diverging":
        raise NotGdpError(f"{p.label} has a diverging tail; no mu summarises it")
    return head_measure(p, MeasurementConfig(eps_h=eps_h, c=c, mu_max=mu_max, seed=seed)).bracket


@dataclass(frozen=True)
class CompositionReport:
    scenario: CompositionScenario
    rows: Dict[str, List[float]]
    mu_values: Dict[str, float]
    curves: Dict[str, List[float]] = field(default_factory=dict)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["method", "mu"] + [f"{d:g}" for d in self.scenario.delta_targets])
        for name, vals in self.rows.items():
            mu = self.mu_values.get(name)
            w.writerow([name, "" if mu is None else repr(mu)] + [f"{v:.6f}" for v in vals])
        return buf.getvalue()

    def to_dict(self):
        s = self.scenario
        return {
            "eps": s.eps,
            "k": s.k,
            "deltas": list(s.delta_targets),
            "rows": self.rows,
            "mu": self.mu_values,
            "curves": self.curves,
        }

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)


def build_report(s: CompositionScenario, cfg: MeasurementConfig = MeasurementConfig(), *, curve_points=64) -> CompositionReport:
    """Every accountant's eps' at every delta target, plus delta -> eps' curves.

    The GDP rows use certified upper brackets (``mu_hi``) so every entry is a
    valid guarantee.
    """
    mu_gdp = gdp_compose([pure_to_gdp(s.eps)] * s.k)
    lap = head_measure(laplace_profile(s.eps), cfg)
    mu_lap = math.sqrt(s.k) * lap.mu_hi
    opt = optimal_profile_pure(s.eps, s.k)
    summary = gdp_summarize(opt, max(cfg.eps_h, s.k * s.eps), cfg.c, seed=cfg.seed, mu_max=cfg.mu_max)
    mu_summary = summary.mu_hi

    solvers = {
        "basic": lambda d: basic_compose_eps(s, d),
        "advanced": lambda d: advanced_compose_eps(s, d),
        "rdp": lambda d: rdp_compose_eps(s, d),
        "gdp": lambda d: eps_for_gdp(mu_gdp, d),
        "gdp_lap": lambda d: eps_for_gdp(mu_lap, d),
        "optimal": lambda d: eps_for_profile(opt, d, upper=s.k * s.eps),
        "gdp_summary": lambda d: eps_for_gdp(mu_summary, d),
    }
    rows = {m: [solvers[m](d) for d in s.delta_targets] for m in METHODS}
    curve_deltas = np.geomspace(1e-6, 0.5, curve_points).tolist() if curve_points else []
    curves = {"delta": curve_deltas}
    curves.update({m: [solvers[m](d) for d in curve_deltas] for m in METHODS})
    mus = {"gdp": mu_gdp, "gdp_lap": mu_lap, "gdp_lap_step": lap.mu_hi, "gdp_summary": mu_summary}
    return CompositionReport(s, rows, mus, curves)
