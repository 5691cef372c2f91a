"""Independent high-precision reference implementations used only by the tests."""

import itertools

import mpmath as mp

mp.mp.dps = 60


def phi(t):
    return mp.ncdf(mp.mpf(t))


def delta_mu(mu, eps):
    mu, eps = mp.mpf(mu), mp.mpf(eps)
    return phi(-eps / mu + mu / 2) - mp.e**eps * phi(-eps / mu - mu / 2)


def mu_gdp(eps, delta):
    """Root of delta_mu(., eps) = delta by high-precision bisection."""
    lo, hi = mp.mpf(0), mp.mpf(20)
    delta = mp.mpf(delta)
    for _ in range(200):
        mid = (lo + hi) / 2
        if delta_mu(mid, eps) > delta:
            hi = mid
        else:
            lo = mid
    return (lo + hi) / 2


def hockey_stick(p, q, eps):
    """sup_E P(E) - e^eps Q(E) for discrete distributions, via the positive part."""
    w = mp.e ** mp.mpf(eps)
    return mp.fsum(max(mp.mpf(0), mp.mpf(a) - w * mp.mpf(b)) for a, b in zip(p, q))


def worst_case_delta(eps0, delta0, eps):
    """Four-outcome mechanism that is exactly (eps0, delta0)-DP; its delta at eps."""
    eps0, delta0 = mp.mpf(eps0), mp.mpf(delta0)
    a = mp.e**eps0 / (1 + mp.e**eps0)
    p = [delta0, 0, (1 - delta0) * a, (1 - delta0) * (1 - a)]
    q = [0, delta0, (1 - delta0) * (1 - a), (1 - delta0) * a]
    return max(hockey_stick(p, q, eps), hockey_stick(q, p, eps))


def worst_case_delta_events(eps0, delta0, eps):
    """Same quantity by explicit enumeration of all 16 events and both orders."""
    eps0, delta0 = mp.mpf(eps0), mp.mpf(delta0)
    a = mp.e**eps0 / (1 + mp.e**eps0)
    p = [delta0, 0, (1 - delta0) * a, (1 - delta0) * (1 - a)]
    q = [0, delta0, (1 - delta0) * (1 - a), (1 - delta0) * a]
    w = mp.e ** mp.mpf(eps)
    best = mp.mpf(0)
    for mask in itertools.product((0, 1), repeat=4):
        pe = mp.fsum(x for x, m in zip(p, mask) if m)
        qe = mp.fsum(x for x, m in zip(q, mask) if m)
        best = max(best, pe - w * qe, qe - w * pe)
    return best


def laplace_delta(ratio, eps):
    """Hockey-stick divergence between Lap(0, 1) and Lap(ratio, 1) by quadrature."""
    r, w = mp.mpf(ratio), mp.e ** mp.mpf(eps)

    def f(x):
        return max(mp.mpf(0), mp.exp(-abs(x)) / 2 - w * mp.exp(-abs(x - r)) / 2)

    # the integrand has a kink where the density ratio crosses e^eps
    kink = min(max((r - mp.mpf(eps)) / 2, 0), r)
    return mp.quad(f, [-mp.inf, 0, kink, r, mp.inf])


def optimal_composition_delta(eps, k, x):
    """Hockey-stick of the k-fold product of the binary randomized-response pair."""
    eps, x = mp.mpf(eps), mp.mpf(x)
    p = mp.e**eps / (1 + mp.e**eps)
    q = 1 - p
    w = mp.e**x
    return mp.fsum(
        mp.binomial(k, l) * max(mp.mpf(0), p ** (k - l) * q**l - w * p**l * q ** (k - l)) for l in range(k + 1)
    )


def pure_to_gdp(eps):
    pval = 1 / (1 + mp.e ** mp.mpf(eps))
    return -2 * mp.sqrt(2) * mp.erfinv(2 * pval - 1)
