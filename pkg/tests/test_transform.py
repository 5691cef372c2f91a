import math

import numpy as np
import pytest

import oracles
from gdpkit import gdpt as G
from gdpkit import identify as I
from gdpkit import profiles as P
from gdpkit import transform as T

GRID = np.geomspace(1e-3, 30, 64)


def test_pure_to_gdp_values():
    assert T.pure_to_gdp(0.0) == 0.0
    assert T.pure_to_gdp(0.2) == pytest.approx(0.2505, abs=5e-5)
    for e in (1e-3, 0.2, 0.5, 2.0, 5.0, 30.0):
        assert T.pure_to_gdp(e) == pytest.approx(float(oracles.pure_to_gdp(e)), rel=1e-12)
    for e in (0.5, 2.0, 5.0):
        assert T.pure_to_gdp(e) <= math.sqrt(math.pi / 2) * e
    with pytest.raises(ValueError):
        T.pure_to_gdp(-1.0)


def test_pure_to_gdp_monotone_and_small_eps():
    e = np.linspace(0, 10, 200)
    assert np.all(np.diff(T.pure_to_gdp(e)) > 0)
    assert T.pure_to_gdp(1e-3) / (math.sqrt(math.pi / 2) * 1e-3) == pytest.approx(1.0, rel=1e-3)


def test_pure_to_gdp_is_measured_value():
    r = G.head_measure(P.pure_dp_profile(0.2), G.MeasurementConfig(eps_h=1, c=2000))
    assert r.mu_lo <= T.pure_to_gdp(0.2) <= r.mu_hi


def test_clip_rectify():
    spec = T.ClipRectifySpec(3.0, -1.0, 2.0)
    assert spec.laplace_scale == 1.0
    g = P.gaussian_profile(1.0)
    out = T.clip_rectify(g, spec)
    x = np.geomspace(1e-3, 10, 32)
    assert np.all(out(x) <= g(x)) and np.all(out(x) <= P.pure_dp_profile(3.0)(x))
    assert out(3.0) == 0.0 and out(7.0) == 0.0
    assert I.classify(T.clip_rectify(P.sgd_profile(), T.ClipRectifySpec(10.0))).verdict == "gdp"
    with pytest.raises(ValueError):
        T.ClipRectifySpec(1.0, 2.0, 1.0)


def test_clip_rectify_apply():
    spec = T.ClipRectifySpec(2.0, 0.0, 1.0)
    y = spec.apply(np.array([-5.0, 0.5, 5.0]), np.random.default_rng(0))
    assert y.shape == (3,)
    clipped = spec.apply(np.full(20000, 9.0), np.random.default_rng(1))
    assert abs(clipped.mean() - 1.0) < 0.02


@pytest.mark.parametrize("p", [P.laplace_profile(2.0), P.refine(P.sgd_profile()), P.gaussian_profile(1.0)], ids=lambda p: p.label)
def test_clip_rectify_keeps_head_mu(p):
    eps_h = 10.0
    q = I.HeadTailQuery(eps_h, 2.5)
    assert I.check_condition(p, q, c=200) == "holds"
    out = T.clip_rectify(p, T.ClipRectifySpec(eps_h))
    assert I.classify(out).verdict == "gdp"
    r = G.head_measure(out, G.MeasurementConfig(eps_h=20, c=200))
    assert r.mu_hi <= 2.5


def test_subsample_identity_and_oracle():
    lap = P.laplace_profile(2.0)
    assert np.array_equal(T.poisson_subsample(lap, T.SubsampleSpec(1.0))(GRID[:32]), lap(GRID[:32]))
    sub = T.poisson_subsample(lap, T.SubsampleSpec(0.3))
    for e in (0.0, 0.1, 0.5, 1.0):
        inner = oracles.mp.log(1 + (oracles.mp.e ** oracles.mp.mpf(e) - 1) / oracles.mp.mpf(0.3))
        ref = 0.3 * float(oracles.laplace_delta(2.0, inner))
        assert sub(e) == pytest.approx(ref, rel=1e-9)
    with pytest.raises(ValueError):
        T.SubsampleSpec(0.0)


@pytest.mark.parametrize("p", [P.laplace_profile(2.0), P.refine(P.sgd_profile()), P.icea_profile()], ids=lambda p: p.label)
def test_subsample_amplifies_and_is_monotone(p):
    prev = None
    for g in (0.05, 0.2, 0.5, 0.9, 1.0):
        v = np.asarray(T.poisson_subsample(p, T.SubsampleSpec(g))(GRID))
        assert np.all(v <= np.asarray(p(GRID)) + 1e-15)
        if prev is not None:
            assert np.all(prev <= v + 1e-15)
        prev = v


def test_subsample_tail_limit_propagates():
    s = T.poisson_subsample(P.sgd_profile(), T.SubsampleSpec(0.5))
    assert I.tail_limit(s).mu_t == math.sqrt(0.5)
    assert I.tail_limit(s, numeric=True).mu_t == pytest.approx(math.sqrt(0.5), rel=0.02)
