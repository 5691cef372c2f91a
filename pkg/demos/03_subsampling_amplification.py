"""How much Poisson subsampling buys a Laplace mechanism, measured in mu."""

from gdpkit import gdpt, profiles, transform

base = profiles.laplace_profile(2.0)
cfg = gdpt.MeasurementConfig(eps_h=10, c=1000)
print("gamma   mu bracket")
for gamma in (1.0, 0.5, 0.25, 0.1, 0.01):
    p = transform.poisson_subsample(base, transform.SubsampleSpec(gamma))
    r = gdpt.head_measure(p, cfg)
    print(f"{gamma:5.2f}   [{r.mu_lo:.5f}, {r.mu_hi:.5f}]")
