"""Is a 2-pure-DP Laplace mechanism Gaussian-DP, and with which mu?

Walks through the three questions the toolkit answers for a single mechanism:
does its profile have a finite tail limit, what does its GDP transformation
look like over the head, and what is the smallest certified mu.
"""

import numpy as np

from gdpkit import gdpt, identify, profiles

lap = profiles.laplace_profile(2.0)

verdict = identify.classify(lap)
print(f"tail verdict: {verdict.verdict} (mu_t = {verdict.mu_lower_bound})")
print("the tail limit is only a lower bound; the head decides the actual mu\n")

eps = np.array([0.0, 0.5, 1.0, 1.5, 2.0, 3.0])
lo, hi = gdpt.gdpt_curve(lap, eps, margin=1e-6)
print("eps    delta(eps)   GDPT bracket")
for e, d, a, b in zip(eps, lap(eps), lo, hi):
    print(f"{e:4.1f}   {d:.6f}     [{a:.5f}, {b:.5f}]")

for c in (100, 1000):
    r = gdpt.head_measure(lap, gdpt.MeasurementConfig(eps_h=10, c=c))
    print(f"\nc={c}: mu in [{r.mu_lo:.5f}, {r.mu_hi:.5f}] on a grid of {r.grid_n} steps, "
          f"{r.binary_search_count} binary searches")
