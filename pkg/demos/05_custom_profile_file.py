"""Bring your own profile: a CSV of (eps, delta) knots.

A tabulated profile is extended between knots by the implication order, so
the resulting curve is a valid (if conservative) guarantee at every eps.
"""

import tempfile
from pathlib import Path

import numpy as np

from gdpkit import gdpt, identify, profiles

eps = np.linspace(0.0, 12.0, 49)
delta = profiles.gaussian_profile(1.2)(eps)
with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "knots.csv"
    path.write_text("eps,delta\n" + "".join(f"{float(e)!r},{float(d)!r}\n" for e, d in zip(eps, delta)))
    p = profiles.load_profile_csv(path)

r = gdpt.head_measure(p, gdpt.MeasurementConfig(eps_h=12, c=500))
print(f"knots from a 1.2-GDP curve measure as mu in [{r.mu_lo:.4f}, {r.mu_hi:.4f}]")
print("the excess over 1.2 is the price of only knowing the curve at 49 points")
print(f"head condition for mu=1.3 on [0, 12]: "
      f"{identify.check_condition(p, identify.HeadTailQuery(12.0, 1.3), c=500)}")
