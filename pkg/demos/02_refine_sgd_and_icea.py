"""Tightening published (eps, delta) curves before measuring them.

Published guarantees for noisy SGD and for the ICEA release are loose near
eps = 0 (delta(0) reads as 1). Refining them with the implication order
fixes the head, after which both can be measured. Only SGD survives the tail
test: the ICEA curve decays too slowly to be GDP for any mu.
"""

from gdpkit import gdpt, identify, profiles

cfg = gdpt.MeasurementConfig(eps_h=10, c=1000)
for name, raw in (("sgd", profiles.sgd_profile()), ("icea", profiles.icea_profile())):
    fine = profiles.refine(raw)
    print(f"{name}: delta(0) {float(raw(0.0)):.4f} -> {float(fine(0.0)):.4f} after refinement "
          f"(crossover at eps = {fine.params['crossover']:.4f})")
    tail = identify.tail_limit(fine)
    r = gdpt.head_measure(fine, cfg)
    print(f"  head mu in [{r.mu_lo:.5f}, {r.mu_hi:.5f}]; tail limit {tail.mu_t}")
    print(f"  classification: {identify.classify(fine).verdict}\n")

# Nothing certifies the naive forms: delta(0) = 1 already exceeds any mu's curve.
try:
    gdpt.head_measure(profiles.sgd_profile(), cfg)
except gdpt.CeilingExceeded as exc:
    print(f"unrefined sgd: {exc}")
