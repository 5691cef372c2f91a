"""Fifty runs of a 0.2-DP mechanism under every accountant.

Prints the eps' each method needs for a range of delta targets and writes the
delta -> eps' curves to composition_curves.csv for plotting elsewhere.
"""

import csv
import sys
from pathlib import Path

from gdpkit import compose, gdpt

scenario = compose.CompositionScenario(eps=0.2, k=50)
report = compose.build_report(scenario, gdpt.MeasurementConfig(eps_h=10, c=1000))

header = "method".ljust(12) + "".join(f"{d:>10g}" for d in scenario.delta_targets)
print(header)
for name, row in report.rows.items():
    print(name.ljust(12) + "".join(f"{v:10.3f}" for v in row))
print(f"\ncomposed mu: gdp {report.mu_values['gdp']:.4f}, gdp_lap {report.mu_values['gdp_lap']:.4f}, "
      f"gdp_summary {report.mu_values['gdp_summary']:.4f}")

out = Path(sys.argv[1] if len(sys.argv) > 1 else "composition_curves.csv")
with out.open("w", newline="") as fh:
    w = csv.writer(fh)
    w.writerow(["delta", *compose.METHODS])
    for i, d in enumerate(report.curves["delta"]):
        w.writerow([d, *(report.curves[m][i] for m in compose.METHODS)])
print(f"curves written to {out}")
