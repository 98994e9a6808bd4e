"""Asymptotic-variance comparison across dependence strengths.

Reproduces the location-only sweep: the joint likelihood is best
everywhere, the marginal combination tracks it, and the moment combination
overtakes the marginal one as dependence strengthens.

Run:  python demos/03_variance_curves.py
"""

from mfmc import asymptotics as asy
from mfmc.models import BivariateGumbelLogistic, GumbelLocation

model = BivariateGumbelLogistic(mu1=2, sigma1=4, mu2=2, sigma2=1, r=0.5)
family = GumbelLocation(2.0, 4.0)  # location-only view: sigma1 known

methods = ("baseline-ml", "baseline-moment", "joint-ml", "moment-mf",
           "marginal-ml-mf")
grid = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0]
rows, warnings = asy.variance_curve(model, "r", grid, methods=methods,
                                    family=family, dependence="known")

table = {}
for row in rows:
    table.setdefault(row["r"], {})[row["method"]] = row["variance"]

header = f"{'r':>4s} " + " ".join(f"{m:>15s}" for m in methods)
print("n-scaled asymptotic variance of the location estimate")
print(header)
for r in grid:
    cells = " ".join(f"{table[r][m]:15.4f}" for m in methods)
    print(f"{r:4.2f} {cells}")
print("\n(r = 1 is independence: combined methods fall back to their "
      "baselines; small r is strong dependence)")
if warnings:
    print("warnings:", warnings)
