"""Binary outcomes: copula-coupled indicators and the mixed model.

For indicator margins the combined estimator nearly matches full maximum
likelihood under both copulas; under the conditional mixture the combined
moment route loses its edge and the likelihood pulls ahead as p grows.

Run:  python demos/04_binary_outcomes.py
"""

from mfmc import asymptotics as asy
from mfmc.models import BernoulliCopula, BernoulliMixture

print("copula-coupled indicators, p2 = 0.5, p1 sweep at fixed dependence")
for copula_id, dep in (("gaussian", 0.7), ("gumbel-hougaard", 0.25)):
    print(f"\n  {copula_id} copula, dependence {dep}")
    print(f"  {'p1':>5s} {'baseline':>9s} {'combined':>9s} {'joint-ml':>9s}")
    for p1 in (0.2, 0.35, 0.5, 0.65, 0.8):
        model = BernoulliCopula(p1, 0.5, copula_id, dep)
        bl = asy.asym_cov("baseline-ml", model)[0, 0]
        mf = asy.asym_cov("moment-mf", model, dependence="known")[0, 0]
        ml = asy.asym_cov("joint-ml", model, dependence="known")[0, 0]
        print(f"  {p1:5.2f} {bl:9.4f} {mf:9.4f} {ml:9.4f}")

print("\nconditionally mixed indicators, uniform mixing, p sweep")
print(f"  {'p':>5s} {'baseline':>9s} {'joint-ml':>9s} {'ratio':>6s}")
for p in (0.1, 0.3, 0.5, 0.7, 0.9):
    model = BernoulliMixture(p)
    bl = asy.asym_cov("baseline-ml", model)[0, 0]
    ml = asy.asym_cov("joint-ml", model)[0, 0]
    print(f"  {p:5.2f} {bl:9.4f} {ml:9.4f} {ml / bl:6.3f}")
print("\n(cov(X1, X2) =", BernoulliMixture(0.5).covariance(),
      "at p = 0.5: the mean combination has little to exploit, the full "
      "likelihood exploits the cell structure instead)")
