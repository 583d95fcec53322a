"""Survival probability of the drifted Brownian barrier.

Monte Carlo survival frequencies against the two closed-form anchors: the
lower bound 1 - exp(-alpha*beta/nu^2) and the exact infinite-horizon value
1 - exp(-2*alpha*beta/nu^2) from the reflection principle.  The finite-
horizon estimate approaches the exact value from above as T grows.
"""

from hydrostat import stochastic
from hydrostat.stochastic import GoodSetParams

params = GoodSetParams(alpha=2.0, beta=0.5, nu=1.0)
print(f"barrier: alpha={params.alpha}, beta={params.beta}, nu={params.nu}")
print(f"  lower bound : {stochastic.survival_paper_bound(params):.4f}")
print(f"  exact value : {stochastic.survival_exact(params):.4f}  "
      f"(infinite horizon)")
print()
print(f"{'T':>6} {'estimate':>9} {'95% CI':>19}")
for T in (2.0, 10.0, 50.0):
    est = stochastic.good_set_probability(params, T=T, dt=1e-3,
                                          n_paths=2000, seed=7)
    print(f"{T:6.0f} {est.estimate:9.4f}   [{est.ci_low:.4f}, {est.ci_high:.4f}]")

print()
print("varying the barrier height at beta=nu=1, T=20:")
print(f"{'alpha':>6} {'estimate':>9} {'bound':>7} {'exact':>7}")
for alpha in (0.5, 1.0, 2.0, 4.0):
    p = GoodSetParams(alpha=alpha, beta=1.0, nu=1.0)
    est = stochastic.good_set_probability(p, T=20.0, dt=1e-3,
                                          n_paths=1000, seed=11)
    print(f"{alpha:6.1f} {est.estimate:9.4f} {est.paper_bound:7.4f} "
          f"{est.exact_value:7.4f}")
