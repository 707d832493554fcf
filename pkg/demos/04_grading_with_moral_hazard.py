"""Grade design when grades also have to motivate learning.

A school chooses a monotone grading scheme.  Students pick how much to learn;
the market pays expected ability given the grade plus lam per unit of
learning; effort costs c(a) per unit.  Tuition is set for the most
pessimistic family (belief F0), so the school effectively maximises with an
induced weighting S that folds in the incentive constraints.

Here R is uniform, F0(a) = a^gamma, c(a) = 1/a and parents ignore effort
costs.  The induced S is concave-convex, so the school pools the bottom and
grades everyone above a threshold a~ exactly.
"""
import numpy as np

from monocat import censorship_config, censorship_threshold_sweep, induce_sender, solve_school, verify_ic
from monocat.schooling import check_school_full_pooling

cfg = censorship_config(gamma=0.5, lam=0.7)
S, K = induce_sender(cfg)
sol = solve_school(cfg)
print("gamma=0.5, lambda=0.7")
print(f"  induced S is a cdf     : {S.is_cdf()}")
print(f"  grading scheme         : pool {[tuple(round(e, 3) for e in q) for q in sol.categorization.pools]}, reveal above a~ = {sol.a_tilde:.3f}")
print(f"  school payoff          : {sol.payoff:.5f}")
print(f"  worst gain from lying  : {verify_ic(sol.learning, sol.categorization, cfg):.2e}")
print(f"  sufficient pooling test: {check_school_full_pooling(cfg)}")

ell = sol.learning
for a in (0.2, 0.5, 0.8, 0.9, 1.0):
    k = int(np.searchsorted(ell.x, a))
    print(f"  learning at a={a:.1f}     : {ell.values[k]:.4f}")

# Comparative statics: a~ over a grid of (gamma, lambda)
gammas = (0.3, 0.5, 0.7, 1.0)
lambdas = (0.1, 0.3, 0.5, 0.6, 0.7, 0.8, 0.9)
rows = censorship_threshold_sweep(gammas, lambdas)
print("\n  a~ by gamma (rows) and lambda (columns)")
print("         " + "".join(f"{lam:>7.1f}" for lam in lambdas))
for g in gammas:
    print(f"  {g:>5.1f}  " + "".join(f"{r['a_tilde']:>7.3f}" for r in rows if r["gamma"] == g))
print("  More optimistic families (higher gamma) get more separation; in lambda the")
print("  threshold first falls, then rises again at the top of the range.")
