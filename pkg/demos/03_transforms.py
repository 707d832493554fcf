"""Applications that reduce to a different sender weighting.

Each application keeps a common prior R but changes what the sender values:
  * a retailer earning a fee pi(v) per sale of quality v: dS = pi dR,
  * a school maximising end-of-year ability with peer effects: dS = lambda2 dR,
  * a designer with quadratic payoff lambda1(x) A + lambda2 A^2,
  * welfare weights on groups (affirmative action): S = sum w_G F_G, R = sum F_G.
"""
import numpy as np

from monocat import (build_receiver, check_full_pooling, check_full_separation, sender_value, solve,
                     transform_group_mixture, transform_peer_effects, transform_quadratic, transform_retail)

R = build_receiver("logistic", {"center": 0.5, "scale": 0.15})


def show(label, S, R):
    sol = solve(S, R)
    print(f"{label:<38} pools={[tuple(round(e, 3) for e in p) for p in sol.pools]!s:<28} "
          f"value={sender_value(sol.categorization, S, R):.4f} "
          f"full pooling optimal={check_full_pooling(S, R)} full separation optimal={check_full_separation(S, R)}")


show("retail, fee rising in quality", transform_retail(R, lambda v: 0.2 + np.asarray(v)), R)
show("retail, fee falling in quality", transform_retail(R, lambda v: 1.5 - np.asarray(v)), R)
show("peer effects, hump-shaped", transform_peer_effects(R, lambda a: 1 + np.sin(np.pi * np.asarray(a))), R)

U = build_receiver("uniform")
show("quadratic, lambda1=1, lambda2=10", transform_quadratic(U, lambda x: np.ones(np.shape(x)), 10.0), U)
show("quadratic, lambda1=2, lambda2=-1", transform_quadratic(U, lambda x: np.full(np.shape(x), 2.0), -1.0), U)

# two groups with different ability distributions; the designer weights the
# disadvantaged group (skewed low) twice as heavily as the advantaged one
low = build_receiver("power", {"k": 0.5})
high = build_receiver("power", {"k": 2.0})
S, Rg = transform_group_mixture([(2.0, low), (1.0, high)])
show("group weights (2 on low, 1 on high)", S, Rg)
