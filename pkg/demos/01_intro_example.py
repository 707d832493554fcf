"""A sender who only cares about the top: pooling beats revealing.

Qualities are uniform on [0, 1] for the receiver, but the sender's weight
sits uniformly on [0.75 - eps, 0.75 + eps].  Revealing everything pays the
sender E_S[a] = 3/4; pooling everything pays the receiver's mean 1/2.  The
best monotone scheme reveals the bottom and pools the whole top stretch
[0.75 - eps, 1), earning 7/8 - eps/2.
"""
from monocat import Categorization, build_receiver, build_sender, dp_oracle, sender_values, solve

R = build_receiver("uniform")

for eps in (0.05, 0.10):
    S = build_sender("uniform", {"lo": 0.75 - eps, "hi": 0.75 + eps})
    sol = solve(S, R)
    values = sender_values(sol.categorization, S, R)
    print(f"eps = {eps}")
    print(f"  optimal pools       : {sol.pools}")
    print(f"  value (three routes): " + ", ".join(f"{k}={v:.6f}" for k, v in values.items()))
    print(f"  closed form         : {7 / 8 - eps / 2:.6f}")

    full_pool = sender_values(Categorization.full_pooling(R.support), S, R)["direct"]
    full_sep = sender_values(Categorization.full_separation(R.support), S, R)["direct"]
    print(f"  pool everything     : {full_pool:.6f}")
    print(f"  reveal everything   : {full_sep:.6f}")

    v_dp, A_dp = dp_oracle(S, R, n=400)
    print(f"  brute-force DP (400): {v_dp:.6f} with pools {A_dp.pools}")

# The envelope: H = S o R^-1 is flat at 0 until z = 0.75 - eps, then climbs.
# Its lower convex envelope is the chord from (0.75 - eps, 0) to (1, 1).
curve = sol.curve
print("hull vertices (z, H):", [(round(float(curve.z[k]), 4), round(float(curve.h[k]), 4)) for k in curve.vertices])
