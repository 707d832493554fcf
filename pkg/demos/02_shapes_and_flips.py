"""How the shape of H = S o R^-1 decides what gets pooled.

The sender's weighting is a steep logistic (convex then concave).  Against a
concave receiver cdf, the envelope pools a middle band and separates at both
ends; against a convex receiver the pattern flips to pool-separate-pool.
Swapping the two priors (the "flipped" problem) pools whatever the original
problem separated, and some qualities are pooled in both.
"""
import sys
from pathlib import Path

from monocat import build_receiver, build_sender, check_alternation, diagnose, flip_report, solve

S = build_sender("logistic", {"center": 0.5, "scale": 0.08})
receivers = {
    "concave R (1 - (1-a)^3)": build_receiver("dual_power", {"k": 3}),
    "uniform R": build_receiver("uniform"),
    "convex R (a^2)": build_receiver("power", {"k": 2}),
}

for label, R in receivers.items():
    sol = solve(S, R)
    A = sol.categorization
    fr = flip_report(S, R)
    print(label)
    print(f"  pools            : {[tuple(round(e, 3) for e in p) for p in A.pools]}")
    print(f"  separating       : {[tuple(round(e, 3) for e in iv) for iv in A.separating_intervals()]}")
    print(f"  alternation ok   : {check_alternation(S, R, A)}")
    print(f"  flipped pools    : {[tuple(round(e, 3) for e in p) for p in fr.flipped.pools]}")
    print(f"  coverage/overlap : {fr.coverage:.3f} / {fr.overlap:.3f}")

# A full diagnostics report, with interval-level dominance checks
rep = diagnose(S, receivers["uniform R"], intervals=[(0.1, 0.3), (0.45, 0.55), (0.7, 0.95)])
for row in rep.interval_results:
    print(f"  on {row['interval']}: R fosd S = {row['fosd']}, S lr-dominates R = {row['lr']}")

# Optional figure (needs matplotlib): python demos/02_shapes_and_flips.py out.svg
if len(sys.argv) > 1:
    from monocat.cli import write_svg

    ok = write_svg(Path(sys.argv[1]), solve(S, receivers["convex R (a^2)"]))
    print("figure written" if ok else "matplotlib not installed; no figure")
