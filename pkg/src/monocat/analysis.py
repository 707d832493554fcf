"""Grid tests for pooling/separation dominance and a per-instance diagnostics report."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import FlipUndefined
from .priors import ReceiverCdf, SenderWeighting, merge_grid
from .solver import (DEFAULT_M, TOL_ENV, Categorization, PercentileCurve, compose_h, flip_problem,
                     lower_convex_envelope, solve)


def _quality_grid(S: SenderWeighting, R: ReceiverCdf, lo=None, hi=None) -> np.ndarray:
    lo = R.support.a_lo if lo is None else lo
    hi = R.support.a_hi if hi is None else hi
    inner = lambda x: x[(x > lo) & (x < hi)]
    return merge_grid(inner(S.x), inner(R.x), lo=lo, hi=hi)


def full_pooling_margin(S: SenderWeighting, R: ReceiverCdf) -> float:
    """min over x of S(x) - S(a_lo) - (1 - S(a_lo)) R(x); nonnegative iff pooling everything is optimal."""
    x = _quality_grid(S, R)
    s_lo = S.value_at_lo
    gap = S.right_limit(x[1:]) - s_lo - (1.0 - s_lo) * R(x[1:])
    return float(min(gap.min(), 0.0))


def check_full_pooling(S: SenderWeighting, R: ReceiverCdf, tol: float = TOL_ENV) -> bool:
    return full_pooling_margin(S, R) >= -tol


def _convexity_margin(curve: PercentileCurve) -> float:
    # most negative normalised second difference; exact for piecewise-linear H
    z, h = curve.z, curve.h
    if len(z) < 3:
        return 0.0
    dz0, dz1 = z[1:-1] - z[:-2], z[2:] - z[1:-1]
    chord = (dz1 * h[:-2] + dz0 * h[2:]) / (dz0 + dz1)
    return float(min(np.min(chord - h[1:-1]), 0.0))


def full_separation_margin(S: SenderWeighting, R: ReceiverCdf, m: int = DEFAULT_M) -> float:
    return _convexity_margin(compose_h(S, R, m))


def check_full_separation(S: SenderWeighting, R: ReceiverCdf, m: int = DEFAULT_M, tol: float = TOL_ENV) -> bool:
    """H convex on [0, 1], i.e. S dominates R in the likelihood ratio order when S is a cdf."""
    return full_separation_margin(S, R, m) >= -tol


def _check_interval(interval):
    a, b = map(float, interval)
    if not b > a:
        raise ValueError(f"degenerate interval [{a}, {b}]")
    return a, b


def fosd_margin_on(S: SenderWeighting, R: ReceiverCdf, interval) -> float:
    """Worst violation of the conditional chord inequality on [a, b]."""
    a, b = _check_interval(interval)
    x = _quality_grid(S, R, a, b)
    slope = (S(b) - S(a)) / (R(b) - R(a))
    gap = (S(x) - S(a)) - (R(x) - R(a)) * slope
    return float(min(gap[1:].min(), 0.0))


def check_fosd_on(S: SenderWeighting, R: ReceiverCdf, interval, tol: float = TOL_ENV) -> bool:
    """R fosd S conditional on [a, b]: every point of H on the interval sits on or above the chord."""
    return fosd_margin_on(S, R, interval) >= -tol


def lr_margin_on(S: SenderWeighting, R: ReceiverCdf, interval) -> float:
    a, b = _check_interval(interval)
    x = _quality_grid(S, R, a, b)
    z = R(x)
    h = S(x)
    return _convexity_margin(PercentileCurve(z, x, h))


def check_lr_on(S: SenderWeighting, R: ReceiverCdf, interval, tol: float = TOL_ENV) -> bool:
    """S dominates R in likelihood ratio on [a, b): H is convex on [R(a), R(b)]."""
    return lr_margin_on(S, R, interval) >= -tol


@dataclass
class FlipReport:
    coverage: float
    overlap: float
    degenerate: bool
    original: Categorization
    flipped: Categorization


def _union_length(intervals) -> float:
    total, end = 0.0, -np.inf
    for p, q in sorted(intervals):
        if q <= end:
            continue
        total += q - max(p, end)
        end = q
    return total


def _intersection_length(first, second) -> float:
    total = 0.0
    for p, q in first:
        for r, s in second:
            total += max(0.0, min(q, s) - max(p, r))
    return total


def flip_report(S: SenderWeighting, R: ReceiverCdf, m: int = DEFAULT_M, tol: float = TOL_ENV) -> FlipReport:
    """Pooled fractions of the support in the original problem united/intersected with the flipped one.

    When H is affine, pooling and separation tie everywhere; the report is
    flagged degenerate and coverage is taken to be 1.
    """
    S_flip, R_flip = flip_problem(S, R)
    original = solve(S, R, m, tol)
    flipped = solve(S_flip, R_flip, m, tol)
    width = R.support.width
    degenerate = original.curve.is_affine(tol)
    cover = 1.0 if degenerate else _union_length(original.pools + flipped.pools) / width
    overlap = _intersection_length(original.pools, flipped.pools) / width
    return FlipReport(cover, overlap, degenerate, original.categorization, flipped.categorization)


def check_alternation(S: SenderWeighting, R: ReceiverCdf, A: Categorization):
    """True iff consecutive pools are split by some separating stretch; None when densities are not smooth."""
    if not (S.smooth and R.smooth):
        return None
    return all(q < p_next for (_, q), (p_next, _) in zip(A.pools[:-1], A.pools[1:]))


@dataclass
class DiagnosticsReport:
    full_pooling_optimal: bool
    full_separation_optimal: bool
    fosd_global: bool
    lr_dominance_global: bool
    degenerate_affine: bool
    full_pooling_margin: float
    full_separation_margin: float
    interval_results: list = field(default_factory=list)
    flip_coverage: float | None = None
    flip_overlap: float | None = None
    flip_full_pooling: bool | None = None
    flip_note: str | None = None
    alternation_ok: bool | None = None

    @property
    def flags(self) -> list[str]:
        out = []
        if self.degenerate_affine:
            out.append("degenerate: H affine")
        if self.flip_note:
            out.append(self.flip_note)
        if self.alternation_ok is None:
            out.append("alternation: n/a (densities not known smooth)")
        return out

    def to_dict(self) -> dict:
        d = asdict(self)
        d["flags"] = self.flags
        return d


def diagnose(S: SenderWeighting, R: ReceiverCdf, m: int = DEFAULT_M, intervals=(),
             A: Categorization | None = None, tol: float = TOL_ENV) -> DiagnosticsReport:
    curve = lower_convex_envelope(compose_h(S, R, m), tol)
    if A is None:
        A = solve(S, R, m, tol).categorization
    fp = full_pooling_margin(S, R)
    fs = _convexity_margin(curve)
    is_cdf = S.is_cdf()
    report = DiagnosticsReport(
        full_pooling_optimal=fp >= -tol,
        full_separation_optimal=fs >= -tol,
        fosd_global=is_cdf and fp >= -tol,
        lr_dominance_global=is_cdf and fs >= -tol,
        degenerate_affine=curve.is_affine(tol),
        full_pooling_margin=fp,
        full_separation_margin=fs,
        alternation_ok=check_alternation(S, R, A),
    )
    for iv in intervals:
        a, b = _check_interval(iv)
        report.interval_results.append({
            "interval": [a, b],
            "fosd": check_fosd_on(S, R, (a, b), tol),
            "fosd_margin": fosd_margin_on(S, R, (a, b)),
            "lr": check_lr_on(S, R, (a, b), tol),
            "lr_margin": lr_margin_on(S, R, (a, b)),
        })
    try:
        fr = flip_report(S, R, m, tol)
    except FlipUndefined as exc:
        report.flip_note = str(exc)
    else:
        S_flip, R_flip = flip_problem(S, R)
        report.flip_coverage = fr.coverage
        report.flip_overlap = fr.overlap
        report.flip_full_pooling = check_full_pooling(S_flip, R_flip, tol)
    return report
