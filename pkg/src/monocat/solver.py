"""Optimal monotone categorization via the lower convex envelope of H = S o R^-1."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import FlipUndefined
from .priors import QualitySupport, ReceiverCdf, SenderWeighting, _frozen, as_weighting

TOL_ENV = 1e-9
DEFAULT_M = 2001


@dataclass(frozen=True, eq=False)
class Categorization:
    """Sorted, disjoint pooling intervals [p, p'); everything else is revealed.

    a_hi is always separated, so a pool may end at a_hi but never contain it.
    """

    support: QualitySupport
    pools: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        pools = tuple((float(p), float(q)) for p, q in self.pools)
        lo, hi = self.support.a_lo, self.support.a_hi
        prev = lo
        for p, q in pools:
            if not q > p:
                raise ValueError(f"degenerate pool [{p}, {q})")
            if p < prev or q > hi:
                raise ValueError(f"pools must be sorted, disjoint and inside [{lo}, {hi}]")
            prev = q
        object.__setattr__(self, "pools", pools)

    @classmethod
    def full_pooling(cls, support: QualitySupport) -> "Categorization":
        return cls(support, ((support.a_lo, support.a_hi),))

    @classmethod
    def full_separation(cls, support: QualitySupport) -> "Categorization":
        return cls(support, ())

    @property
    def edges(self) -> np.ndarray:
        return np.array([e for pool in self.pools for e in pool], dtype=float)

    def pool_index(self, a, side: str = "right") -> np.ndarray:
        """Index of the pool holding each quality, -1 where separating.

        ``side="left"`` answers for the left limit, so a pool's right edge maps
        to that pool.
        """
        a = np.asarray(a, dtype=float)
        if not self.pools:
            return np.full(a.shape, -1, dtype=int)
        lefts = np.array([p for p, _ in self.pools])
        rights = np.array([q for _, q in self.pools])
        if side == "right":
            k = np.searchsorted(lefts, a, side="right") - 1
            kk = np.clip(k, 0, None)
            inside = (k >= 0) & (a < rights[kk])
        else:
            k = np.searchsorted(lefts, a, side="left") - 1
            kk = np.clip(k, 0, None)
            inside = (k >= 0) & (a <= rights[kk])
        return np.where(inside, k, -1)

    def is_full_pooling(self) -> bool:
        return self.pools == ((self.support.a_lo, self.support.a_hi),)

    def separating_intervals(self) -> list[tuple[float, float]]:
        out, prev = [], self.support.a_lo
        for p, q in self.pools:
            if p > prev:
                out.append((prev, p))
            prev = q
        if prev < self.support.a_hi:
            out.append((prev, self.support.a_hi))
        return out

    def pooled_length(self) -> float:
        return float(sum(q - p for p, q in self.pools))


@dataclass(frozen=True, eq=False)
class PercentileCurve:
    """H sampled on a percentile grid, with its lower convex envelope once computed.

    ``pooled[k]`` refers to the cell [z_k, z_{k+1}); the last entry is always False.
    """

    z: np.ndarray
    a: np.ndarray
    h: np.ndarray
    env: np.ndarray | None = None
    pooled: np.ndarray | None = None
    vertices: np.ndarray | None = None
    percentile_pools: tuple[tuple[int, int], ...] = ()

    @property
    def gap(self) -> np.ndarray:
        return self.h - self.env

    def is_affine(self, tol: float = TOL_ENV) -> bool:
        chord = self.h[0] + self.z * (self.h[-1] - self.h[0])
        return bool(np.max(np.abs(self.h - chord)) <= tol)


def compose_h(S: SenderWeighting, R: ReceiverCdf, m: int = DEFAULT_M) -> PercentileCurve:
    """Sample H = S o R^-1 on a uniform percentile grid of ``m`` points.

    The grid is augmented with every breakpoint of H (images of the receiver
    and sender knots), so H is exactly linear between consecutive samples.
    """
    if S.support != R.support:
        raise ValueError("sender and receiver live on different supports")
    if m < 3:
        raise ValueError("percentile grid size must be at least 3")
    z = np.concatenate([np.linspace(0.0, 1.0, m), R.p, R(S.x)])
    z = np.unique(np.clip(z, 0.0, 1.0))
    keep = np.ones(len(z), dtype=bool)
    keep[1:] = np.diff(z) > 1e-13
    z = z[keep]
    z[0], z[-1] = 0.0, 1.0
    a = R.inverse(z)
    a[0], a[-1] = R.support.a_lo, R.support.a_hi
    h = S.right_limit(a)
    h[0] = S.value_at_lo
    h[-1] = 1.0
    return PercentileCurve(_frozen(z), _frozen(a), _frozen(h))


def _lower_hull(z: np.ndarray, h: np.ndarray) -> np.ndarray:
    # Andrew's monotone chain, lower half only; collinear points are dropped
    hull: list[int] = []
    for k in range(len(z)):
        while len(hull) >= 2:
            i, j = hull[-2], hull[-1]
            cross = (z[j] - z[i]) * (h[k] - h[i]) - (h[j] - h[i]) * (z[k] - z[i])
            if cross <= 0:
                hull.pop()
            else:
                break
        hull.append(k)
    return np.array(hull, dtype=int)


def lower_convex_envelope(curve: PercentileCurve, tol: float = TOL_ENV) -> PercentileCurve:
    """Attach the lower convex envelope and the pooled/separating classification.

    Within each hull edge, the points where H sits strictly above the chord
    (by more than ``tol``) determine one percentile pool, bounded by the
    nearest samples on either side.  Touching points that are not hull
    vertices do not split a pool; leading and trailing stretches where H
    coincides with the chord are left separating.
    """
    z, h = curve.z, curve.h
    verts = _lower_hull(z, h)
    env = np.interp(z, z[verts], h[verts])
    env[verts] = h[verts]
    gap = h - env
    pooled = np.zeros(len(z), dtype=bool)
    pools = []
    for i, j in zip(verts[:-1], verts[1:]):
        if j - i < 2:
            continue
        above = np.nonzero(gap[i + 1:j] > tol)[0]
        if len(above) == 0:
            continue
        s, e = i + above[0], i + 2 + above[-1]
        pools.append((int(s), int(e)))
        pooled[s:e] = True
    return PercentileCurve(curve.z, curve.a, curve.h, _frozen(env), _frozen(pooled, bool),
                           _frozen(verts, int), tuple(pools))


def extract_categorization(curve: PercentileCurve, R: ReceiverCdf) -> Categorization:
    """Map the envelope's percentile pools [z_s, z_e) to quality pools."""
    if curve.env is None:
        raise ValueError("envelope not computed; call lower_convex_envelope first")
    pools = tuple((float(curve.a[s]), float(curve.a[e])) for s, e in curve.percentile_pools)
    return Categorization(R.support, pools)


@dataclass(frozen=True, eq=False)
class Solution:
    S: SenderWeighting
    R: ReceiverCdf
    curve: PercentileCurve
    categorization: Categorization

    @property
    def pools(self):
        return self.categorization.pools


def solve(S: SenderWeighting, R: ReceiverCdf, m: int = DEFAULT_M, tol: float = TOL_ENV) -> Solution:
    curve = lower_convex_envelope(compose_h(S, R, m), tol)
    return Solution(S, R, curve, extract_categorization(curve, R))


def flip_problem(S: SenderWeighting, R: ReceiverCdf) -> tuple[SenderWeighting, ReceiverCdf]:
    """Swap the roles of the priors; needs S to be a continuous strictly increasing cdf."""
    if abs(S.value_at_lo) > 1e-12:
        raise FlipUndefined(f"flip undefined: S(a_lo) = {S.value_at_lo:.6g} is not 0")
    if S.jump_at_lo > 1e-12:
        raise FlipUndefined(f"flip undefined: S jumps by {S.jump_at_lo:.6g} at a_lo")
    if np.any(np.diff(S.v) < 0):
        raise FlipUndefined("flip undefined: S is not monotone")
    try:
        R_flip = ReceiverCdf(S.support, S.x, S.v, smooth=S.smooth)
    except ValueError as exc:
        raise FlipUndefined(f"flip undefined: {exc}") from exc
    return as_weighting(R), R_flip
