"""Receiver cdfs, sender weightings and the transforms that induce weightings.

Both priors are stored as piecewise-linear knot lists.  Analytic families are
sampled exactly at the knots, so composition and inversion stay inside the
representation and every Stieltjes integral against them is a finite sum.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import ModelError

SLOPE_FLOOR = 1e-12
DEFAULT_N = 1001
_CLOSE = 1e-9


def _frozen(a, dtype=float) -> np.ndarray:
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


def merge_grid(*parts: Iterable[float], lo: float, hi: float) -> np.ndarray:
    """Sorted union of grid pieces clipped to [lo, hi], near-duplicates dropped."""
    pts = np.concatenate([np.atleast_1d(np.asarray(p, dtype=float)) for p in parts] + [np.array([lo, hi])])
    pts = np.unique(np.clip(pts, lo, hi))
    scale = max(hi - lo, 1.0)
    keep = np.ones(len(pts), dtype=bool)
    keep[1:] = np.diff(pts) > 1e-13 * scale
    pts = pts[keep]
    pts[0], pts[-1] = lo, hi
    return pts


@dataclass(frozen=True)
class QualitySupport:
    a_lo: float = 0.0
    a_hi: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.a_lo) and np.isfinite(self.a_hi)):
            raise ValueError("support endpoints must be finite")
        if not self.a_lo < self.a_hi:
            raise ValueError(f"empty support [{self.a_lo}, {self.a_hi}]")

    @property
    def width(self) -> float:
        return self.a_hi - self.a_lo

    def grid(self, n: int = DEFAULT_N) -> np.ndarray:
        return np.linspace(self.a_lo, self.a_hi, n)


@dataclass(frozen=True, eq=False)
class ReceiverCdf:
    """Continuous, strictly increasing cdf with linear interpolation between knots."""

    support: QualitySupport
    x: np.ndarray
    p: np.ndarray
    smooth: bool = False

    def __post_init__(self):
        x, p = _frozen(self.x), _frozen(self.p)
        if x.shape != p.shape or x.ndim != 1 or len(x) < 2:
            raise ValueError("knot arrays must be 1-d of equal length >= 2")
        if x[0] != self.support.a_lo or x[-1] != self.support.a_hi:
            raise ValueError("knots must span the support exactly")
        if not np.all(np.isfinite(p)):
            raise ValueError("receiver cdf has non-finite values")
        if abs(p[0]) > _CLOSE or abs(p[-1] - 1.0) > _CLOSE:
            raise ValueError(f"receiver cdf must run from 0 to 1, got {p[0]} .. {p[-1]}")
        dx = np.diff(x)
        if np.any(dx <= 0):
            raise ValueError("receiver knots must be strictly increasing in quality")
        slope = np.diff(p) / dx
        if np.any(slope < SLOPE_FLOOR):
            k = int(np.argmin(slope))
            raise ValueError(
                f"receiver cdf is not strictly increasing near x={x[k]:.6g} (slope {slope[k]:.3g})"
            )
        p = np.array(p)
        p[0], p[-1] = 0.0, 1.0
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "p", _frozen(p))

    def __call__(self, a):
        return np.interp(a, self.x, self.p)

    def inverse(self, z):
        return np.interp(z, self.p, self.x)

    def mean(self) -> float:
        mid = 0.5 * (self.x[1:] + self.x[:-1])
        return float(np.dot(mid, np.diff(self.p)))


@dataclass(frozen=True, eq=False)
class SignedGridMeasure:
    grid: np.ndarray
    cell_masses: np.ndarray
    atom_at_lo: float

    @property
    def total(self) -> float:
        return float(self.cell_masses.sum() + self.atom_at_lo)


@dataclass(frozen=True, eq=False)
class SenderWeighting:
    """Left-continuous bounded-variation weighting with S(a_hi) = 1.

    ``v`` holds the right limits at the knots; ``v[0]`` is S just above a_lo and
    ``value_at_lo`` is S(a_lo) itself.  The difference is the only permitted
    jump, and it must be upward.
    """

    support: QualitySupport
    x: np.ndarray
    v: np.ndarray
    value_at_lo: float
    smooth: bool = False

    def __post_init__(self):
        x, v = _frozen(self.x), _frozen(self.v)
        if x.shape != v.shape or x.ndim != 1 or len(x) < 2:
            raise ValueError("knot arrays must be 1-d of equal length >= 2")
        if x[0] != self.support.a_lo or x[-1] != self.support.a_hi:
            raise ValueError("knots must span the support exactly")
        if np.any(np.diff(x) <= 0):
            raise ValueError("sender knots must be strictly increasing in quality")
        if not (np.all(np.isfinite(v)) and np.isfinite(self.value_at_lo)):
            raise ValueError("sender weighting has non-finite values")
        if abs(v[-1] - 1.0) > _CLOSE:
            raise ValueError(f"sender weighting must equal 1 at a_hi, got {v[-1]}")
        if v[0] - self.value_at_lo < -_CLOSE:
            raise ValueError("only an upward jump at a_lo is permitted")
        v = np.array(v)
        v[-1] = 1.0
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "v", _frozen(v))
        object.__setattr__(self, "value_at_lo", float(min(self.value_at_lo, v[0])))

    @property
    def jump_at_lo(self) -> float:
        return float(self.v[0] - self.value_at_lo)

    def __call__(self, a):
        a = np.asarray(a, dtype=float)
        out = np.interp(a, self.x, self.v)
        return np.where(a <= self.support.a_lo, self.value_at_lo, out)

    def right_limit(self, a):
        return np.interp(a, self.x, self.v)

    def measure(self) -> SignedGridMeasure:
        return SignedGridMeasure(self.x, _frozen(np.diff(self.v)), self.jump_at_lo)

    def is_cdf(self, tol: float = _CLOSE) -> bool:
        return (
            abs(self.value_at_lo) <= tol
            and self.jump_at_lo <= tol
            and bool(np.all(np.diff(self.v) >= -tol))
        )


# ---------------------------------------------------------------------------
# analytic families


def _sigmoid(t):
    return 0.5 * (1.0 + np.tanh(0.5 * t))


def _family(kind, params: Mapping | None, support: QualitySupport):
    """Return ``(f, smooth, kinks)`` for a family descriptor on ``support``."""
    params = dict(params or {})
    lo, hi = support.a_lo, support.a_hi
    w = support.width

    if callable(kind):
        return kind, bool(params.get("smooth", False)), np.asarray(params.get("kinks", []), dtype=float)

    if kind == "uniform":
        u_lo = float(params.get("lo", lo))
        u_hi = float(params.get("hi", hi))
        if not lo <= u_lo < u_hi <= hi:
            raise ValueError(f"uniform family needs a_lo <= lo < hi <= a_hi, got [{u_lo}, {u_hi}]")
        smooth = u_lo == lo and u_hi == hi
        return (lambda a: np.clip((np.asarray(a) - u_lo) / (u_hi - u_lo), 0.0, 1.0)), smooth, np.array([u_lo, u_hi])

    if kind == "power":
        k = float(params.get("k", 1.0))
        if not k > 0:
            raise ValueError(f"power family needs k > 0, got {k}")
        return (lambda a: np.clip((np.asarray(a) - lo) / w, 0.0, 1.0) ** k), k >= 1.0, np.array([])

    if kind == "dual_power":
        # mirror image of the power family: concave for k > 1
        k = float(params.get("k", 1.0))
        if not k > 0:
            raise ValueError(f"dual_power family needs k > 0, got {k}")
        return (lambda a: 1.0 - (1.0 - np.clip((np.asarray(a) - lo) / w, 0.0, 1.0)) ** k), k >= 1.0, np.array([])

    if kind == "exponential":
        # truncated exponential; concave for rate > 0, convex for rate < 0
        beta = float(params.get("rate", 1.0))
        if beta == 0:
            return (lambda a: np.clip((np.asarray(a) - lo) / w, 0.0, 1.0)), True, np.array([])

        def f(a):
            t = np.clip((np.asarray(a) - lo) / w, 0.0, 1.0)
            return np.expm1(-beta * t) / np.expm1(-beta)

        return f, True, np.array([])

    if kind == "logistic":
        c = lo + float(params.get("center", 0.5)) * w
        s = float(params.get("scale", 0.1)) * w
        if not s > 0:
            raise ValueError("logistic family needs scale > 0")
        g_lo, g_hi = _sigmoid((lo - c) / s), _sigmoid((hi - c) / s)

        def f(a):
            return (_sigmoid((np.asarray(a) - c) / s) - g_lo) / (g_hi - g_lo)

        return f, True, np.array([])

    if kind == "reverse_logistic":
        # inverse of the normalised logistic: steep at both ends, flat in the middle
        c = float(params.get("center", 0.5))
        k = float(params.get("steepness", 10.0))
        if not k > 0:
            raise ValueError("reverse_logistic family needs steepness > 0")
        g_lo, g_hi = _sigmoid(-k * c), _sigmoid(k * (1.0 - c))

        def f(a):
            t = np.clip((np.asarray(a) - lo) / w, 0.0, 1.0)
            q = g_lo + t * (g_hi - g_lo)
            return np.clip(c + np.log(q / (1.0 - q)) / k, 0.0, 1.0)

        return f, True, np.array([])

    if kind == "table":
        pts = np.asarray(params.get("points"), dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
            raise ValueError("table family needs points as a list of (quality, value) pairs")
        tx, ty = pts[:, 0], pts[:, 1]
        if np.any(np.diff(tx) <= 0):
            raise ValueError("table qualities must be strictly increasing")
        if tx[0] != lo or tx[-1] != hi:
            raise ValueError("table must start at a_lo and end at a_hi")
        return (lambda a: np.interp(a, tx, ty)), False, tx

    if kind == "mixture":
        comps = params.get("components")
        if not comps:
            raise ValueError("mixture family needs a non-empty components list")
        parts = []
        for comp in comps:
            comp = dict(comp)
            weight = float(comp.pop("weight", 1.0))
            if weight < 0:
                raise ValueError("mixture weights must be nonnegative")
            sub_kind = comp.pop("family")
            parts.append((weight, *_family(sub_kind, comp, support)))
        total = sum(p[0] for p in parts)
        if not total > 0:
            raise ValueError("mixture weights sum to zero")

        def f(a):
            return sum(wt * g(a) for wt, g, _, _ in parts) / total

        smooth = all(sm for wt, _, sm, _ in parts if wt > 0)
        kinks = np.concatenate([kk for _, _, _, kk in parts] + [np.array([])])
        return f, smooth, kinks

    raise ValueError(f"unknown family {kind!r}")


def build_receiver(kind="uniform", params: Mapping | None = None,
                   support: QualitySupport | None = None, n: int = DEFAULT_N) -> ReceiverCdf:
    """Sample a receiver cdf family on ``n`` equispaced knots (plus family kinks).

    >>> build_receiver("power", {"k": 2})(0.5)
    0.25
    """
    support = support or QualitySupport()
    if n < 3:
        raise ValueError("grid size n must be at least 3")
    f, smooth, kinks = _family(kind, params, support)
    x = merge_grid(support.grid(n), kinks, lo=support.a_lo, hi=support.a_hi)
    p = np.asarray(f(x), dtype=float)
    return ReceiverCdf(support, x, p, smooth=smooth)


def build_sender(kind="uniform", params: Mapping | None = None,
                 support: QualitySupport | None = None, n: int = DEFAULT_N,
                 normalize: bool = True) -> SenderWeighting:
    """Sample a sender weighting family.

    ``params`` may carry ``value_at_lo`` to place S(a_lo) below the family's
    right limit, which creates the single permitted jump at a_lo.  With
    ``normalize`` the weighting is divided by its value at a_hi.
    """
    support = support or QualitySupport()
    if n < 3:
        raise ValueError("grid size n must be at least 3")
    params = dict(params or {})
    value_at_lo = params.pop("value_at_lo", None)
    if isinstance(kind, ReceiverCdf):
        return as_weighting(kind)
    f, smooth, kinks = _family(kind, params, support)
    x = merge_grid(support.grid(n), kinks, lo=support.a_lo, hi=support.a_hi)
    v = np.asarray(f(x), dtype=float)
    if not np.all(np.isfinite(v)):
        raise ValueError("sender family produced non-finite values")
    lo_val = float(v[0] if value_at_lo is None else value_at_lo)
    if value_at_lo is not None:
        smooth = False
    end = v[-1]
    if abs(end - 1.0) > _CLOSE:
        if not normalize:
            raise ValueError(f"sender weighting ends at {end}, not 1, and normalization is disabled")
        if end == 0:
            raise ValueError("cannot normalize a weighting that vanishes at a_hi")
        v, lo_val = v / end, lo_val / end
    return SenderWeighting(support, x, v, lo_val, smooth=smooth)


def as_weighting(R: ReceiverCdf) -> SenderWeighting:
    """The receiver cdf viewed as a sender weighting (equal priors)."""
    return SenderWeighting(R.support, R.x, R.p, 0.0, smooth=R.smooth)


# ---------------------------------------------------------------------------
# transforms


def transform_state_dependent(S: SenderWeighting, alpha: Callable) -> SenderWeighting:
    """Reweight dS by alpha (evaluated at cell midpoints) and renormalise."""
    x = S.x
    mid = 0.5 * (x[1:] + x[:-1])
    masses = np.asarray(alpha(mid), dtype=float) * np.diff(S.v)
    atom = float(np.asarray(alpha(S.support.a_lo), dtype=float)) * S.jump_at_lo
    if not (np.all(np.isfinite(masses)) and np.isfinite(atom)):
        raise ModelError("transform weight is not bounded on the support")
    total = float(masses.sum() + atom)
    end = S.value_at_lo + total
    if total <= 0 or end <= 0:
        raise ModelError(f"transformed weighting has nonpositive total mass ({total:.6g})")
    raw = S.value_at_lo + atom + np.concatenate([[0.0], np.cumsum(masses)])
    return SenderWeighting(S.support, x, raw / end, S.value_at_lo / end, smooth=S.smooth)


def transform_retail(R: ReceiverCdf, pi: Callable) -> SenderWeighting:
    """Intermediary fee schedule: dS = pi dR."""
    return transform_state_dependent(as_weighting(R), pi)


def transform_peer_effects(R: ReceiverCdf, lambda2: Callable) -> SenderWeighting:
    """Track design with peer effects: dS = lambda2 dR."""
    return transform_state_dependent(as_weighting(R), lambda2)


def transform_quadratic(R: ReceiverCdf, lambda1: Callable, lambda2: float) -> SenderWeighting:
    """Common-prior payoff lambda1(x) A + lambda2 A^2, folded into dS = (lambda1 + lambda2 x) dR."""
    return transform_state_dependent(as_weighting(R), lambda x: lambda1(x) + lambda2 * np.asarray(x))


def transform_group_mixture(groups: Sequence[tuple[float, object]],
                            n: int = DEFAULT_N) -> tuple[SenderWeighting, ReceiverCdf]:
    """Welfare weights over groups: S = sum w_G F_G, R = sum F_G, both normalised.

    Each ``F_G`` is a ReceiverCdf or a cdf-valued SenderWeighting on a common
    support.
    """
    if not groups:
        raise ValueError("need at least one group")
    support = groups[0][1].support
    for w, F in groups:
        if F.support != support:
            raise ValueError("group cdfs live on different supports")
        if w < 0:
            raise ValueError("group weights must be nonnegative")
    x = merge_grid(support.grid(n), *[F.x for _, F in groups], lo=support.a_lo, hi=support.a_hi)
    vals = [np.asarray(F(x) if isinstance(F, ReceiverCdf) else F.right_limit(x)) for _, F in groups]
    weights = np.array([w for w, _ in groups], dtype=float)
    if weights.sum() <= 0:
        raise ValueError("group weights sum to zero")
    s = sum(w * v for w, v in zip(weights, vals)) / weights.sum()
    r = sum(vals) / len(vals)
    smooth = all(F.smooth for _, F in groups)
    return SenderWeighting(support, x, s, 0.0, smooth=smooth), ReceiverCdf(support, x, r, smooth=smooth)
