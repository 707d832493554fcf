"""Scoring categorizations: posterior means, the weighting Psi, sender value, DP oracle."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .priors import ReceiverCdf, SenderWeighting, merge_grid
from .solver import Categorization

TOL_VAL = 1e-6
N_MAX_ORACLE = 800


def valuation_grid(A: Categorization, S: SenderWeighting | None, R: ReceiverCdf) -> np.ndarray:
    """Union of the prior knots and pool edges; every object is linear between its points."""
    parts = [R.x, A.edges]
    if S is not None:
        parts.append(S.x)
    return merge_grid(*parts, lo=R.support.a_lo, hi=R.support.a_hi)


@dataclass(frozen=True, eq=False)
class PosteriorFunction:
    categorization: Categorization
    pool_means: np.ndarray

    def __call__(self, a, side: str = "right"):
        a = np.asarray(a, dtype=float)
        k = self.categorization.pool_index(a, side=side)
        if not len(self.pool_means):
            return a.copy()
        return np.where(k >= 0, self.pool_means[np.clip(k, 0, None)], a)


def pool_means(A: Categorization, R: ReceiverCdf) -> np.ndarray:
    means = []
    for p, q in A.pools:
        y = merge_grid(R.x[(R.x > p) & (R.x < q)], lo=p, hi=q)
        dR = np.diff(R(y))
        mass = dR.sum()
        if not mass > 0:
            raise ValueError(f"pool [{p}, {q}) has zero receiver mass")
        means.append(np.dot(0.5 * (y[1:] + y[:-1]), dR) / mass)
    return np.array(means, dtype=float)


def posterior(A: Categorization, R: ReceiverCdf) -> PosteriorFunction:
    return PosteriorFunction(A, pool_means(A, R))


def posterior_mean(A: Categorization, R: ReceiverCdf, a):
    """Receiver's expected quality given the category of ``a``."""
    return posterior(A, R)(a)


@dataclass(frozen=True, eq=False)
class WeightingPsi:
    """Psi on a quality grid; ``values[0]`` is Psi(a_lo), ``right0`` its right limit."""

    x: np.ndarray
    values: np.ndarray
    right0: float

    def right_values(self) -> np.ndarray:
        out = self.values.copy()
        out[0] = self.right0
        return out

    def __call__(self, a):
        a = np.asarray(a, dtype=float)
        out = np.interp(a, self.x, self.right_values())
        return np.where(a <= self.x[0], self.values[0], out)


def weighting_psi(A: Categorization, S: SenderWeighting, R: ReceiverCdf,
                  x: np.ndarray | None = None) -> WeightingPsi:
    """S on separating regions, the R-affine interpolation of S across each pool."""
    x = valuation_grid(A, S, R) if x is None else merge_grid(x, A.edges, lo=R.support.a_lo, hi=R.support.a_hi)
    psi = S.right_limit(x).astype(float)
    Rx = R(x)
    for p, q in A.pools:
        sp = S(p)
        slope = (S(q) - sp) / (R(q) - R(p))
        inside = (x >= p) & (x <= q)
        psi[inside] = sp + (Rx[inside] - R(p)) * slope
    lo_in_pool = bool(A.pools) and A.pools[0][0] == R.support.a_lo
    right0 = float(psi[0]) if lo_in_pool else float(S.right_limit(x[0]))
    values = psi.copy()
    values[0] = S.value_at_lo
    return WeightingPsi(x, values, right0)


def sender_value(A: Categorization, S: SenderWeighting, R: ReceiverCdf, method: str = "direct") -> float:
    """Expected payment int A dS, by one of three equivalent routes.

    ``direct`` sums A at cell midpoints against the increments of S, plus the
    atom at a_lo; ``psi`` integrates x against Psi; ``ibp`` integrates by
    parts, (1 - S(a_lo)) a_lo + int (1 - Psi) dx.
    """
    x = valuation_grid(A, S, R)
    a_lo = R.support.a_lo
    if method == "direct":
        post = posterior(A, R)
        mid = 0.5 * (x[1:] + x[:-1])
        dS = np.diff(S.right_limit(x))
        return float(np.dot(post(mid), dS) + post(a_lo) * S.jump_at_lo)
    psi = weighting_psi(A, S, R, x)
    if method == "psi":
        mid = 0.5 * (x[1:] + x[:-1])
        right = psi.right_values()
        return float(np.dot(mid, np.diff(right)) + a_lo * (psi.right0 - psi.values[0]))
    if method == "ibp":
        right = psi.right_values()
        integral = np.sum(0.5 * ((1.0 - right[1:]) + (1.0 - right[:-1])) * np.diff(x))
        return float((1.0 - S.value_at_lo) * a_lo + integral)
    raise ValueError(f"unknown valuation method {method!r}")


def sender_values(A: Categorization, S: SenderWeighting, R: ReceiverCdf) -> dict[str, float]:
    return {m: sender_value(A, S, R, m) for m in ("direct", "psi", "ibp")}


def dp_oracle(S: SenderWeighting, R: ReceiverCdf, n: int = 400,
              n_max: int = N_MAX_ORACLE) -> tuple[float, Categorization]:
    """Brute-force optimum over all monotone partitions of an n-cell quality grid.

    Each cell is atomic: pooling cells i..j-1 earns their R-mean times their
    S-mass, separating a cell reveals its midpoint.  Value ties (within
    1e-12) go to the partition with fewer pools.
    """
    if n > n_max:
        raise ValueError(f"oracle grid n={n} exceeds n_max_oracle={n_max}")
    if n < 1:
        raise ValueError("oracle grid needs at least one cell")
    support = R.support
    x = np.linspace(support.a_lo, support.a_hi, n + 1)
    mid = 0.5 * (x[1:] + x[:-1])
    r = np.diff(R(x))
    s = np.diff(S.right_limit(x))
    s[0] += S.jump_at_lo
    cr = np.concatenate([[0.0], np.cumsum(r)])
    cy = np.concatenate([[0.0], np.cumsum(mid * r)])
    cs = np.concatenate([[0.0], np.cumsum(s)])
    val = np.zeros(n + 1)
    npools = np.zeros(n + 1, dtype=int)
    back = np.zeros(n + 1, dtype=int)
    for j in range(1, n + 1):
        i = np.arange(j)
        seg = (cy[j] - cy[i]) / (cr[j] - cr[i]) * (cs[j] - cs[i])
        cand = val[:j] + seg
        count = npools[:j] + (j - i >= 2)
        count = np.where(cand >= cand.max() - 1e-12, count, n + 1)
        back[j] = int(np.argmin(count))
        val[j] = cand[back[j]]
        npools[j] = count[back[j]]
    pools, j = [], n
    while j > 0:
        i = back[j]
        if j - i >= 2:
            pools.append((x[i], x[j]))
        j = i
    return float(val[n]), Categorization(support, tuple(reversed(pools)))


def random_categorization(R: ReceiverCdf, seed=None, max_pools: int = 5,
                          grid: np.ndarray | None = None) -> Categorization:
    """Random monotone categorization with pool edges on ``grid`` (default: receiver knots)."""
    if max_pools < 0:
        raise ValueError("max_pools must be nonnegative")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    grid = R.x if grid is None else np.asarray(grid, dtype=float)
    k = int(rng.integers(0, max_pools + 1))
    k = min(k, (len(grid) - 1) // 2)
    if k == 0:
        return Categorization(R.support, ())
    idx = np.sort(rng.choice(len(grid), size=2 * k, replace=False))
    edges = list(grid[idx])
    # occasionally glue a pool onto its successor to exercise adjacent pools
    for i in range(1, k):
        if rng.random() < 0.25:
            edges[2 * i] = edges[2 * i - 1]
    pools = tuple((edges[2 * i], edges[2 * i + 1]) for i in range(k))
    return Categorization(R.support, pools)
