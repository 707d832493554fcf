"""Grade design with moral hazard: induced sender weighting, learning schedules, IC checks.

A school sells tuition to its most pessimistic student type F0, the market
pays E[a | grade] + lam * learning, and effort costs c(a) per unit of
learning.  Folding the incentive constraints into the objective turns the
school's problem into a categorization problem with receiver prior R and an
induced sender weighting S that need not be a cdf.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ModelError
from .priors import (DEFAULT_N, QualitySupport, ReceiverCdf, SenderWeighting, build_receiver, merge_grid)
from .solver import DEFAULT_M, TOL_ENV, Categorization, solve
from .valuation import posterior, sender_value

TOL_IC = 1e-6
DELTA = 1e-3


def _cdf_values(F, x):
    return F(x) if isinstance(F, ReceiverCdf) else F.right_limit(x)


@dataclass(frozen=True, eq=False)
class SchoolingConfig:
    """Primitives of the grading problem.

    ``F0`` is the lowest belief type (a ReceiverCdf or a cdf-valued
    SenderWeighting), ``R`` the population prior shared by the market.
    ``sender_override`` replaces the quadrature for S by a closed form.
    """

    R: ReceiverCdf
    F0: object
    cost: Callable
    lam: float = 0.0
    sigma: float = 0.0
    n: int = DEFAULT_N
    sender_override: Callable | None = None

    def __post_init__(self):
        if self.F0.support != self.R.support:
            raise ValueError("F0 and R live on different supports")
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")
        if not 0.0 <= self.sigma <= 1.0:
            raise ValueError("sigma must lie in [0, 1]")
        x = self.grid
        f0 = _cdf_values(self.F0, x)
        if abs(f0[0]) > 1e-12 or np.any(np.diff(f0) < -1e-12):
            raise ValueError("F0 must be a cdf with F0(a_lo) = 0")
        if isinstance(self.F0, SenderWeighting) and (self.F0.jump_at_lo > 1e-12 or abs(self.F0.value_at_lo) > 1e-12):
            raise ValueError("F0 must be continuous with F0(a_lo) = 0")
        c = np.asarray(self.cost(x), dtype=float)
        if not np.all(np.isfinite(c)) or np.any(c <= 0):
            raise ValueError("effort cost must be positive and finite on the support")
        if np.any(np.diff(c) > 0):
            raise ValueError("effort cost must be decreasing in ability")
        if not c[-1] > self.lam:
            raise ModelError(f"cost bound fails (need c > lambda): c(a_hi) = {c[-1]:.6g} <= lambda = {self.lam:.6g}")

    @property
    def support(self) -> QualitySupport:
        return self.R.support

    @property
    def grid(self) -> np.ndarray:
        s = self.R.support
        return merge_grid(s.grid(self.n), lo=s.a_lo, hi=s.a_hi)

    def expected_cost(self) -> float:
        x = self.grid
        mid = 0.5 * (x[1:] + x[:-1])
        return float(np.dot(self.cost(mid), np.diff(_cdf_values(self.F0, x))))

    @property
    def intrinsic(self) -> bool:
        """Learning valued on average by F0-parents; exact ties go to the zero-learning branch."""
        return self.lam > self.sigma * self.expected_cost()

    def replace(self, **changes) -> "SchoolingConfig":
        return dataclasses.replace(self, **changes)


def _suffix_integral(config: SchoolingConfig, x: np.ndarray) -> np.ndarray:
    # int_{x_j}^{a_hi} (sigma c - lam) dF0, midpoint rule per cell
    mid = 0.5 * (x[1:] + x[:-1])
    cell = (config.sigma * np.asarray(config.cost(mid)) - config.lam) * np.diff(_cdf_values(config.F0, x))
    return np.concatenate([np.cumsum(cell[::-1])[::-1], [0.0]])


def induce_sender(config: SchoolingConfig) -> tuple[SenderWeighting, float]:
    """The school's induced weighting S and the payoff constant K.

    Above a_lo, S(a) = F0(a) + int_a^{a_hi} (sigma c - lam) dF0 / (c(a) - lam).
    At a_lo, S is the (negative) continuous limit when learning is
    intrinsically valued, and 0 otherwise, leaving an upward jump.
    """
    x = config.grid
    c = np.asarray(config.cost(x), dtype=float)
    if config.sender_override is not None:
        s = np.asarray(config.sender_override(x), dtype=float)
    else:
        s = _cdf_values(config.F0, x) + _suffix_integral(config, x) / (c - config.lam)
    s[-1] = 1.0
    a_lo = config.support.a_lo
    if config.intrinsic:
        lo_val = min(0.0, float(s[0]))
        K = a_lo * lo_val
    else:
        lo_val, K = 0.0, 0.0
    return SenderWeighting(config.support, x, s, lo_val), float(K)


def initial_learning(A: Categorization, config: SchoolingConfig) -> float:
    if not config.intrinsic:
        return 0.0
    a_lo = config.support.a_lo
    A_lo = float(posterior(A, config.R)(a_lo))
    return (A_lo - a_lo) / (float(config.cost(a_lo)) - config.lam)


@dataclass(frozen=True, eq=False)
class LearningFunction:
    """Learning level on a quality grid: ``values`` right-continuous, ``left`` the left limits."""

    x: np.ndarray
    values: np.ndarray
    left: np.ndarray
    pooled: np.ndarray
    jumps: tuple[tuple[float, float], ...]

    @property
    def initial(self) -> float:
        return float(self.values[0])

    def at_midpoints(self) -> np.ndarray:
        return np.where(self.pooled, self.values[:-1], 0.5 * (self.values[:-1] + self.left[1:]))

    def perturbed(self, index: int, amount: float) -> "LearningFunction":
        values = self.values.copy()
        values[index] += amount
        return dataclasses.replace(self, values=values)


def build_learning(A: Categorization, config: SchoolingConfig, grid: np.ndarray | None = None) -> LearningFunction:
    """Incentive-compatible learning schedule implementing ``A``.

    Slope 1/(c - lam) on separating stretches (trapezoid rule), flat on
    pools, and a jump (A - A_left)/(c - lam) wherever A is discontinuous.
    """
    s = config.support
    x = merge_grid(config.grid if grid is None else grid, A.edges, lo=s.a_lo, hi=s.a_hi)
    inv = config.cost(x)
    inv = np.asarray(inv, dtype=float) - config.lam
    if np.any(inv <= 0):
        raise ModelError("cost bound fails (need c > lambda): c(a) - lambda <= 0 on the support")
    inv = 1.0 / inv
    post = posterior(A, config.R)
    mid = 0.5 * (x[1:] + x[:-1])
    pooled = A.pool_index(mid) >= 0
    slope_part = np.where(pooled, 0.0, 0.5 * (inv[1:] + inv[:-1]) * np.diff(x))
    jump = (post(x[1:]) - post(x[1:], side="left")) * inv[1:]
    start = initial_learning(A, config)
    values = start + np.concatenate([[0.0], np.cumsum(slope_part + jump)])
    left = values - np.concatenate([[0.0], jump])
    jumps = tuple((float(t), float(j)) for t, j in zip(x[1:], jump) if j != 0.0)
    return LearningFunction(x, values, left, pooled, jumps)


def school_payoff(A: Categorization, ell: LearningFunction, config: SchoolingConfig) -> float:
    """The tuition objective: int [A + (lam - sigma c) ell] dF0."""
    x = ell.x
    mid = 0.5 * (x[1:] + x[:-1])
    dF0 = np.diff(_cdf_values(config.F0, x))
    integrand = posterior(A, config.R)(mid) + (config.lam - config.sigma * config.cost(mid)) * ell.at_midpoints()
    return float(np.dot(integrand, dF0))


def verify_ic(ell: LearningFunction, A: Categorization, config: SchoolingConfig,
              samples: int = 10_000, seed=0) -> float:
    """Largest gain from mimicking another type or taking the zero-learning outside option.

    The outside option is checked for every grid type; mimicry for every pair
    of grid neighbours and ``samples`` random (type, target) pairs.
    Nonpositive means incentive compatible.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    x = ell.x
    Av = posterior(A, config.R)(x)
    c = np.asarray(config.cost(x), dtype=float)
    truthful = Av + (config.lam - c) * ell.values
    worst = float(np.max(config.support.a_lo - truthful))
    # every grid neighbour, plus random pairs
    idx = np.arange(len(x))
    i = np.concatenate([idx[1:], idx[:-1], rng.integers(0, len(x), size=samples)])
    j = np.concatenate([idx[:-1], idx[1:], rng.integers(0, len(x), size=samples)])
    mimic = Av[j] + (config.lam - c[i]) * ell.values[j]
    return max(worst, float(np.max(mimic - truthful[i])))


@dataclass(frozen=True, eq=False)
class SchoolSolution:
    config: SchoolingConfig
    S: SenderWeighting
    K: float
    categorization: Categorization
    learning: LearningFunction
    payoff: float

    @property
    def a_tilde(self) -> float:
        return censorship_threshold(self.categorization)


def solve_school(config: SchoolingConfig, m: int = DEFAULT_M, tol: float = TOL_ENV) -> SchoolSolution:
    S, K = induce_sender(config)
    A = solve(S, config.R, m, tol).categorization
    ell = build_learning(A, config)
    return SchoolSolution(config, S, K, A, ell, school_payoff(A, ell, config))


def payoff_identity_residual(A: Categorization, config: SchoolingConfig) -> float:
    """|int [A + (lam - sigma c) ell] dF0 - (int A dS + K)| for the schedule implementing A."""
    S, K = induce_sender(config)
    ell = build_learning(A, config)
    return abs(school_payoff(A, ell, config) - (sender_value(A, S, config.R) + K))


# ---------------------------------------------------------------------------
# sufficient condition for full pooling


def school_pooling_margin(config: SchoolingConfig) -> float:
    return float(min(_suffix_integral(config, config.grid).min(), 0.0))


def check_school_full_pooling(config: SchoolingConfig, tol: float = TOL_ENV) -> bool:
    """int_a^{a_hi} (sigma c - lam) dF0 >= 0 for every a (sufficient for full pooling)."""
    return school_pooling_margin(config) >= -tol


def pooling_over_lambda(config: SchoolingConfig, lambdas: Sequence[float]) -> list[bool]:
    return [check_school_full_pooling(config.replace(lam=v)) for v in lambdas]


def pooling_over_sigma(config: SchoolingConfig, sigmas: Sequence[float]) -> list[bool]:
    return [check_school_full_pooling(config.replace(sigma=v)) for v in sigmas]


def pooling_over_beliefs(config: SchoolingConfig, beliefs: Sequence[object]) -> list[bool]:
    return [check_school_full_pooling(config.replace(F0=F)) for F in beliefs]


# ---------------------------------------------------------------------------
# lower censorship family: R uniform on [0, 1], F0 = a^gamma, c = 1/a, sigma = 0


def inverse_cost(delta: float = DELTA) -> Callable:
    """c(a) = 1/a, truncated below at delta so it stays finite at a = 0."""
    return lambda a: 1.0 / np.maximum(np.asarray(a, dtype=float), delta)


def censorship_config(gamma: float, lam: float, n: int = DEFAULT_N, delta: float = DELTA) -> SchoolingConfig:
    """Closed-form instance whose induced weighting is (a^gamma - lam a) / (1 - lam a)."""
    if not 0 < gamma <= 1:
        raise ValueError("gamma must lie in (0, 1]")
    if not 0 <= lam < 1:
        raise ValueError("lambda must lie in [0, 1)")
    R = build_receiver("uniform", n=n)
    F0 = build_receiver("power", {"k": gamma}, n=n)

    def closed_form(a):
        a = np.asarray(a, dtype=float)
        return (a ** gamma - lam * a) / (1.0 - lam * a)

    return SchoolingConfig(R, F0, inverse_cost(delta), lam=lam, sigma=0.0, n=n, sender_override=closed_form)


def censorship_threshold(A: Categorization) -> float:
    """Left edge of the first separating stretch; a_hi under full pooling."""
    edge = A.support.a_lo
    for p, q in A.pools:
        if p > edge:
            break
        edge = q
    return float(edge)


SWEEP_COLUMNS = ("gamma", "lambda", "a_tilde", "full_pooling", "payoff")


def censorship_threshold_sweep(gammas: Sequence[float], lambdas: Sequence[float],
                               n: int = DEFAULT_N, m: int = DEFAULT_M) -> list[dict]:
    rows = []
    for g in gammas:
        for lam in lambdas:
            sol = solve_school(censorship_config(g, lam, n), m)
            rows.append({
                "gamma": float(g),
                "lambda": float(lam),
                "a_tilde": sol.a_tilde,
                "full_pooling": sol.categorization.is_full_pooling(),
                "payoff": sol.payoff,
            })
    return rows
