"""Command-line driver: JSON config in, report.json / curve.csv / sweep.csv / envelope.svg out.

Exit codes: 0 success, 1 invalid configuration (the message names the key),
2 numeric failure (effort-cost bound c > lambda breached, degenerate transform, failed check).
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from . import priors, schooling, solver, valuation
from .analysis import diagnose, flip_report
from .errors import ModelError

MODES = ("solve", "diagnose", "flip", "school", "sweep", "verify")
CURVE_COLUMNS = ("z", "a", "H", "envelope", "pooled", "A", "Psi")


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"config key {key!r}: {message}")
        self.key = key


class CheckFailed(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# config parsing


def load_config(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("--config", f"cannot read {path}: {exc.strerror}") from exc
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("--config", f"not valid JSON ({exc.msg} at line {exc.lineno})") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("--config", "top level must be an object")
    return cfg


def _get(cfg: Mapping, key: str, path: str, kind=None, default=Ellipsis):
    full = f"{path}.{key}" if path else key
    if key not in cfg:
        if default is Ellipsis:
            raise ConfigError(full, "missing")
        return default
    value = cfg[key]
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(full, f"expected a number, got {value!r}")
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(full, f"expected an integer, got {value!r}")
        return value
    if kind is not None and not isinstance(value, kind):
        raise ConfigError(full, f"expected {getattr(kind, '__name__', kind)}, got {type(value).__name__}")
    return value


def _support(cfg) -> priors.QualitySupport:
    pair = _get(cfg, "support", "", list, [0.0, 1.0])
    if len(pair) != 2:
        raise ConfigError("support", "expected [a_lo, a_hi]")
    try:
        return priors.QualitySupport(float(pair[0]), float(pair[1]))
    except (TypeError, ValueError) as exc:
        raise ConfigError("support", str(exc)) from exc


def _polynomial(spec, key: str):
    """Either a number or a list of polynomial coefficients c0 + c1 x + ..."""
    if isinstance(spec, (int, float)) and not isinstance(spec, bool):
        return lambda x, c=float(spec): np.full(np.shape(x), c)
    if isinstance(spec, list) and spec and all(isinstance(c, (int, float)) for c in spec):
        coeffs = [float(c) for c in spec]
        return lambda x: np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), coeffs)
    raise ConfigError(key, "expected a number or a list of polynomial coefficients")


def _family_args(spec, key: str):
    if not isinstance(spec, dict):
        raise ConfigError(key, "expected an object with 'family' and optional 'params'")
    family = _get(spec, "family", key, str)
    params = _get(spec, "params", key, dict, {})
    return family, params


def build_receiver(cfg, support, n) -> priors.ReceiverCdf:
    family, params = _family_args(_get(cfg, "receiver", ""), "receiver")
    try:
        return priors.build_receiver(family, params, support, n)
    except (TypeError, ValueError) as exc:
        raise ConfigError("receiver", str(exc)) from exc


def build_sender(spec, R: priors.ReceiverCdf, n: int) -> priors.SenderWeighting:
    if not isinstance(spec, dict):
        raise ConfigError("sender", "expected an object")
    try:
        if spec.get("same_as_receiver"):
            return priors.as_weighting(R)
        transform = spec.get("transform")
        if transform is None:
            family, params = _family_args(spec, "sender")
            return priors.build_sender(family, params, R.support, n)
        if transform in ("retail", "peer_effects", "state_dependent"):
            alpha = _polynomial(_get(spec, "weight", "sender"), "sender.weight")
            return priors.transform_state_dependent(priors.as_weighting(R), alpha)
        if transform == "quadratic":
            lam1 = _polynomial(_get(spec, "lambda1", "sender"), "sender.lambda1")
            lam2 = _get(spec, "lambda2", "sender", float)
            return priors.transform_quadratic(R, lam1, lam2)
    except ModelError:
        raise
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError("sender", str(exc)) from exc
    raise ConfigError("sender.transform", f"unknown transform {transform!r}")


def build_instance(cfg, n: int | None = None) -> tuple[priors.SenderWeighting, priors.ReceiverCdf]:
    """(S, R) from a config; ``groups`` builds both from welfare-weighted group cdfs."""
    support = _support(cfg)
    n = _get(cfg, "prior_n", "", int, priors.DEFAULT_N) if n is None else n
    if "groups" in cfg:
        groups = []
        for k, g in enumerate(_get(cfg, "groups", "", list)):
            key = f"groups[{k}]"
            family, params = _family_args(g, key)
            w = _get(g, "weight", key, float, 1.0)
            try:
                groups.append((w, priors.build_receiver(family, params, support, n)))
            except (TypeError, ValueError) as exc:
                raise ConfigError(key, str(exc)) from exc
        try:
            return priors.transform_group_mixture(groups, n)
        except ValueError as exc:
            raise ConfigError("groups", str(exc)) from exc
    R = build_receiver(cfg, support, n)
    return build_sender(_get(cfg, "sender", "", dict), R, n), R


def build_cost(spec, key="school.cost"):
    kind = _get(spec, "kind", key, str)
    if kind == "inverse":
        return schooling.inverse_cost(_get(spec, "delta", key, float, schooling.DELTA))
    if kind == "linear":
        c0, slope = _get(spec, "c0", key, float), _get(spec, "slope", key, float)
        return lambda a: c0 + slope * np.asarray(a, dtype=float)
    if kind == "polynomial":
        return _polynomial(_get(spec, "coefficients", key), f"{key}.coefficients")
    raise ConfigError(f"{key}.kind", f"unknown cost kind {kind!r}")


def build_school(cfg) -> tuple[schooling.SchoolingConfig, dict | None]:
    """Schooling primitives; ``school.censorship`` selects the closed-form family."""
    spec = _get(cfg, "school", "", dict)
    n = _get(cfg, "prior_n", "", int, priors.DEFAULT_N)
    if "censorship" in spec:
        c = _get(spec, "censorship", "school", dict)
        gamma = _get(c, "gamma", "school.censorship", float)
        lam = _get(c, "lambda", "school.censorship", float)
        delta = _get(c, "delta", "school.censorship", float, schooling.DELTA)
        try:
            return schooling.censorship_config(gamma, lam, n, delta), {"gamma": gamma, "lambda": lam}
        except ValueError as exc:
            raise ConfigError("school.censorship", str(exc)) from exc
    support = _support(cfg)
    R = build_receiver(cfg, support, n)
    family, params = _family_args(_get(spec, "F0", "school"), "school.F0")
    try:
        F0 = priors.build_receiver(family, params, support, n)
    except (TypeError, ValueError) as exc:
        raise ConfigError("school.F0", str(exc)) from exc
    cost = build_cost(_get(spec, "cost", "school", dict))
    lam = _get(spec, "lambda", "school", float, 0.0)
    sigma = _get(spec, "sigma", "school", float, 0.0)
    try:
        return schooling.SchoolingConfig(R, F0, cost, lam, sigma, n), None
    except ModelError:
        raise
    except ValueError as exc:
        raise ConfigError("school", str(exc)) from exc


# ---------------------------------------------------------------------------
# outputs


def _pools(A) -> list[list[float]]:
    return [[p, q] for p, q in A.pools]


def curve_rows(sol: solver.Solution) -> list[tuple]:
    curve, A = sol.curve, sol.categorization
    post = valuation.posterior(A, sol.R)(curve.a)
    psi = valuation.weighting_psi(A, sol.S, sol.R)(curve.a)
    psi[0] = sol.S.value_at_lo
    return [(z, a, h, e, int(p), m, s) for z, a, h, e, p, m, s in
            zip(curve.z, curve.a, curve.h, curve.env, curve.pooled, post, psi)]


def write_curve(path: Path, sol: solver.Solution) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CURVE_COLUMNS)
        for row in curve_rows(sol):
            w.writerow([repr(float(v)) if i != 4 else v for i, v in enumerate(row)])


def write_sweep(path: Path, rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(schooling.SWEEP_COLUMNS)
        for r in rows:
            w.writerow([repr(r["gamma"]), repr(r["lambda"]), repr(r["a_tilde"]),
                        int(r["full_pooling"]), repr(r["payoff"])])


def write_svg(path: Path, sol: solver.Solution) -> bool:
    """Figure of H, its envelope and the pooled spans; False if matplotlib is unavailable."""
    try:
        import matplotlib
        matplotlib.use("svg")
        import matplotlib.pyplot as plt
    except ImportError:
        return False
    plt.rcParams["svg.hashsalt"] = "monocat"
    curve = sol.curve
    fig, ax = plt.subplots(figsize=(5, 4))
    for s, e in curve.percentile_pools:
        ax.axvspan(curve.z[s], curve.z[e], color="0.9", lw=0)
    ax.plot(curve.z, curve.h, color="tab:blue", lw=1.5, label="H")
    ax.plot(curve.z, curve.env, color="tab:red", lw=1.0, ls="--", label="envelope")
    ax.set_xlabel("receiver percentile z")
    ax.set_ylabel("sender mass")
    ax.legend(loc="upper left", frameon=False)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return True


def _plain(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _dump(path: Path, report: dict) -> None:
    path.write_text(json.dumps(report, indent=2, sort_keys=True, default=_plain) + "\n")


# ---------------------------------------------------------------------------
# modes


def _grid_settings(cfg):
    m = _get(cfg, "grid_n", "", int, solver.DEFAULT_M)
    tol = _get(cfg, "tol_env", "", float, solver.TOL_ENV)
    if m < 3:
        raise ConfigError("grid_n", "must be at least 3")
    return m, tol


def _oracle_settings(cfg):
    n = _get(cfg, "oracle_n", "", int, None)
    n_max = _get(cfg, "n_max_oracle", "", int, valuation.N_MAX_ORACLE)
    if n is not None and n > n_max:
        raise ConfigError("oracle_n", f"oracle_n={n} exceeds n_max_oracle={n_max}")
    if n is not None and n < 1:
        raise ConfigError("oracle_n", "must be positive")
    return n, n_max


def _intervals(cfg):
    out = []
    for k, iv in enumerate(_get(cfg, "intervals", "", list, [])):
        if not (isinstance(iv, list) and len(iv) == 2 and iv[1] > iv[0]):
            raise ConfigError(f"intervals[{k}]", "expected [a, b] with a < b")
        out.append((float(iv[0]), float(iv[1])))
    return out


def solve_report(cfg, mode: str, out: Path, seed: int) -> dict:
    S, R = build_instance(cfg)
    m, tol = _grid_settings(cfg)
    oracle_n, n_max = _oracle_settings(cfg)
    intervals = _intervals(cfg)
    sol = solver.solve(S, R, m, tol)
    A = sol.categorization
    values = valuation.sender_values(A, S, R)
    diag = diagnose(S, R, m, intervals, A, tol)
    report: dict[str, Any] = {
        "mode": mode,
        "seed": seed,
        "support": [R.support.a_lo, R.support.a_hi],
        "pools": _pools(A),
        "separating": [list(iv) for iv in A.separating_intervals()],
        "value": values["direct"],
        "values": values,
        "benchmarks": {
            "full_pooling": valuation.sender_value(solver.Categorization.full_pooling(R.support), S, R),
            "full_separation": valuation.sender_value(solver.Categorization.full_separation(R.support), S, R),
        },
        "diagnostics": diag.to_dict(),
        "flags": diag.flags,
    }
    if oracle_n is not None:
        v, A_dp = valuation.dp_oracle(S, R, oracle_n, n_max)
        report["oracle"] = {"n": oracle_n, "value": v, "pools": _pools(A_dp)}
    if mode == "flip":
        fr = flip_report(S, R, m, tol)
        report["flip"] = {"coverage": fr.coverage, "overlap": fr.overlap, "degenerate": fr.degenerate,
                          "original_pools": _pools(fr.original), "flipped_pools": _pools(fr.flipped)}
    write_curve(out / "curve.csv", sol)
    if _get(cfg, "svg", "", bool, False):
        report["svg"] = write_svg(out / "envelope.svg", sol)
    return report


def school_report(cfg, out: Path, seed: int) -> dict:
    config, censor = build_school(cfg)
    m, tol = _grid_settings(cfg)
    tol_ic = _get(cfg, "tol_ic", "", float, schooling.TOL_IC)
    sol = schooling.solve_school(config, m, tol)
    A = sol.categorization
    ic = schooling.verify_ic(sol.learning, A, config, seed=seed)
    report = {
        "mode": "school",
        "seed": seed,
        "pools": _pools(A),
        "a_tilde": sol.a_tilde,
        "full_pooling": A.is_full_pooling(),
        "value": sol.payoff,
        "payoff": sol.payoff,
        "K": sol.K,
        "intrinsic_learning": config.intrinsic,
        "values": valuation.sender_values(A, sol.S, config.R),
        "learning": {"initial": sol.learning.initial, "final": float(sol.learning.values[-1]),
                     "jumps": [list(j) for j in sol.learning.jumps]},
        "ic_violation": ic,
        "ic_ok": ic <= tol_ic,
        "sufficient_full_pooling": schooling.check_school_full_pooling(config, tol),
        "induced_sender_is_cdf": sol.S.is_cdf(),
    }
    if censor is not None:
        report["row"] = {**censor, "a_tilde": sol.a_tilde, "full_pooling": A.is_full_pooling(),
                         "payoff": sol.payoff}
    induced = solver.solve(sol.S, config.R, m, tol)
    write_curve(out / "curve.csv", induced)
    if _get(cfg, "svg", "", bool, False):
        report["svg"] = write_svg(out / "envelope.svg", induced)
    return report


def _number_list(spec, key):
    values = _get(spec, key, "sweep", list)
    if not values or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in values):
        raise ConfigError(f"sweep.{key}", "expected a non-empty list of numbers")
    return [float(v) for v in values]


def sweep_report(cfg, out: Path, seed: int) -> dict:
    spec = _get(cfg, "sweep", "", dict)
    gammas, lambdas = _number_list(spec, "gammas"), _number_list(spec, "lambdas")
    n = _get(cfg, "prior_n", "", int, priors.DEFAULT_N)
    m, _ = _grid_settings(cfg)
    for g in gammas:
        if not 0 < g <= 1:
            raise ConfigError("sweep.gammas", f"gamma={g} outside (0, 1]")
    for lam in lambdas:
        if not 0 <= lam < 1:
            raise ConfigError("sweep.lambdas", f"lambda={lam} outside [0, 1)")
    rows = schooling.censorship_threshold_sweep(gammas, lambdas, n, m)
    write_sweep(out / "sweep.csv", rows)
    return {"mode": "sweep", "seed": seed, "rows": rows, "value": None}


# ---------------------------------------------------------------------------
# verification suite

DEFAULT_SUITE = {
    "instances": [
        {"name": "intro_eps_0.05", "receiver": {"family": "uniform"},
         "sender": {"family": "uniform", "params": {"lo": 0.7, "hi": 0.8}}, "golden": 0.85, "golden_tol": 2e-3},
        {"name": "intro_eps_0.10", "receiver": {"family": "uniform"},
         "sender": {"family": "uniform", "params": {"lo": 0.65, "hi": 0.85}}, "golden": 0.825, "golden_tol": 2e-3},
        {"name": "convex_receiver", "receiver": {"family": "power", "params": {"k": 2}},
         "sender": {"family": "uniform"}, "golden": 2.0 / 3.0, "golden_tol": 1e-3},
        {"name": "logistic_vs_concave", "receiver": {"family": "dual_power", "params": {"k": 3}},
         "sender": {"family": "logistic", "params": {"scale": 0.08}}},
        {"name": "logistic_vs_convex", "receiver": {"family": "power", "params": {"k": 2}},
         "sender": {"family": "logistic", "params": {"scale": 0.08}}},
    ],
    "schools": [
        {"name": "censorship_0.5_0.7", "school": {"censorship": {"gamma": 0.5, "lambda": 0.7}}},
        {"name": "linear_cost", "receiver": {"family": "uniform"},
         "school": {"F0": {"family": "power", "params": {"k": 0.5}}, "cost": {"kind": "linear", "c0": 2, "slope": -1},
                    "lambda": 0.6, "sigma": 0.2}},
    ],
    "random_categorizations": 100,
}


def _check_row(name, ok, detail):
    return {"check": name, "ok": bool(ok), "detail": detail}


def run_suite(cfg, seed: int) -> list[dict]:
    """Oracle agreement, Psi-dominance, route agreement, goldens and IC on the configured instances."""
    suite = _get(cfg, "suite", "", dict, DEFAULT_SUITE)
    m, tol = _grid_settings(cfg)
    oracle_n, n_max = _oracle_settings(cfg)
    oracle_n = oracle_n or 400
    tol_val = _get(cfg, "tol_val", "", float, valuation.TOL_VAL)
    tol_ic = _get(cfg, "tol_ic", "", float, schooling.TOL_IC)
    n_random = _get(suite, "random_categorizations", "suite", int, 100)
    rng = np.random.default_rng(seed)
    rows = []
    for k, inst in enumerate(_get(suite, "instances", "suite", list, [])):
        name = _get(inst, "name", f"suite.instances[{k}]", str, f"instance_{k}")
        S, R = build_instance(inst)
        sol = solver.solve(S, R, m, tol)
        v = valuation.sender_values(sol.categorization, S, R)
        spread = max(v.values()) - min(v.values())
        rows.append(_check_row(f"{name}: value routes agree", spread <= tol_val, f"spread={spread:.3g}"))
        dp_v, _ = valuation.dp_oracle(S, R, oracle_n, n_max)
        bound = 5 * R.support.width / oracle_n
        rows.append(_check_row(f"{name}: oracle agreement", abs(dp_v - v["direct"]) <= bound,
                               f"solver={v['direct']:.6f} oracle={dp_v:.6f} bound={bound:.3g}"))
        psi_star = valuation.weighting_psi(sol.categorization, S, R)
        worst_val, worst_psi = -np.inf, -np.inf
        for _ in range(n_random):
            A = valuation.random_categorization(R, rng)
            worst_val = max(worst_val, valuation.sender_value(A, S, R) - v["direct"])
            psi = valuation.weighting_psi(A, S, R, psi_star.x)
            worst_psi = max(worst_psi, float(np.max(psi_star(psi.x) - psi(psi.x))))
        rows.append(_check_row(f"{name}: beats random categorizations", worst_val <= tol_val,
                               f"max excess={worst_val:.3g}"))
        rows.append(_check_row(f"{name}: Psi-dominance", worst_psi <= tol, f"max excess={worst_psi:.3g}"))
        if "golden" in inst:
            g = _get(inst, "golden", name, float)
            gt = _get(inst, "golden_tol", name, float, 1e-6)
            rows.append(_check_row(f"{name}: golden value", abs(v["direct"] - g) <= gt,
                                   f"value={v['direct']:.6f} golden={g} tol={gt}"))
    for k, inst in enumerate(_get(suite, "schools", "suite", list, [])):
        name = _get(inst, "name", f"suite.schools[{k}]", str, f"school_{k}")
        config, _ = build_school(inst)
        sol = schooling.solve_school(config, m, tol)
        ic = schooling.verify_ic(sol.learning, sol.categorization, config, seed=rng)
        rows.append(_check_row(f"{name}: incentive compatibility", ic <= tol_ic, f"worst gain={ic:.3g}"))
        if "golden" in inst:
            g = _get(inst, "golden", name, float)
            gt = _get(inst, "golden_tol", name, float, 1e-6)
            rows.append(_check_row(f"{name}: golden payoff", abs(sol.payoff - g) <= gt,
                                   f"payoff={sol.payoff:.6f} golden={g} tol={gt}"))
    return rows


def verify_report(cfg, out: Path, seed: int) -> dict:
    rows = run_suite(cfg, seed)
    width = max(len(r["check"]) for r in rows) if rows else 10
    for r in rows:
        print(f"{'PASS' if r['ok'] else 'FAIL'}  {r['check']:<{width}}  {r['detail']}")
    report = {"mode": "verify", "seed": seed, "rows": rows, "value": None,
              "passed": all(r["ok"] for r in rows)}
    if not report["passed"]:
        failing = ", ".join(r["check"] for r in rows if not r["ok"])
        _dump(out / "report.json", report)
        raise CheckFailed(f"verification failed: {failing}")
    return report


# ---------------------------------------------------------------------------
# entry points


def run(config_path, mode: str | None = None, out=".", seed: int | None = None) -> int:
    try:
        cfg = load_config(config_path)
        mode = mode or _get(cfg, "mode", "", str, "solve")
        if mode not in MODES:
            raise ConfigError("mode", f"expected one of {', '.join(MODES)}, got {mode!r}")
        seed = _get(cfg, "seed", "", int, 0) if seed is None else seed
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        if mode in ("solve", "diagnose", "flip"):
            report = solve_report(cfg, mode, out, seed)
        elif mode == "school":
            report = school_report(cfg, out, seed)
        elif mode == "sweep":
            report = sweep_report(cfg, out, seed)
        else:
            report = verify_report(cfg, out, seed)
        _dump(out / "report.json", report)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ModelError, CheckFailed) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def run_sweep(config_path, out=".", seed: int | None = None) -> int:
    return run(config_path, "sweep", out, seed)


def run_verify(config_path, out=".", seed: int | None = None) -> int:
    return run(config_path, "verify", out, seed)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="monocat", description=__doc__.splitlines()[0])
    parser.add_argument("--config", required=True, help="path to a JSON run configuration")
    parser.add_argument("--mode", choices=MODES, help="override the mode given in the config")
    parser.add_argument("--out", default=".", help="output directory (created if missing)")
    parser.add_argument("--seed", type=int, help="override the config seed")
    args = parser.parse_args(argv)
    if args.seed is not None and args.seed < 0:
        parser.error("--seed must be a nonnegative integer")
    t0 = time.perf_counter()
    code = run(args.config, args.mode, args.out, args.seed)
    if code == 0:
        print(f"wrote outputs to {args.out} ({time.perf_counter() - t0:.2f} s)", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
