import numpy as np
import pytest

from monocat.priors import QualitySupport, build_receiver, build_sender
from monocat.schooling import SchoolingConfig


def random_family(rng):
    """A random analytic family descriptor (power, dual power, logistic or a mixture)."""
    kind = rng.choice(["power", "dual_power", "logistic", "mixture"])
    if kind == "power":
        return "power", {"k": float(rng.uniform(0.6, 2.5))}
    if kind == "dual_power":
        return "dual_power", {"k": float(rng.uniform(1.0, 3.0))}
    if kind == "logistic":
        return "logistic", {"center": float(rng.uniform(0.25, 0.75)), "scale": float(rng.uniform(0.06, 0.3))}
    comps = []
    for _ in range(2):
        sub, params = random_family(rng) if rng.random() < 0.3 else ("power", {"k": float(rng.uniform(0.7, 2.0))})
        if sub == "mixture":
            sub, params = "logistic", {"center": 0.5, "scale": 0.1}
        comps.append({"family": sub, "weight": float(rng.uniform(0.2, 1.0)), **params})
    return "mixture", {"components": comps}


def random_instance(seed, n=1001, cdf_sender=False):
    rng = np.random.default_rng(seed)
    R = build_receiver(*random_family(rng), n=n)
    kind, params = random_family(rng)
    if not cdf_sender and rng.random() < 0.3:
        params = dict(params, value_at_lo=float(rng.uniform(-0.3, 0.0)))
    S = build_sender(kind, params, n=n)
    return S, R


def random_school(rng, n=1001):
    lo = float(rng.uniform(0.0, 1.0))
    support = QualitySupport(lo, lo + float(rng.uniform(0.5, 2.0)))
    R = build_receiver("power", {"k": float(rng.uniform(0.7, 2.0))}, support, n)
    F0 = build_receiver("power", {"k": float(rng.uniform(0.3, 1.5))}, support, n)
    c0, drop = float(rng.uniform(1.0, 3.0)), float(rng.uniform(0.1, 0.75))
    cost = lambda a: c0 - drop * (np.asarray(a, dtype=float) - lo) / support.width
    lam = float(rng.uniform(0.0, 0.9 * (c0 - drop)))
    return SchoolingConfig(R, F0, cost, lam, float(rng.uniform(0.0, 1.0)), n)


@pytest.fixture
def uniform_R():
    return build_receiver("uniform")


@pytest.fixture
def intro():
    """Uniform receiver, sender uniform on [0.7, 0.8]."""
    return build_sender("uniform", {"lo": 0.7, "hi": 0.8}), build_receiver("uniform")


# ---------------------------------------------------------------------------
# acceptance summary: one line per criterion at the end of the run

_ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Record ``(criterion, ok, detail)``; the line is printed in the terminal summary."""
    lines = request.config.stash.setdefault(_ACCEPTANCE_KEY, [])

    def record(criterion, ok, detail=""):
        lines.append((criterion, bool(ok), detail))
        assert ok, f"{criterion}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, ok, detail in sorted(lines, key=lambda t: int(t[0].split()[0][2:])):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {criterion}  {detail}")
