import numpy as np
import pytest
from hypothesis import settings

from ewreduce.scalar import Params, u, v, w, wb, wt, z, zt

settings.register_profile("ewreduce", max_examples=15, deadline=None)
settings.load_profile("ewreduce")


def rc(rng, scale=0.8):
    return complex(*rng.uniform(-scale, scale, 2))


def euclid_points(n, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        c = rc(rng)
        out.append({w: c, wb: c.conjugate(), v: float(rng.uniform(-1, 1))})
    return out


def holo_points(n, seed=0):
    rng = np.random.default_rng(seed)
    return [{w: rc(rng), wt: rc(rng), u: rc(rng, 0.5)} for _ in range(n)]


def null_points(n, seed=0):
    rng = np.random.default_rng(seed)
    return [{w: rc(rng), wt: rc(rng), z: 0.6 + 0.3 * rc(rng), zt: 0.6 + 0.3 * rc(rng)} for _ in range(n)]


@pytest.fixture
def params():
    return Params.euclidean(alpha=-0.6, b=1.3)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
