import numpy as np
import pytest


def central_diff(f, x, rel_step=1e-6):
    """Central finite-difference gradient; step scaled by coordinate magnitude."""
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        h = rel_step * max(1.0, abs(x[i]))
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (f(xp) - f(xm)) / (2 * h)
    return g


def assert_grad_close(analytic, numeric, rtol=1e-5, atol_scale=1e-7):
    """Relative agreement, with an absolute floor tied to the gradient's scale."""
    analytic, numeric = np.asarray(analytic), np.asarray(numeric)
    scale = max(1.0, float(np.max(np.abs(analytic))))
    np.testing.assert_allclose(analytic, numeric, rtol=rtol, atol=atol_scale * scale)


@pytest.fixture
def rng():
    return np.random.default_rng(20240101)


_GATE_KEY = pytest.StashKey[list]()


@pytest.fixture
def gate(request):
    """Record one pass/fail line for an acceptance criterion.

    Usage: ``with gate("3 half-plane Gaussian", detail): ...``.  The lines are
    printed in the terminal summary and also echoed immediately.
    """
    lines = request.config.stash.setdefault(_GATE_KEY, [])

    class _Gate:
        def __init__(self, name):
            self.name, self.detail = name, ""

        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            status = "PASS" if exc_type is None else "FAIL"
            line = f"[{status}] criterion {self.name}" + (f": {self.detail}" if self.detail else "")
            lines.append(line)
            print(line)
            return False

    return _Gate


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_GATE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
