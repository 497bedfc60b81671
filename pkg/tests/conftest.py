import numpy as np
import pytest

from specgof.sim import DgpSpec, simulate


def pytest_addoption(parser):
    parser.addoption("--reps", type=int, default=None,
                     help="override Monte Carlo replication counts in the acceptance suite")


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def white500():
    return simulate(DgpSpec("iid", (), 500, 11))


def direct_forward(r, gam, include_current):
    """Per-index least squares on the frequencies above j (or from j on)."""
    n, q = gam.shape
    out = np.empty(n - q)
    off = 0 if include_current else 1
    for i in range(n - q):
        b = np.linalg.lstsq(gam[i + off:], r[i + off:], rcond=None)[0]
        out[i] = r[i] - gam[i] @ b
    return out


def direct_backward(r, gam, include_current):
    n, q = gam.shape
    out = np.empty(n - q)
    off = 1 if include_current else 0
    for j in range(q, n):
        b = np.linalg.lstsq(gam[:j + off], r[:j + off], rcond=None)[0]
        out[j - q] = r[j] - gam[j] @ b
    return out


def pytest_configure(config):
    config.acceptance_lines = {}


def pytest_terminal_summary(terminalreporter, config):
    lines = getattr(config, "acceptance_lines", {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for k in sorted(lines):
            terminalreporter.write_line(lines[k])


@pytest.fixture
def accept(request):
    """Record one PASS/FAIL line per acceptance criterion, then assert it."""
    def record(number: int, title: str, ok: bool, detail: str):
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
        request.config.acceptance_lines[number] = line
        print(line)
        assert ok, line
    return record


@pytest.fixture
def reps(request):
    """Replication count: the ``--reps`` override if given, else the default passed in."""
    override = request.config.getoption("--reps")
    return lambda default: override or default
