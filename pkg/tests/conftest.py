import numpy as np
import pytest

from sparsweep import _backend, _core_py
from sparsweep.grid import make_medium, unit_square_grid
from sparsweep.solver import prepare

BACKENDS = ["compiled", "python"] if _backend.COMPILED else ["python"]


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Run a test once per kernel backend."""
    if request.param == "python":
        for name in ("bessel01", "stencil_apply", "assemble_rows"):
            monkeypatch.setattr(_backend, name, getattr(_core_py, name))
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_field(rng, n):
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


def bump_setup(n, amp, omega=None, **kw):
    g = unit_square_grid(n, float(n) if omega is None else omega)
    med = make_medium({"kind": "smooth_bump", "amplitude": amp}, g)
    return prepare(med, **kw)


def rel(a, b):
    return float(np.linalg.norm(np.ravel(a - b)) / np.linalg.norm(np.ravel(b)))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
