import os
import subprocess
import sys

import numpy as np
import pytest

from sparsweep import _backend, _core_py
from sparsweep.sparsify import class_grid

core = pytest.importorskip("sparsweep._core")


def test_compiled_selected_by_default():
    assert _backend.COMPILED


def test_env_forces_fallback():
    code = "from sparsweep import _backend; print(_backend.COMPILED)"
    env = {**os.environ, "SPARSWEEP_PURE_PYTHON": "1"}
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert out.stdout.strip() == "False"


def test_bessel_agree():
    x = np.concatenate([np.geomspace(1e-6, 4, 200), np.linspace(4, 30, 300), np.geomspace(30, 1e6, 200)])
    for a, b in zip(core.bessel01(x), _core_py.bessel01(x)):
        assert np.max(np.abs(a - b) / np.maximum(1, np.abs(b))) <= 1e-15


def test_stencil_apply_agree(rng):
    vals = rng.standard_normal((13, 11, 9)) + 1j * rng.standard_normal((13, 11, 9))
    f = rng.standard_normal((13, 11)) + 1j * rng.standard_normal((13, 11))
    a, b = core.stencil_apply(vals, f), _core_py.stencil_apply(vals, f)
    assert np.max(np.abs(a - b)) <= 1e-13


def test_assemble_rows_agree(rng):
    cls = class_grid(9, 7)
    alpha = rng.standard_normal((9, 9)) + 1j * rng.standard_normal((9, 9))
    coup = rng.standard_normal((9, 9)) + 1j * rng.standard_normal((9, 9))
    m = rng.standard_normal((7, 9)) + 1j * rng.standard_normal((7, 9))
    a = core.assemble_rows(cls, alpha, coup, m, 81.0)
    b = _core_py.assemble_rows(cls, alpha, coup, m, 81.0)
    assert np.max(np.abs(a - b)) <= 1e-13


def test_fallback_setup_matches(monkeypatch):
    from conftest import bump_setup

    fast = bump_setup(24, 0.3, L=2)
    for name in ("bessel01", "stencil_apply", "assemble_rows"):
        monkeypatch.setattr(_backend, name, getattr(_core_py, name))
    slow = bump_setup(24, 0.3, L=2)
    assert np.allclose(fast.C.vals, slow.C.vals, rtol=1e-13, atol=1e-15)
    g = np.ones(fast.grid.N, dtype=complex)
    assert np.allclose(fast.precond(g), slow.precond(g), rtol=1e-11, atol=1e-13)
