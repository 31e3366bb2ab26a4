"""Select the compiled kernels when available, else the numpy fallback."""
import os

from . import _core_py

if os.environ.get("SPARSWEEP_PURE_PYTHON", "") not in ("", "0"):
    core = _core_py
    COMPILED = False
else:
    try:
        from . import _core as core
        COMPILED = True
    except ImportError:  # extension not built
        core = _core_py
        COMPILED = False

bessel01 = core.bessel01
stencil_apply = core.stencil_apply
assemble_rows = core.assemble_rows
OFFSETS = _core_py.OFFSETS
