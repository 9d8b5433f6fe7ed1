"""Kernel backend selection.

The compiled extension is used when it was built; setting ``SSETK_PURE_PYTHON=1``
forces the numpy fallback.  ``BACKEND`` names the active one.
"""

import os

from . import _pykernels as python_backend

compiled_backend = None
if os.environ.get("SSETK_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as compiled_backend
    except ImportError:  # extension not built
        compiled_backend = None

_active = compiled_backend if compiled_backend is not None else python_backend
BACKEND = "compiled" if compiled_backend is not None else "python"

bcd_sweep = _active.bcd_sweep
gray_maxcut = _active.gray_maxcut
expansion_profile = _active.expansion_profile
ternary_dense_cut = _active.ternary_dense_cut
small_set_search = _active.small_set_search
prefix_cuts = _active.prefix_cuts
two_sided_prefix = _active.two_sided_prefix

__all__ = [
    "BACKEND",
    "bcd_sweep",
    "compiled_backend",
    "expansion_profile",
    "gray_maxcut",
    "prefix_cuts",
    "python_backend",
    "small_set_search",
    "ternary_dense_cut",
    "two_sided_prefix",
]
