"""Kernel dispatch: compiled extension when built, numpy fallback otherwise.

Set HODGEBOUND_PURE_PYTHON=1 to force the fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "python"
whitney_local = _kernels_py.whitney_local
rank_mod_p = _kernels_py.rank_mod_p
local_subsets = _kernels_py.local_subsets

if os.environ.get("HODGEBOUND_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled

        whitney_local = _compiled.whitney_local
        rank_mod_p = _compiled.rank_mod_p
        BACKEND = "compiled"
    except ImportError:  # extension not built
        pass
