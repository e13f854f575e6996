"""Numerical core selection.

The compiled extension is preferred; the numpy fallback is used when the
extension is unavailable or ``CAPDIM_FORCE_FALLBACK`` is set (any
non-empty value). ``BACKEND`` records which one is active.
"""

import os

if os.environ.get("CAPDIM_FORCE_FALLBACK"):
    from capdim._backend import _core_py as core

    BACKEND = "python"
else:
    try:
        from capdim._backend import _core as core  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        from capdim._backend import _core_py as core  # type: ignore[no-redef]

        BACKEND = "python"

__all__ = ["core", "BACKEND"]
