"""Pick the compiled kernels when importable, otherwise the numpy fallback."""

import os

if os.environ.get("PHDIM_PURE_PYTHON", "") not in ("", "0"):
    from . import _fallback as kernels

    COMPILED = False
else:
    try:
        from . import _kernels as kernels

        COMPILED = True
    except ImportError:
        from . import _fallback as kernels

        COMPILED = False

BACKEND = "cython" if COMPILED else "python"
