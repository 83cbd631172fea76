"""Kernel selection: compiled extension when available, NumPy otherwise.

Set MATCHSIM_PURE_PYTHON=1 to force the NumPy reference regardless of
what is installed (used by the cross-checking tests and the benchmark).
"""

import os

from . import _reference

BACKEND = "numpy"
year_step = _reference.year_step

if os.environ.get("MATCHSIM_PURE_PYTHON", "") != "1":
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        BACKEND = "compiled"
        year_step = _kernels.year_step
