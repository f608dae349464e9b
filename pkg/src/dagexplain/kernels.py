"""Selects the compiled split-search kernel, falling back to numpy.

Set ``DAGEXPLAIN_PURE=1`` to force the fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"

if os.environ.get("DAGEXPLAIN_PURE", "") not in ("", "0"):
    from ._kernels_py import best_split, gain_ratio_counts
else:
    try:
        from ._kernels import best_split, gain_ratio_counts

        BACKEND = "cython"
    except ImportError:
        from ._kernels_py import best_split, gain_ratio_counts

py_best_split = _kernels_py.best_split
py_gain_ratio_counts = _kernels_py.gain_ratio_counts

__all__ = ["BACKEND", "best_split", "gain_ratio_counts", "py_best_split", "py_gain_ratio_counts"]
