"""Kernel dispatch: compiled extension when available, numpy otherwise.

Set ``LADDER_NO_EXT=1`` to force the numpy fallback (used by the benchmark
and by tests that cross-check the two implementations).
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("LADDER_NO_EXT", "") not in ("", "0"):
    _impl = _kernels_py
    HAVE_EXT = False
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        HAVE_EXT = True
    except ImportError:
        _impl = _kernels_py
        HAVE_EXT = False

spmm_into = _impl.spmm
exact_hop_pairs = _impl.exact_hop_pairs
adam_step = _impl.adam_step
