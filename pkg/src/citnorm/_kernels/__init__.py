"""Hot-loop kernels with import-time backend selection.

The compiled Cython extension is used when it was built; otherwise the
pure-numpy fallback takes over transparently. ``CITNORM_PURE_PYTHON=1``
forces the fallback (useful for benchmarking and parity tests).
"""

from __future__ import annotations

import os

import numpy as np

from . import _pykernels

if os.environ.get("CITNORM_PURE_PYTHON", "0") not in ("", "0"):
    _impl = _pykernels
    BACKEND = "pure-python"
else:
    try:
        from . import _ckernels as _impl

        BACKEND = "compiled"
    except ImportError:
        _impl = _pykernels
        BACKEND = "pure-python"


def rank_scan(sorted_values, offsets):
    """Rank statistics over concatenated, per-group-sorted values.

    See ``_pykernels.rank_scan`` for the full contract. Integer input is
    coerced to int64, everything else to float64.
    """
    values = np.ascontiguousarray(sorted_values)
    if values.dtype.kind in "iub":
        values = np.ascontiguousarray(values, dtype=np.int64)
    elif values.dtype != np.float64:
        values = np.ascontiguousarray(values, dtype=np.float64)
    offs = np.ascontiguousarray(offsets, dtype=np.int64)
    if offs.size < 1 or offs[0] != 0 or offs[-1] != values.size:
        raise ValueError("offsets must span the value array (CSR boundaries)")
    if np.any(np.diff(offs) < 0):
        raise ValueError("offsets must be non-decreasing")
    return _impl.rank_scan(values, offs)


def accumulate(idx, weights, size):
    """Sum ``weights`` into ``size`` float64 bins addressed by ``idx``."""
    idx = np.ascontiguousarray(idx, dtype=np.int64)
    w = np.ascontiguousarray(weights, dtype=np.float64)
    size = int(size)
    if idx.size and (idx.min() < 0 or idx.max() >= size):
        raise ValueError("bin index out of range")
    return _impl.accumulate(idx, w, size)
