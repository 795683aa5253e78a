"""Batched numerical kernels with a compiled fast path.

The Cython extension is preferred when it is importable; otherwise the
NumPy reference implementation is used. Set ``LMIMO_PURE_PYTHON=1`` to
force the NumPy backend (the benchmark and the backend-equivalence
tests rely on this). Both backends are bit-identical by construction.
"""

import os

from . import _ops_py

if os.environ.get("LMIMO_PURE_PYTHON"):
    _impl = _ops_py
    BACKEND = "numpy"
else:
    try:
        from . import _ops_cy as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _ops_py
        BACKEND = "numpy"

fold_batch = _impl.fold_batch
quantize_batch = _impl.quantize_batch
diff_batch = _impl.diff_batch
cumsum0_batch = _impl.cumsum0_batch
round_2lam_batch = _impl.round_2lam_batch
unfold_batch = _impl.unfold_batch

__all__ = [
    "BACKEND",
    "fold_batch",
    "quantize_batch",
    "diff_batch",
    "cumsum0_batch",
    "round_2lam_batch",
    "unfold_batch",
]
