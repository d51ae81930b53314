"""Kernel backend selection: compiled extension if available, numpy otherwise.

Set ``LEXKIT_PURE=1`` to force the pure-python backend (used by the
benchmark and the backend-equivalence tests). Both backends are
bit-compatible; see ``benchmarks/bench_kernels.py`` for the speed gap.
"""

from __future__ import annotations

import os

from . import _pykernels

if os.environ.get("LEXKIT_PURE", "") not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _pykernels

dtw_norm = _impl.dtw_norm
levenshtein = _impl.levenshtein
dpdp_backtrack = _impl.dpdp_backtrack


def backend() -> str:
    """Name of the active backend: 'compiled' or 'python'."""
    return _impl.BACKEND
