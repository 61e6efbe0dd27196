"""Kernel backend selection.

Prefers the compiled extension and falls back to the NumPy implementation
when it is missing. Set MALTA_PURE_PYTHON=1 to force the fallback.
"""

import os

from malta._kernels import _fallback

if os.environ.get("MALTA_PURE_PYTHON"):
    _impl = _fallback
else:
    try:
        from malta._kernels import _native as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _fallback

BACKEND: str = _impl.BACKEND
window_count = _impl.window_count
latest_flagged_at_or_before = _impl.latest_flagged_at_or_before
median_clamped_ratio = _impl.median_clamped_ratio
rank_auc = _impl.rank_auc
mann_whitney_u = _impl.mann_whitney_u
cliffs_delta = _impl.cliffs_delta

__all__ = [
    "BACKEND",
    "window_count",
    "latest_flagged_at_or_before",
    "median_clamped_ratio",
    "rank_auc",
    "mann_whitney_u",
    "cliffs_delta",
]
