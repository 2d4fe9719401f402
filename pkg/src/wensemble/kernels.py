"""Kernel backend selection.

The compiled extension is used when it imports; set
``WENSEMBLE_PURE_PYTHON=1`` to force the numpy fallback.
"""

import os

from wensemble import _pykernels

if os.environ.get("WENSEMBLE_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from wensemble import _ckernels as _impl
    except ImportError:
        _impl = _pykernels

BACKEND = "cython" if _impl is not _pykernels else "python"

confusion_counts = _impl.confusion_counts
roc_sweep = _impl.roc_sweep
weighted_fuse = _impl.weighted_fuse
nearest_remap = _impl.nearest_remap


def compiled():
    """The compiled kernel module, or None if it was not built."""
    try:
        from wensemble import _ckernels
    except ImportError:
        return None
    return _ckernels
