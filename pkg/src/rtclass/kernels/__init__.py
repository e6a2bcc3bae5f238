"""Hot inner loops: split search, tree traversal, Pegasos updates.

Two interchangeable backends exist.  The numba one is used when numba
imports and ``RTCLASS_DISABLE_NUMBA`` is unset/false; otherwise the
pure-numpy one is.  Split search and traversal agree bit for bit across
backends; Pegasos agrees to rounding.
"""
import importlib
import os

from . import numpy_kernels

_disabled = os.environ.get("RTCLASS_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")

numba_kernels = None
if not _disabled:
    try:
        # import_module: a plain from-import would pick up the None above
        numba_kernels = importlib.import_module(".numba_kernels", __name__)
    except ImportError:  # numba missing or broken
        numba_kernels = None

_impl = numba_kernels if numba_kernels is not None else numpy_kernels
BACKEND = "numba" if _impl is numba_kernels else "numpy"

best_split = _impl.best_split
predict_tree = _impl.predict_tree
pegasos_train = _impl.pegasos_train

__all__ = ["BACKEND", "best_split", "predict_tree", "pegasos_train",
           "numpy_kernels", "numba_kernels"]
