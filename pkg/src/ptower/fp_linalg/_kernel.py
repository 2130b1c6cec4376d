"""Kernel selection: compiled extension when available, numpy fallback otherwise.

``PTOWER_FORCE_PY=1`` in the environment forces the fallback (used by the
benchmark and by tests that compare the two backends).
"""

import os

from ptower.fp_linalg import _echelon_py

if os.environ.get("PTOWER_FORCE_PY") == "1":
    _impl = _echelon_py
else:
    try:
        from ptower.fp_linalg import _echelon_cy as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _echelon_py

row_reduce = _impl.row_reduce
BACKEND = _impl.BACKEND
