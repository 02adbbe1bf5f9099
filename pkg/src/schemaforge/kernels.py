"""Backend selection for the string-matching kernels.

The compiled extension is used when it imports; otherwise, or when
``SCHEMAFORGE_PURE_PYTHON=1`` is set, the pure-Python versions are used.
``BACKEND`` names the active one.
"""

from __future__ import annotations

import os

from schemaforge import _pykernels

BACKEND = "python"
levenshtein = _pykernels.levenshtein
best_window = _pykernels.best_window

if os.environ.get("SCHEMAFORGE_PURE_PYTHON", "") != "1":
    try:
        from schemaforge import _kernels
    except ImportError:
        pass
    else:
        BACKEND = "cython"
        levenshtein = _kernels.levenshtein
        best_window = _kernels.best_window

__all__ = ["BACKEND", "best_window", "levenshtein"]
