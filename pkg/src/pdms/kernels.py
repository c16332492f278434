"""Kernel backend selection.

The compiled ``_kernels`` extension is used when it imports; otherwise
the pure-Python ``_pykernels`` module.  Setting ``PDMS_PURE_PYTHON=1``
forces the fallback.
"""

import os

from . import _pykernels as python_backend

compiled_backend = None
if os.environ.get("PDMS_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as compiled_backend
    except ImportError:  # extension not built
        compiled_backend = None

backend = compiled_backend if compiled_backend is not None else python_backend
BACKEND_NAME = "compiled" if compiled_backend is not None and backend is compiled_backend else "python"

matmul = backend.matmul
rref = backend.rref
det = backend.det
inverse = backend.inverse
spanned_units = backend.spanned_units
first_singular_minor = backend.first_singular_minor
