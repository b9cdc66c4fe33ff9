"""Backend selection for the blocker-loss kernel.

The compiled extension is used when it was built; otherwise the numpy
implementation is loaded. Set ``DRXSIM_BACKEND=python`` to force the
fallback.
"""
from __future__ import annotations

import os

from . import _kernels_py

python_backend = _kernels_py

if os.environ.get("DRXSIM_BACKEND", "").lower() == "python":
    compiled_backend = None
else:
    try:
        from . import _kernels as compiled_backend
    except ImportError:  # extension not built
        compiled_backend = None

_active = compiled_backend if compiled_backend is not None else python_backend

BACKEND: str = _active.BACKEND
link_blockage_loss_db = _active.link_blockage_loss_db
