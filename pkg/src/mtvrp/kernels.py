"""Kernel backend selection.

Imports the compiled ``_kernels`` extension when available, otherwise the
pure-Python twin.  Set ``MTVRP_PURE_PYTHON=1`` to force the fallback (used by
the parity tests and the kernel benchmark).
"""

import os

if os.environ.get("MTVRP_PURE_PYTHON") == "1":
    from mtvrp import _kernels_py as backend
else:
    try:
        from mtvrp import _kernels as backend  # type: ignore[attr-defined]
    except ImportError:
        from mtvrp import _kernels_py as backend

BACKEND = "compiled" if backend.__name__.endswith("._kernels") else "pure"

reach_interval = backend.reach_interval
efat = backend.efat
straight_cost = backend.straight_cost
lfdt = backend.lfdt
segment_distance = backend.segment_distance
