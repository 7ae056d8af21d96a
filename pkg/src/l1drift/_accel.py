"""Backend selection for the hot loops.

``L1DRIFT_BACKEND=numpy`` forces the pure-numpy path; the default is numba
when it imports, numpy otherwise. The choice is made once at import.
"""

import importlib
import logging
import os

log = logging.getLogger(__name__)

_requested = os.environ.get("L1DRIFT_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ImportError(f"L1DRIFT_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

BACKEND = "numpy"
if _requested == "numba":
    try:
        kernels = importlib.import_module("._kernels_numba", __package__)
        BACKEND = "numba"
    except ImportError:
        log.warning("numba unavailable, falling back to the numpy backend")
if BACKEND == "numpy":
    kernels = importlib.import_module("._kernels_numpy", __package__)


def load_backend(name: str):
    """Import a specific backend module regardless of the env flag."""
    return importlib.import_module(f"._kernels_{name}", __package__)
