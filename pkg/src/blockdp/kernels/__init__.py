"""Kernel backend selection.

The hot loops ship twice: numba-compiled (``_numba_impl``) and pure
numpy (``_numpy_impl``).  The environment variable ``BLOCKDP_BACKEND``
picks one:

* unset or ``auto`` -- numba when it imports, numpy otherwise;
* ``numba`` -- require the compiled kernels, fail loudly if unavailable;
* ``numpy`` -- force the pure-numpy fallback.
"""

import os

from . import _numpy_impl

MODEL_POISSON = _numpy_impl.MODEL_POISSON
MODEL_GAUSSIAN = _numpy_impl.MODEL_GAUSSIAN

_requested = os.environ.get("BLOCKDP_BACKEND", "auto").strip().lower()
if _requested not in ("auto", "numba", "numpy"):
    raise RuntimeError(
        f"BLOCKDP_BACKEND must be 'auto', 'numba' or 'numpy', got {_requested!r}"
    )

if _requested == "numpy":
    _impl = _numpy_impl
    BACKEND = "numpy"
else:
    try:
        from . import _numba_impl as _impl

        BACKEND = "numba"
    except ImportError as exc:
        if _requested == "numba":
            raise RuntimeError("BLOCKDP_BACKEND=numba but numba is not importable") from exc
        _impl = _numpy_impl
        BACKEND = "numpy"

prefix_compensated = _impl.prefix_compensated
poisson_block = _impl.poisson_block
gaussian_block = _impl.gaussian_block
dp_sweep = _impl.dp_sweep
dp_fixed_k = _impl.dp_fixed_k
fill_block_table = _impl.fill_block_table
exhaustive_scan = _impl.exhaustive_scan
