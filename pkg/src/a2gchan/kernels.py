"""Backend selection for the numerical kernels.

The compiled Cython module is used when it imports cleanly; otherwise the
numpy fallback is used. Set ``A2GCHAN_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

import numpy as np

from . import _kernels_py

if os.environ.get("A2GCHAN_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels_c as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

bilinear_periodic = _impl.bilinear_periodic
moving_median = _impl.moving_median

# numpy's vectorized transcendentals beat the scalar C loop on large batches
ECEF_BATCH_CROSSOVER = 200


def ecef_to_geodetic(x, y, z):
    if _impl is _kernels_py or np.size(x) >= ECEF_BATCH_CROSSOVER:
        return _kernels_py.ecef_to_geodetic(x, y, z)
    return _impl.ecef_to_geodetic(x, y, z)


__all__ = ["BACKEND", "bilinear_periodic", "ecef_to_geodetic", "moving_median"]
