"""Backend selection for the quenched-DP kernel.

Prefers the compiled Cython extension and falls back to the NumPy kernel
when the extension is unavailable.  Set COPOLYMER_FORCE_FALLBACK=1 in the
environment to force the fallback (used by the backend-equivalence tests
and the benchmark).
"""

from __future__ import annotations

import os

from ._dp import log_partition_numpy, log_partition_lse

__all__ = ["dp_log_partition", "dp_backend", "log_partition_numpy",
           "log_partition_lse"]

if os.environ.get("COPOLYMER_FORCE_FALLBACK"):
    dp_log_partition = log_partition_numpy
    dp_backend = "numpy-fallback"
else:
    try:
        from ._dp_core import log_partition_cython as dp_log_partition
        dp_backend = "cython"
    except ImportError:
        dp_log_partition = log_partition_numpy
        dp_backend = "numpy-fallback"
