"""Kernel backend selection.

The compiled Cython module is preferred; the pure-NumPy fallback is
used when it is missing or when ``SOBROUGH_BACKEND=python``.
"""

import os

_forced = os.environ.get("SOBROUGH_BACKEND", "").strip().lower()

if _forced == "python":
    from . import _fallback as impl
    BACKEND = "python"
elif _forced == "compiled":
    from . import _speedups as impl  # raises if unavailable, on purpose
    BACKEND = "compiled"
else:
    try:
        from . import _speedups as impl
        BACKEND = "compiled"
    except ImportError:
        from . import _fallback as impl
        BACKEND = "python"

level_layout = impl.level_layout
rowwise_mul = impl.rowwise_mul
chen_prefix = impl.chen_prefix
inverse_batch = impl.inverse_batch
hom_dist_block = impl.hom_dist_block
hom_dist_matrix = impl.hom_dist_matrix
level_diff_block = impl.level_diff_block
sobolev_pair_sum = impl.sobolev_pair_sum
partition_dp_max = impl.partition_dp_max
interval_dp_table = impl.interval_dp_table
