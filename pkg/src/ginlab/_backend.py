"""Select the compiled kernel module at import, falling back to numpy.

Set ``GINLAB_PURE_PYTHON=1`` to force the fallback.
"""

import logging
import os

log = logging.getLogger(__name__)

if os.environ.get("GINLAB_PURE_PYTHON", "") not in ("", "0"):
    from . import _pykernels as kernels
    COMPILED = False
else:
    try:
        from . import _ckernels as kernels
        COMPILED = True
    except ImportError:  # extension not built
        from . import _pykernels as kernels
        COMPILED = False
        log.debug("compiled kernels unavailable; using numpy fallback")

pfaffian_batch = kernels.pfaffian_batch
band_lu_factor = kernels.band_lu_factor
band_lu_forward = kernels.band_lu_forward
pair_conjugates = kernels.pair_conjugates

__all__ = ["COMPILED", "pfaffian_batch", "band_lu_factor", "band_lu_forward", "pair_conjugates"]
