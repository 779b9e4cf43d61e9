"""Backend selection for the hot integration kernels.

The compiled extension is preferred when present; the numpy reference is
used otherwise.  Setting the environment variable ``DMPKIT_PURE`` (to any
nonempty value) forces the reference backend, which is handy for
benchmarking and for debugging suspected extension issues.
"""

import os

from . import ref

if os.environ.get("DMPKIT_PURE"):
    _impl = ref
else:
    try:
        from . import _core as _impl
    except ImportError:
        _impl = ref

BACKEND = _impl.BACKEND
forcing_value = _impl.forcing_value
discrete_rollout = _impl.discrete_rollout

VARIANT_CODES = {"classical": 0, "scale": 1, "pastor": 2}
