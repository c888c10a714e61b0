"""Hot-kernel backend selection.

The compiled Cython extension is preferred; the pure-numpy module is a
drop-in fallback.  Force the fallback with SUBNEWTON_PURE_PYTHON=1.
"""

import os

from . import pure

if os.environ.get("SUBNEWTON_PURE_PYTHON"):
    _impl = pure
else:
    try:
        from . import _fast as _impl
    except ImportError:
        _impl = pure

BACKEND = _impl.BACKEND
hvp_indexed = _impl.hvp_indexed
sgi_iterate = _impl.sgi_iterate
