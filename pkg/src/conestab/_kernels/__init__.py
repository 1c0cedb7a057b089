"""Kernel selection: compiled extension if importable, Python reference otherwise.

Set CONESTAB_PURE=1 to force the Python reference implementation.
"""

import os

if os.environ.get("CONESTAB_PURE", "0") == "1":
    from . import _pyref as _impl

    HAVE_NATIVE = False
else:
    try:
        from . import _native as _impl  # type: ignore[attr-defined]

        HAVE_NATIVE = True
    except ImportError:
        from . import _pyref as _impl

        HAVE_NATIVE = False

angular_integrate = _impl.angular_integrate
angular_dense = _impl.angular_dense
angular_hunt = _impl.angular_hunt
sturm_count = _impl.sturm_count
tridiag_smallest_eig = _impl.tridiag_smallest_eig

IMPLEMENTATION = "native" if HAVE_NATIVE else "python"
