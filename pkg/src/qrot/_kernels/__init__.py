"""Hot kernels for the discrete operators.

The compiled backend (_core, Cython) is used when it built successfully;
otherwise the pure-numpy fallback (_numpy_impl) with identical semantics.
Set QROT_FORCE_FALLBACK=1 to force the fallback.
"""

import os

from . import _numpy_impl

if os.environ.get("QROT_FORCE_FALLBACK"):
    _impl = _numpy_impl
    BACKEND = "numpy"
else:
    try:
        from . import _core as _impl
        BACKEND = "compiled"
    except ImportError:
        _impl = _numpy_impl
        BACKEND = "numpy"

curve_operators = _impl.curve_operators
tri_operators = _impl.tri_operators


def available_backends():
    """Name -> module for every importable backend (used by benchmarks and
    the parity tests)."""
    backends = {"numpy": _numpy_impl}
    try:
        from . import _core
        backends["compiled"] = _core
    except ImportError:
        pass
    return backends
