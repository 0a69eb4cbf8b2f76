"""Hot loops: compiled extension when available, numpy fallback otherwise.

Set ``SVRISK_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _pykernels as python

compiled = None
if os.environ.get("SVRISK_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as compiled
    except ImportError:  # extension not built
        compiled = None

_active = compiled if compiled is not None else python
BACKEND = "cython" if compiled is not None else "python"

h_sweep = _active.h_sweep
sv_logjoint = _active.sv_logjoint
garch_filter = _active.garch_filter

__all__ = ["BACKEND", "compiled", "python", "h_sweep", "sv_logjoint", "garch_filter"]
