"""Backend selection for the hot array primitives.

The compiled extension (`cone_moduli._fastpath`, Cython) is used when it
imported cleanly; otherwise the numpy reference implementations take over.
CONE_MODULI_BACKEND=python forces the fallback, =compiled demands the
extension (ImportError if missing), =auto (default) picks compiled if present.
"""

import os

from . import _ref

_FUNCS = ("prod_abs_pow", "rational_sum", "rational_sum_constrained",
          "r_kernel", "cauchy_pair")

try:
    from cone_moduli import _fastpath as _compiled
except ImportError:
    _compiled = None

_active_name = None
prod_abs_pow = None
rational_sum = None
rational_sum_constrained = None
r_kernel = None
cauchy_pair = None


def available_backends():
    names = ["python"]
    if _compiled is not None:
        names.append("compiled")
    return names


def backend_name():
    return _active_name


def set_backend(name):
    """Switch the active backend ("python" or "compiled"). Returns the name."""
    global _active_name
    if name == "auto":
        name = "compiled" if _compiled is not None else "python"
    if name == "python":
        mod = _ref
    elif name == "compiled":
        if _compiled is None:
            raise ImportError("compiled backend requested but cone_moduli._fastpath "
                              "did not build; reinstall or set CONE_MODULI_BACKEND=python")
        mod = _compiled
    else:
        raise ValueError(f"unknown backend {name!r}")
    g = globals()
    for f in _FUNCS:
        g[f] = getattr(mod, f)
    _active_name = name
    return name


set_backend(os.environ.get("CONE_MODULI_BACKEND", "auto"))
